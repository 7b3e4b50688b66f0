"""Linear algebra over GF(2) with vectors stored as Python ints (bit i = entry i)."""
from __future__ import annotations

from typing import Iterable


def dot(a: int, b: int) -> int:
    return (a & b).bit_count() & 1


def row_reduce(rows: Iterable[int]) -> list[int]:
    """Reduced row-echelon basis of the span of ``rows``, pivots descending."""
    basis: list[int] = []
    for r in rows:
        for b in basis:
            if r & (1 << (b.bit_length() - 1)):
                r ^= b
        if r:
            # clear the new pivot from the existing rows to stay fully reduced
            pivot = 1 << (r.bit_length() - 1)
            basis = [b ^ r if b & pivot else b for b in basis]
            basis.append(r)
    return sorted(basis, reverse=True)


def rank(rows: Iterable[int]) -> int:
    return len(row_reduce(rows))


def nullspace(rows: Iterable[int], n: int) -> list[int]:
    """Basis of ``{v : r . v = 0 for every r}`` in GF(2)^n, ascending by free bit."""
    basis = row_reduce(rows)
    pivots = {b.bit_length() - 1: b for b in basis}
    out = []
    for free in range(n):
        if free in pivots:
            continue
        v = 1 << free
        for p, b in pivots.items():
            if b >> free & 1:
                v |= 1 << p
        out.append(v)
    return out


def in_span(v: int, rows: Iterable[int]) -> bool:
    for b in row_reduce(rows):
        if v & (1 << (b.bit_length() - 1)):
            v ^= b
    return v == 0

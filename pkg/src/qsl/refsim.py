"""
Reference state-vector simulator over the same circuit IR.

Standard unitary semantics: ``S = diag(1, i)``, ``Y = [[0, -i], [i, 0]]``,
multi-controlled gates act on basis states.  Amplitude index bit ``i`` is
wire ``i``.  Measurements and coins branch the simulation; each branch keeps
its own record so classically controlled gates can consult it, and branch
weights are multiplied out into the final distribution.

QSL preparations map to eigenstates: ``(Z, v) -> |v>``, ``(X, v) -> H|v>``,
``(Y, v) -> S H|v>``.  Mixed and point preparations have no pure-state
counterpart and are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np

from .engine import Distribution, Experiment
from .kernel import Circuit, Coin, Gate, Measure, Prepare

__all__ = ["RefsimError", "AmplitudeState", "MAX_WIDTH", "gate_matrix", "statevector_run",
           "ideal_distribution", "basis_map"]

MAX_WIDTH = 14
TOL = 1e-10

_SQ = 1 / np.sqrt(2)
_ONE_QUBIT = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "H": np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex),
    "S": np.diag([1, 1j]),
    "Sinv": np.diag([1, -1j]),
}


class RefsimError(ValueError):
    pass


@dataclass
class AmplitudeState:
    amplitudes: np.ndarray
    n: int

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(self.probabilities.sum()))

    def basis_index(self) -> int:
        """Index of the single basis state carrying all the weight."""
        probs = self.probabilities
        k = int(np.argmax(probs))
        if abs(probs[k] - 1) > TOL:
            raise RefsimError("state is not a computational basis state")
        return k


def _local_perm(kind: str, k: int, polarities: tuple[int, ...]):
    """Local basis permutation for the reversible classical gates."""
    def f(v: int) -> int:
        b = [(v >> i) & 1 for i in range(k)]
        if kind == "CNOT":
            b[1] ^= b[0]
        elif kind == "SWAP":
            b[0], b[1] = b[1], b[0]
        elif kind == "Toffoli":
            b[2] ^= b[0] & b[1]
        elif kind == "Fredkin":
            if b[0]:
                b[1], b[2] = b[2], b[1]
        elif kind == "NToffoli":
            b[-1] ^= int(all(b[i] == polarities[i] for i in range(k - 1)))
        return sum(bit << i for i, bit in enumerate(b))
    return f


@lru_cache(maxsize=None)
def _matrix(kind: str, k: int, polarities: tuple[int, ...]) -> np.ndarray:
    if kind in _ONE_QUBIT:
        return _ONE_QUBIT[kind]
    if kind == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    f = _local_perm(kind, k, polarities)
    m = np.zeros((1 << k, 1 << k), dtype=complex)
    for v in range(1 << k):
        m[f(v), v] = 1
    return m


def gate_matrix(g: Gate) -> np.ndarray:
    """Matrix on ``g.wires``; local bit ``k`` of the index is ``g.wires[k]``."""
    if g.kind == "CC":
        raise RefsimError("classically controlled gates have no fixed matrix")
    return _matrix(g.kind, len(g.wires), tuple(g.polarities))


# --------------------------------------------------------------------------
# Dense application
# --------------------------------------------------------------------------

def _apply_dense(psi: np.ndarray, n: int, m: np.ndarray, wires: tuple[int, ...]) -> np.ndarray:
    k = len(wires)
    t = psi.reshape((2,) * n)               # axis a holds wire n-1-a
    axes = [n - 1 - w for w in reversed(wires)]  # most significant local bit first
    mt = m.reshape((2,) * (2 * k))
    out = np.tensordot(mt, t, axes=(list(range(k, 2 * k)), axes))
    out = np.moveaxis(out, list(range(k)), axes)
    return out.reshape(-1)


def _apply_gate(psi: np.ndarray, n: int, g: Gate, record: tuple[int, ...]) -> np.ndarray:
    if g.kind == "CC":
        if record[g.cbit] != g.cvalue:
            return psi
        g = g.inner
    return _apply_dense(psi, n, gate_matrix(g), g.wires)


def _check_width(n: int, max_width: int) -> None:
    if n > max_width:
        raise RefsimError(f"width {n} exceeds the dense cap of {max_width}")


def statevector_run(circuit: Circuit, input: int = 0, max_width: int = MAX_WIDTH) -> AmplitudeState:
    """Apply the unitary part of ``circuit`` to basis state ``|input>``."""
    n = circuit.width
    _check_width(n, max_width)
    if not circuit.is_unitary():
        raise RefsimError("statevector_run takes gate-only circuits; use ideal_distribution")
    psi = np.zeros(1 << n, dtype=complex)
    psi[input] = 1
    for g in circuit.ops:
        psi = _apply_gate(psi, n, g, ())
    return AmplitudeState(psi, n)


# --------------------------------------------------------------------------
# Measurement branching
# --------------------------------------------------------------------------

_H = _ONE_QUBIT["H"]
_HS_DAG = _ONE_QUBIT["H"] @ _ONE_QUBIT["Sinv"]   # maps the Y eigenbasis onto Z
_S_H = _ONE_QUBIT["S"] @ _ONE_QUBIT["H"]


def _bits(n: int, w: int) -> np.ndarray:
    return (np.arange(1 << n) >> w) & 1


def _project(psi: np.ndarray, mask: np.ndarray) -> tuple[float, np.ndarray]:
    """Weight of the ``mask`` subspace and the renormalised projection."""
    sub = np.where(mask, psi, 0)
    p = float(np.vdot(sub, sub).real)
    return p, (sub / np.sqrt(p) if p > TOL else sub)


def _rotate(psi, n, m, wires):
    for w in wires:
        psi = _apply_dense(psi, n, m, (w,))
    return psi


def _measure_branches(psi: np.ndarray, n: int, m: Measure) -> list[tuple[float, tuple[int, ...], np.ndarray]]:
    """List of ``(probability, outcome bits, post-state)``."""
    k, w = m.kind, m.wires
    if k == "Bell":
        out = []
        for p1, (ox,), s1 in _measure_branches(psi, n, Measure("ZZ", w)):
            for p2, (op,), s2 in _measure_branches(s1, n, Measure("XX", w)):
                out.append((p1 * p2, (ox, op), s2))
        return out
    if k in ("X", "Y", "XX", "ZX"):
        pre, post = ((_HS_DAG, _S_H) if k == "Y" else (_H, _H))
        rot = {"X": w, "Y": w, "XX": w, "ZX": w[1:]}[k]
        zkind = "Z" if len(w) == 1 else "ZZ"
        psi = _rotate(psi, n, pre, rot)
        return [(p, o, _rotate(s, n, post, rot))
                for p, o, s in _measure_branches(psi, n, Measure(zkind, w))]
    if k == "Z":
        value = _bits(n, w[0])
    elif k == "ZZ":
        value = _bits(n, w[0]) ^ _bits(n, w[1])
    elif k == "AllZero":
        any_one = np.zeros(1 << n, dtype=np.int64)
        for a in w:
            any_one |= _bits(n, a)
        value = 1 - any_one
    else:  # pragma: no cover
        raise RefsimError(k)
    out = []
    for v in (0, 1):
        p, s = _project(psi, value == v)
        if p > TOL:
            out.append((p, (v,), s))
    return out


_PREP = {"Z": None, "X": _H, "Y": _S_H}


def _initial_state(exp: Experiment) -> np.ndarray:
    n = exp.width
    index = 0
    rotations = []
    for w in range(n):
        basis, value = exp.prep(w)
        if basis not in _PREP:
            raise RefsimError(f"preparation {basis!r} has no pure-state counterpart")
        index |= (value & 1) << w
        if _PREP[basis] is not None:
            rotations.append((_PREP[basis], w))
    psi = np.zeros(1 << n, dtype=complex)
    psi[index] = 1
    for m, w in rotations:
        psi = _apply_dense(psi, n, m, (w,))
    return psi


def ideal_distribution(exp: Experiment, max_width: int = MAX_WIDTH) -> Distribution:
    """Born-rule outcome distribution of ``exp`` (float probabilities)."""
    n = exp.width
    _check_width(n, max_width)
    if exp.reveal:
        raise RefsimError("reveal has no quantum counterpart")
    branches: list[tuple[float, tuple[int, ...], np.ndarray]] = [(1.0, (), _initial_state(exp))]
    for op in exp.ops:
        nxt = []
        for p, rec, psi in branches:
            if isinstance(op, Gate):
                nxt.append((p, rec, _apply_gate(psi, n, op, rec)))
            elif isinstance(op, Measure):
                nxt += [(p * q, rec + o, s) for q, o, s in _measure_branches(psi, n, op)]
            elif isinstance(op, Coin):
                nxt += [(p / 2, rec + (0,), psi), (p / 2, rec + (1,), psi)]
            elif isinstance(op, Prepare):
                if op.basis not in _PREP:
                    raise RefsimError(f"preparation {op.basis!r} has no pure-state counterpart")
                for q, (v,), s in _measure_branches(psi, n, Measure("Z", (op.wire,))):
                    if v != (op.value & 1):
                        s = _apply_dense(s, n, _ONE_QUBIT["X"], (op.wire,))
                    if _PREP[op.basis] is not None:
                        s = _apply_dense(s, n, _PREP[op.basis], (op.wire,))
                    nxt.append((p * q, rec, s))
            else:
                raise RefsimError(f"unknown op {op!r}")
        branches = nxt
    probs: dict[int, float] = {}
    for p, rec, _ in branches:
        bits = rec if exp.readout is None else tuple(rec[i] for i in exp.readout)
        key = sum(b << i for i, b in enumerate(bits))
        probs[key] = probs.get(key, 0.0) + p
    return Distribution(exp.outcome_width, {k: v for k, v in sorted(probs.items()) if v > TOL})


# --------------------------------------------------------------------------
# Sparse basis tracking
# --------------------------------------------------------------------------

def basis_map(circuit: Circuit, inputs: Iterable[int]) -> dict[int, int]:
    """Image of each basis input under a gate-only circuit.

    Amplitudes are kept as a sparse ``{index: amplitude}`` map, so wide
    reversible circuits are cheap as long as the support stays small.
    Raises if an image is not a single basis state.
    """
    if not circuit.is_unitary():
        raise RefsimError("basis_map takes gate-only circuits")
    out = {}
    for start in inputs:
        amps: dict[int, complex] = {start: 1 + 0j}
        for g in circuit.ops:
            m = gate_matrix(g)
            nxt: dict[int, complex] = {}
            for idx, a in amps.items():
                local = sum(((idx >> w) & 1) << j for j, w in enumerate(g.wires))
                base = idx
                for w in g.wires:
                    base &= ~(1 << w)
                for r in np.nonzero(m[:, local])[0]:
                    tgt = base | sum(((int(r) >> j) & 1) << w for j, w in enumerate(g.wires))
                    nxt[tgt] = nxt.get(tgt, 0) + a * m[r, local]
            amps = {k: v for k, v in nxt.items() if abs(v) > TOL}
        if len(amps) != 1 or abs(abs(next(iter(amps.values()))) - 1) > TOL:
            raise RefsimError(f"input {start} does not map to a basis state")
        out[start] = next(iter(amps))
    return out

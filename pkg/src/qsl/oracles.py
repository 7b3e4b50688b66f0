"""
Oracle constructors.

Every constructor returns an :class:`OracleSpec`: the generated circuit plus
the wire layout and the classical function it must compute.  Wires are laid
out as query register first (wire 0 = least significant query bit), then the
answer register, then ancillas.  Secrets such as ``s``, ``b``, ``a``, ``x*``
and the permutation are baked into the gate list at construction time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import gf2
from .kernel import (CNOT, Circuit, Fredkin, Gate, NToffoli, Toffoli, X,
                     invert, synthesize_permutation)

__all__ = ["OracleSpec", "OracleError", "bits_of", "bv_oracle", "dj_promise_oracle",
           "comparator_circuit", "dj_decision_oracle", "dj3_catalog", "majority_oracle",
           "grover_oracle", "simon_oracle", "simon_basis", "shor15_multiplier",
           "CATALOG_GROUPS", "SHOR_ELEMENTS"]


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class OracleSpec:
    family: str
    params: dict
    circuit: Circuit
    query: tuple[int, ...]
    answer: tuple[int, ...]
    ancillas: tuple[int, ...] = ()
    f: Callable[[int], int] = field(default=lambda x: 0, compare=False, repr=False)

    @property
    def n(self) -> int:
        return len(self.query)

    def function_string(self) -> str:
        """``f(2^n - 1) ... f(0)`` for single-bit answers."""
        return "".join(str(self.f(x)) for x in reversed(range(1 << self.n)))


def bits_of(value, n: int | None = None) -> tuple[int, int]:
    """Parse a bit string (MSB first) or int.  Returns ``(int value, width)``."""
    if isinstance(value, str):
        if not value or set(value) - {"0", "1"}:
            raise OracleError(f"not a bit string: {value!r}")
        return int(value, 2), len(value)
    if n is None:
        raise OracleError("width needed for integer bit vectors")
    if not 0 <= value < (1 << n):
        raise OracleError(f"{value} does not fit in {n} bits")
    return int(value), n


def _check_perm(perm, n: int) -> list[int]:
    if perm is None:
        return list(range(1 << n))
    perm = [int(v) for v in perm]
    if sorted(perm) != list(range(1 << n)):
        raise OracleError(f"permutation is not a bijection on {1 << n} states")
    return perm


# --------------------------------------------------------------------------
# Bernstein-Vazirani
# --------------------------------------------------------------------------

def bv_oracle(s) -> OracleSpec:
    sv, n = bits_of(s)
    ops = [CNOT(i, n) for i in range(n) if sv >> i & 1]
    return OracleSpec("BV", {"s": format(sv, f"0{n}b")}, Circuit(n + 1, ops),
                      tuple(range(n)), (n,), f=lambda x: gf2.dot(x, sv))


# --------------------------------------------------------------------------
# Deutsch-Jozsa
# --------------------------------------------------------------------------

def dj_promise_oracle(n: int, b0: int, b1: int, perm: Sequence[int] | None = None) -> OracleSpec:
    """pi, then (if b0) copy the top bit of pi(x) to the answer, then (if b1) X, then pi^-1."""
    if n < 1:
        raise OracleError("n must be >= 1")
    perm = _check_perm(perm, n)
    pi = synthesize_permutation(perm).widened(n + 1)
    middle = []
    if b0:
        middle.append(CNOT(n - 1, n))
    if b1:
        middle.append(X(n))
    circ = pi + Circuit(n + 1, middle) + invert(pi)
    top = n - 1

    def f(x: int) -> int:
        return (b0 & (perm[x] >> top)) ^ b1

    return OracleSpec("DJPromise", {"n": n, "b0": b0, "b1": b1}, circ,
                      tuple(range(n)), (n,), f=f)


def _maj(c: int, b: int, a: int) -> list[Gate]:
    return [CNOT(a, b), CNOT(a, c), Toffoli(c, b, a)]


def comparator_circuit(n: int, x: Sequence[int] | None = None, a: Sequence[int] | None = None,
                       carry: int | None = None, z: int | None = None) -> Circuit:
    """Ripple-carry comparator writing ``[x + a >= 2**n]`` into ``z``.

    Default layout: ``x`` on wires ``0..n-1``, ``a`` on ``n..2n-1``, carry-in
    ancilla on ``2n`` and output on ``2n+1``.  The carry chain runs through the
    ``a`` wires and is fully uncomputed.
    """
    if n < 1:
        raise OracleError("n must be >= 1")
    x = list(range(n)) if x is None else list(x)
    a = list(range(n, 2 * n)) if a is None else list(a)
    carry = 2 * n if carry is None else carry
    z = 2 * n + 1 if z is None else z
    chain: list[Gate] = []
    c = carry
    for i in range(n):
        chain += _maj(c, x[i], a[i])
        c = a[i]
    ops = chain + [CNOT(a[n - 1], z)] + [g.inverse() for g in reversed(chain)]
    width = max(x + a + [carry, z]) + 1
    return Circuit(width, ops, (carry,))


def dj_decision_oracle(n: int, a: int, perm: Sequence[int] | None = None) -> OracleSpec:
    """Boolean function with exactly ``a`` ones: ``[pi(x) + a >= 2**n] xor a_n``.

    Wires: query ``0..n-1``, answer ``n``, ``a`` ancillas ``n+1..2n+1`` (with
    ``a_n`` last) and the carry-in ancilla ``2n+2``.
    """
    if not 0 <= a <= (1 << n):
        raise OracleError(f"a={a} outside [0, 2**{n}]")
    perm = _check_perm(perm, n)
    z = n
    a_wires = list(range(n + 1, 2 * n + 2))
    carry = 2 * n + 2
    width = 2 * n + 3
    pi = synthesize_permutation(perm).widened(width)
    load = Circuit(width, [X(a_wires[i]) for i in range(n + 1) if a >> i & 1])
    comp = comparator_circuit(n, range(n), a_wires[:n], carry, z).widened(width)
    flip = Circuit(width, [CNOT(a_wires[n], z)])
    circ = pi + load + comp + flip + load + invert(pi)
    circ = Circuit(width, circ.ops, tuple(a_wires) + (carry,))
    low = a % (1 << n)
    high = a >> n

    def f(x: int) -> int:
        return int(perm[x] + low >= (1 << n)) ^ high

    return OracleSpec("DJDecision", {"n": n, "a": a}, circ, tuple(range(n)), (z,),
                      circ.ancillas, f=f)


# Function strings f(7)...f(0), grouped by (Toffoli count, CNOT count).
CATALOG_GROUPS: dict[tuple[int, int], tuple[str, ...]] = {
    (0, 0): ("00000000", "11111111"),
    (0, 1): ("00001111", "00110011", "01010101", "10101010", "11001100", "11110000"),
    (0, 2): ("00111100", "01011010", "01100110", "10011001", "10100101", "11000011"),
    (0, 3): ("01101001", "10010110"),
    (1, 1): ("00011110", "00101101", "00110110", "00111001", "01001011", "01010110",
             "01011001", "01100011", "01100101", "01101010", "01101100", "01111000",
             "10000111", "10010011", "10010101", "10011010", "10011100", "10100110",
             "10101001", "10110100", "11000110", "11001001", "11010010", "11100001"),
    (1, 3): ("00011011", "00011101", "00100111", "00101110", "00110101", "00111010",
             "01000111", "01001110", "01010011", "01011100", "01110010", "01110100",
             "10001011", "10001101", "10100011", "10101100", "10110001", "10111000",
             "11000101", "11001010", "11010001", "11011000", "11100010", "11100100"),
    (1, 5): ("00010111", "00101011", "01001101", "01110001", "10001110", "10110010",
             "11010100", "11101000"),
}


def _anf(table: Sequence[int]) -> dict[int, int]:
    """Algebraic normal form: monomial bitmask -> coefficient (Moebius transform)."""
    coef = list(table)
    n = len(coef).bit_length() - 1
    for i in range(n):
        for m in range(len(coef)):
            if m >> i & 1:
                coef[m] ^= coef[m ^ (1 << i)]
    return {m: c for m, c in enumerate(coef) if c}


def _controlled_product(i: int, alpha: int, j: int, beta: int, t: int) -> list[Gate]:
    """Toffoli adding ``(x_i ^ alpha)(x_j ^ beta)`` to ``t``; X gates realize inversions."""
    flips = ([X(i)] if alpha else []) + ([X(j)] if beta else [])
    return flips + [Toffoli(i, j, t)] + flips


def _three_bit_circuit(fstring: str) -> Circuit:
    """One Toffoli at most, plus CNOTs, for a 3-input function of degree <= 2.

    X gates are free.  The quadratic part picks the template:
    none -> CNOT copies; one monomial -> a single Toffoli with polarities
    absorbing the linear terms of its two variables; two monomials sharing a
    variable -> the other two are XORed in place first; all three -> both are
    XORed into the third variable's partner wires.
    """
    table = [int(c) for c in reversed(fstring)]
    anf = _anf(table)
    t = 3
    const = anf.get(0, 0)
    lin = [anf.get(1 << i, 0) for i in range(3)]
    quad = [m for m in anf if m.bit_count() == 2]
    if any(m.bit_count() == 3 for m in anf):
        raise OracleError(f"{fstring} has degree 3")
    ops: list[Gate] = []
    if not quad:
        ops += [CNOT(i, t) for i in range(3) if lin[i]]
    elif len(quad) == 1:
        i, j = [b for b in range(3) if quad[0] >> b & 1]
        k = 3 - i - j
        alpha, beta = lin[j], lin[i]  # (x_i^a)(x_j^b) = x_i x_j ^ b x_i ^ a x_j ^ ab
        const ^= alpha & beta
        ops += _controlled_product(i, alpha, j, beta, t)
        if lin[k]:
            ops.append(CNOT(k, t))
    elif len(quad) == 2:
        i = next(b for b in range(3) if all(m >> b & 1 for m in quad))
        j, k = [b for b in range(3) if b != i]
        # x_i (x_j ^ x_k) with y = x_j ^ x_k stored on wire j
        alpha, beta = lin[j], lin[i]
        d = lin[j] ^ lin[k]
        const ^= alpha & beta
        ops += [CNOT(k, j)] + _controlled_product(i, alpha, j, beta, t) + [CNOT(k, j)]
        if d:
            ops.append(CNOT(k, t))
    else:
        # x0x1 ^ x0x2 ^ x1x2 = (x0 ^ x2)(x1 ^ x2) ^ x2
        alpha, beta = lin[1], lin[0]
        d = 1 ^ lin[0] ^ lin[1] ^ lin[2]
        const ^= alpha & beta
        ops += [CNOT(2, 0), CNOT(2, 1)] + _controlled_product(0, alpha, 1, beta, t)
        ops += [CNOT(2, 1), CNOT(2, 0)]
        if d:
            ops.append(CNOT(2, t))
    if const:
        ops.append(X(t))
    return Circuit(4, ops)


def _table_function(fstring: str) -> Callable[[int], int]:
    table = [int(c) for c in reversed(fstring)]
    return lambda x: table[x]


def dj3_catalog() -> list[OracleSpec]:
    """All 72 constant and balanced 3-bit functions, grouped by (Toffoli, CNOT) count."""
    out = []
    for (tof, cn), strings in CATALOG_GROUPS.items():
        for s in strings:
            circ = _three_bit_circuit(s)
            out.append(OracleSpec("DJ3Catalog", {"function": s, "toffolis": tof, "cnots": cn},
                                  circ, (0, 1, 2), (3,), f=_table_function(s)))
    return out


def majority_oracle(variant: str) -> OracleSpec:
    """Four layouts of MAJ(x2, x1, x0) with different phase behavior.

    A: one 3-controlled Toffoli per satisfying minterm 111, 011, 101, 110;
    B: MAJ computed in place on the query, copied out, then uncomputed;
    C: three Toffolis, one per pair of inputs;
    D: the catalog layout (two CNOTs, one Toffoli, then CNOTs).
    """
    t = 3
    v = variant.upper()
    if v == "A":
        ops = [NToffoli((0, 1, 2), t, (m & 1, m >> 1 & 1, m >> 2 & 1)) for m in (7, 3, 5, 6)]
    elif v == "B":
        maj = [CNOT(0, 1), CNOT(0, 2), Toffoli(2, 1, 0)]
        ops = maj + [CNOT(0, t)] + [g.inverse() for g in reversed(maj)]
    elif v == "C":
        ops = [Toffoli(2, 1, t), Toffoli(1, 0, t), Toffoli(2, 0, t)]
    elif v == "D":
        ops = list(_three_bit_circuit("11101000").ops)
    else:
        raise OracleError(f"unknown majority variant {variant!r}")
    return OracleSpec("Majority", {"variant": v}, Circuit(4, ops), (0, 1, 2), (t,),
                      f=_table_function("11101000"))


# --------------------------------------------------------------------------
# Grover
# --------------------------------------------------------------------------

def grover_oracle(n: int, xstar) -> OracleSpec:
    """A single n-Toffoli; control i is inverted exactly when ``x*_i = 0``."""
    xs, width = bits_of(xstar, n)
    if width != n or n < 2:
        raise OracleError("x* must have n >= 2 bits")
    pols = tuple(xs >> i & 1 for i in range(n))
    circ = Circuit(n + 1, [NToffoli(range(n), n, pols)])
    return OracleSpec("Grover", {"n": n, "xstar": format(xs, f"0{n}b")}, circ,
                      tuple(range(n)), (n,), f=lambda x: int(x == xs))


# --------------------------------------------------------------------------
# Simon
# --------------------------------------------------------------------------

def simon_basis(n: int, s: int) -> list[int]:
    """``v(0..n-2)`` spanning the complement of ``s``, then ``v(n-1)`` with ``v . s = 1``.

    For ``s = 0`` the standard basis is returned.
    """
    if s == 0:
        return [1 << k for k in range(n)]
    perp = gf2.nullspace([s], n)
    low = s & -s
    return perp + [low]


def simon_oracle(n: int, s, b: int, perm: Sequence[int] | None = None,
                 variant: str = "zero_target") -> OracleSpec:
    """Simon oracle ``f = perm o f_b``.

    ``f_b(x)_k = v(k) . x`` for ``k < n-1``; the top output bit is
    ``v(n-1) . x`` when ``b = 0`` and 0 when ``b = 1``.  Layout: query
    ``0..n-1``, answer ``n..2n-1``, and for ``xor_target`` a work register
    ``2n..3n-1``.
    """
    sv, width = bits_of(s, n)
    if width != n:
        raise OracleError("s must have n bits")
    if b not in (0, 1):
        raise OracleError("b must be a bit")
    if b == 1 and sv == 0:
        raise OracleError("two-to-one promise needs s != 0")
    if variant not in ("zero_target", "xor_target", "deterministic"):
        raise OracleError(f"unknown Simon variant {variant!r}")
    perm = _check_perm(perm, n)
    basis = simon_basis(n, sv)

    def fb(x: int) -> int:
        y = 0
        for k in range(n - 1):
            y |= gf2.dot(basis[k], x) << k
        if b == 0:
            y |= gf2.dot(basis[n - 1], x) << (n - 1)
        return y

    def build(out: int) -> Circuit:
        ops: list[Gate] = []
        for k in range(n - 1):
            ops += [CNOT(i, out + k) for i in range(n) if basis[k] >> i & 1]
        if b == 0:
            ops += [CNOT(i, out + n - 1) for i in range(n) if basis[n - 1] >> i & 1]
        pi = synthesize_permutation(perm, range(out, out + n))
        return Circuit(out + n, ops) + pi

    if variant == "xor_target":
        work = 2 * n
        compute = build(work).widened(3 * n)
        copy = Circuit(3 * n, [CNOT(work + k, n + k) for k in range(n)])
        circ = compute + copy + invert(compute)
        circ = Circuit(3 * n, circ.ops, tuple(range(2 * n, 3 * n)))
        anc = circ.ancillas
    else:
        circ = build(n)
        anc = ()
    return OracleSpec("Simon", {"n": n, "s": format(sv, f"0{n}b"), "b": b, "variant": variant,
                                "basis": [format(v, f"0{n}b") for v in basis]},
                      circ, tuple(range(n)), tuple(range(n, 2 * n)), anc,
                      f=lambda x: perm[fb(x)])


# --------------------------------------------------------------------------
# Shor, N = 15
# --------------------------------------------------------------------------

SHOR_ELEMENTS = (2, 4, 7, 8, 11, 13)


# Fredkin networks on y wires: x2 and x8 are the two one-bit rotations,
# x4 the two-bit rotation.  Multiplying by 15 - m flips every bit afterwards.
_ROTATIONS = {
    2: ((2, 3), (1, 2), (0, 1)),
    8: ((0, 1), (1, 2), (2, 3)),
    4: ((0, 2), (1, 3)),
}


def _fredkin_multiplier(m: int) -> list[Gate]:
    negate = m in (7, 11, 13)
    rot = _ROTATIONS[15 - m if negate else m]
    ops: list[Gate] = [Fredkin(0, 1 + i, 1 + j) for i, j in rot]
    if negate:
        ops += [CNOT(0, 1 + i) for i in range(4)]
    return ops


def shor15_multiplier(a: int, power: int = 1, layout: str = "fredkin") -> OracleSpec:
    """Controlled ``y -> y * a**(2**(power-1)) mod 15`` on a 4-bit register.

    Wire 0 is the control and wires 1..4 hold ``y`` (wire 1 least
    significant).  ``layout="fredkin"`` builds rotations from controlled
    swaps plus a controlled bitwise negation; ``layout="synthesized"`` runs
    the generic permutation synthesis on the group table.  The states 0 and
    15 lie outside the group: synthesis leaves them fixed, while the
    negation in the Fredkin layouts for 7, 11 and 13 swaps them.  When the
    multiplier is the identity the circuit is empty.
    """
    if a not in SHOR_ELEMENTS:
        raise OracleError(f"a={a} is not a non-trivial element of the group mod 15")
    if power not in (1, 2):
        raise OracleError("power must be 1 or 2")
    m = pow(a, 1 << (power - 1), 15)

    swaps_ends = layout == "fredkin" and m in (7, 11, 13)

    def mul(y: int) -> int:
        if y in (0, 15):
            return 15 - y if swaps_ends else y
        return y * m % 15

    if m == 1:
        circ = Circuit(5, [])
    elif layout == "fredkin":
        circ = Circuit(5, _fredkin_multiplier(m))
    elif layout == "synthesized":
        table = [((v >> 1) if not v & 1 else mul(v >> 1)) << 1 | (v & 1) for v in range(32)]
        circ = synthesize_permutation(table)
    else:
        raise OracleError(f"unknown multiplier layout {layout!r}")
    return OracleSpec("Shor15Mult", {"a": a, "power": power, "multiplier": m, "layout": layout},
                      circ, (0,), (1, 2, 3, 4), f=lambda v: mul(v >> 1) if v & 1 else v >> 1)

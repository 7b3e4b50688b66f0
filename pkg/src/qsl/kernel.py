"""
Elementary systems, the QSL gate set, circuits, inversion and permutation synthesis.

An elementary system is a pair of classical bits ``(x, p)``: the computational
bit and the phase bit.  Every gate is a bijection on the ``4**width`` points of
phase space.  Gate application is written once, on *lanes*: each bit of the
state is a Python ``int`` whose bit ``i`` is the value of that bit in lane
``i``.  A single-lane state is the special case ``full == 1``.  The engine
reuses the very same routine with thousands of lanes so that exact
enumeration and Monte-Carlo sampling run every assignment of random bits in
parallel.

Conventions
-----------
* wire 0 is the least significant bit of a register;
* point label of a system is ``2*x + p``;
* gate wires: ``CNOT(control, target)``, ``Toffoli(c1, c2, target)``,
  ``Fredkin(control, a, b)``, ``NToffoli(controls, target, polarities)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "ElementarySystem", "Register", "Gate", "Measure", "Coin", "Prepare",
    "Circuit", "RandomSource", "KernelError", "WireError", "AncillaError",
    "NotABijection", "prepare", "apply", "apply_lanes", "n_toffoli",
    "ntoffoli_ladder", "synthesize_permutation", "invert", "truth_table",
    "X", "Y", "Z", "H", "S", "Sinv", "CNOT", "CZ", "SWAP", "Toffoli",
    "Fredkin", "NToffoli", "classically_controlled",
]


class KernelError(ValueError):
    """Base class for invalid circuits or states."""


class WireError(KernelError):
    """A gate addresses a wire outside the state or repeats a wire."""


class AncillaError(KernelError):
    """An ancilla handed to the n-Toffoli ladder was not computationally clean."""


class NotABijection(KernelError):
    """A permutation table is not a bijection on ``range(2**n)``."""


@dataclass(frozen=True)
class ElementarySystem:
    """One simulated qubit: computational bit ``x`` and phase bit ``p``."""

    x: int
    p: int

    def __post_init__(self) -> None:
        if self.x not in (0, 1) or self.p not in (0, 1):
            raise KernelError(f"bits must be 0 or 1, got ({self.x}, {self.p})")

    @property
    def label(self) -> int:
        return 2 * self.x + self.p

    @classmethod
    def from_label(cls, label: int) -> "ElementarySystem":
        return cls(label >> 1, label & 1)

    def __iter__(self) -> Iterator[int]:
        yield self.x
        yield self.p


Register = tuple  # tuple[ElementarySystem, ...]; index 0 is least significant


# --------------------------------------------------------------------------
# Random source
# --------------------------------------------------------------------------

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer, vectorized over uint64 arrays (wrapping arithmetic)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@dataclass(frozen=True)
class RandomSource:
    """Counter-based bit source keyed by ``(seed, stream, counter)``.

    ``bit(counter)`` is a pure function of the key, so trials can be run in
    any order, in parallel, or replayed.  Distinct streams hash to unrelated
    sequences.
    """

    seed: int = 0
    stream: int = 0

    def bit(self, counter: int) -> int:
        return int(self.bits(counter, np.array([self.stream], dtype=np.uint64))[0])

    def bits(self, counter: int, streams: np.ndarray) -> np.ndarray:
        """One bit per stream in ``streams`` for draw number ``counter``."""
        with np.errstate(over="ignore"):
            key = _mix64(np.array([(self.seed & _M64) ^ _GOLDEN], dtype=np.uint64))
            z = key + streams.astype(np.uint64) * np.uint64(_GOLDEN)
            z = _mix64(z) + np.uint64((counter * 0xD1B54A32D192ED03) & _M64)
            return (_mix64(z) >> np.uint64(63)).astype(np.uint8)

    def spawn(self, stream: int) -> "RandomSource":
        return RandomSource(self.seed, stream)


class _CounterBits:
    """Adapter giving successive single bits from a RandomSource."""

    def __init__(self, rng: RandomSource) -> None:
        self.rng = rng
        self.counter = 0

    def __call__(self) -> int:
        b = self.rng.bit(self.counter)
        self.counter += 1
        return b


def prepare(basis: str, value: int, rng: RandomSource | None = None, *, draw=None) -> ElementarySystem:
    """Prepare an eigenstate analog.

    ``Z,v -> (v, R)``, ``X,v -> (R, v)``, ``Y,v -> (R, R^v)``, ``mixed -> (R1, R2)``.
    ``point`` takes a label in 0..3 and returns that point with no randomness.
    """
    if basis == "point":
        return ElementarySystem.from_label(value)
    if draw is None:
        draw = _CounterBits(rng if rng is not None else RandomSource())
    basis = basis.upper() if basis != "mixed" else basis
    if basis == "Z":
        return ElementarySystem(value, draw())
    if basis == "X":
        return ElementarySystem(draw(), value)
    if basis == "Y":
        r = draw()
        return ElementarySystem(r, r ^ value)
    if basis in ("mixed", "MIXED"):
        return ElementarySystem(draw(), draw())
    raise KernelError(f"unknown basis {basis!r}")


# --------------------------------------------------------------------------
# Gates and circuit IR
# --------------------------------------------------------------------------

_ARITY = {"X": 1, "Y": 1, "Z": 1, "H": 1, "S": 1, "Sinv": 1,
          "CNOT": 2, "CZ": 2, "SWAP": 2, "Toffoli": 3, "Fredkin": 3}
GATE_KINDS = frozenset(_ARITY) | {"NToffoli", "CC"}


@dataclass(frozen=True)
class Gate:
    """A QSL gate.

    ``kind`` is one of ``X Y Z H S Sinv CNOT CZ SWAP Toffoli Fredkin NToffoli CC``.
    For ``NToffoli`` the last wire is the target and ``polarities[k]`` is 1 for
    a regular control and 0 for an inverted one.  ``CC`` wraps ``inner`` and
    fires in the lanes where classical record bit ``cbit`` equals ``cvalue``.
    """

    kind: str
    wires: tuple[int, ...] = ()
    polarities: tuple[int, ...] = ()
    inner: "Gate | None" = None
    cbit: int = -1
    cvalue: int = 1

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise KernelError(f"unknown gate kind {self.kind!r}")
        if self.kind == "CC":
            if self.inner is None or self.cbit < 0:
                raise KernelError("classically controlled gate needs inner gate and record bit")
            return
        if len(set(self.wires)) != len(self.wires):
            raise WireError(f"{self.kind} repeats a wire: {self.wires}")
        if self.wires and min(self.wires) < 0:
            raise WireError(f"negative wire in {self.wires}")
        if self.kind == "NToffoli":
            if len(self.wires) < 2:
                raise KernelError("NToffoli needs at least one control")
            if len(self.polarities) != len(self.wires) - 1:
                raise KernelError("one polarity per NToffoli control")
        elif len(self.wires) != _ARITY[self.kind]:
            raise KernelError(f"{self.kind} takes {_ARITY[self.kind]} wires, got {self.wires}")

    @property
    def touched(self) -> tuple[int, ...]:
        return self.inner.touched if self.kind == "CC" else self.wires

    def inverse(self) -> "Gate":
        if self.kind == "S":
            return Gate("Sinv", self.wires)
        if self.kind == "Sinv":
            return Gate("S", self.wires)
        if self.kind == "CC":
            return Gate("CC", inner=self.inner.inverse(), cbit=self.cbit, cvalue=self.cvalue)
        return self

    def shifted(self, offset: int) -> "Gate":
        if self.kind == "CC":
            return Gate("CC", inner=self.inner.shifted(offset), cbit=self.cbit, cvalue=self.cvalue)
        return Gate(self.kind, tuple(w + offset for w in self.wires), self.polarities)

    def remapped(self, mapping: Sequence[int]) -> "Gate":
        if self.kind == "CC":
            return Gate("CC", inner=self.inner.remapped(mapping), cbit=self.cbit, cvalue=self.cvalue)
        return Gate(self.kind, tuple(mapping[w] for w in self.wires), self.polarities)


def X(w: int) -> Gate: return Gate("X", (w,))
def Y(w: int) -> Gate: return Gate("Y", (w,))
def Z(w: int) -> Gate: return Gate("Z", (w,))
def H(w: int) -> Gate: return Gate("H", (w,))
def S(w: int) -> Gate: return Gate("S", (w,))
def Sinv(w: int) -> Gate: return Gate("Sinv", (w,))
def CNOT(c: int, t: int) -> Gate: return Gate("CNOT", (c, t))
def CZ(a: int, b: int) -> Gate: return Gate("CZ", (a, b))
def SWAP(a: int, b: int) -> Gate: return Gate("SWAP", (a, b))
def Toffoli(c1: int, c2: int, t: int) -> Gate: return Gate("Toffoli", (c1, c2, t))
def Fredkin(c: int, a: int, b: int) -> Gate: return Gate("Fredkin", (c, a, b))


def NToffoli(controls: Sequence[int], target: int, polarities: Sequence[int] | None = None) -> Gate:
    controls = tuple(controls)
    pol = tuple(polarities) if polarities is not None else (1,) * len(controls)
    return Gate("NToffoli", controls + (target,), pol)


def classically_controlled(inner: Gate, cbit: int, cvalue: int = 1) -> Gate:
    return Gate("CC", inner=inner, cbit=cbit, cvalue=cvalue)


@dataclass(frozen=True)
class Measure:
    """Measurement op. ``kind`` in ``Z X Y ZZ XX ZX Bell AllZero``.

    Joint kinds address ``(i, j)``; for ``ZX`` the Z bit is read on wire ``i``
    and the X bit on wire ``j``.  ``AllZero`` addresses every listed wire.
    ``Bell`` writes two record bits: computational correlation first, then
    phase correlation.
    """

    kind: str
    wires: tuple[int, ...]

    _KINDS = {"Z": 1, "X": 1, "Y": 1, "ZZ": 2, "XX": 2, "ZX": 2, "Bell": 2}

    def __post_init__(self) -> None:
        if self.kind == "AllZero":
            if not self.wires:
                raise KernelError("AllZero needs at least one wire")
        elif self.kind not in self._KINDS:
            raise KernelError(f"unknown measurement {self.kind!r}")
        elif len(self.wires) != self._KINDS[self.kind]:
            raise KernelError(f"{self.kind} measures {self._KINDS[self.kind]} wires")
        if len(set(self.wires)) != len(self.wires):
            raise WireError(f"measurement repeats a wire: {self.wires}")

    @property
    def touched(self) -> tuple[int, ...]:
        return self.wires

    @property
    def record_bits(self) -> int:
        return 2 if self.kind == "Bell" else 1


@dataclass(frozen=True)
class Coin:
    """A fresh uniformly random classical bit appended to the record."""

    touched = ()
    record_bits = 1


@dataclass(frozen=True)
class Prepare:
    """Re-prepare ``wire`` in the given basis, discarding its previous content."""

    wire: int
    basis: str = "Z"
    value: int = 0

    @property
    def touched(self) -> tuple[int, ...]:
        return (self.wire,)


Op = "Gate | Measure | Coin | Prepare"


@dataclass(frozen=True)
class Circuit:
    """Sequential IR over ``width`` wires.

    ``ancillas`` lists wires that must enter and leave with computational bit 0.
    """

    width: int
    ops: tuple = ()
    ancillas: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "ancillas", tuple(self.ancillas))
        width = self.width
        for op in self.ops:
            for w in op.touched:
                if w >= width:
                    raise WireError(f"{op} exceeds circuit width {width}")

    @classmethod
    def _trusted(cls, width: int, ops: tuple, ancillas: tuple = ()) -> "Circuit":
        """Build from ops already validated against a width no larger than ``width``."""
        circ = object.__new__(cls)
        object.__setattr__(circ, "width", width)
        object.__setattr__(circ, "ops", tuple(ops))
        object.__setattr__(circ, "ancillas", tuple(ancillas))
        return circ

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __add__(self, other: "Circuit") -> "Circuit":
        width = max(self.width, other.width)
        return Circuit._trusted(width, self.ops + other.ops,
                                tuple(sorted(set(self.ancillas) | set(other.ancillas))))

    def widened(self, width: int) -> "Circuit":
        return Circuit._trusted(max(width, self.width), self.ops, self.ancillas)

    def remapped(self, mapping: Sequence[int], width: int) -> "Circuit":
        """Relabel wires: old wire ``w`` becomes ``mapping[w]``."""
        ops = []
        for op in self.ops:
            if isinstance(op, Gate):
                ops.append(op.remapped(mapping))
            elif isinstance(op, Measure):
                ops.append(Measure(op.kind, tuple(mapping[w] for w in op.wires)))
            elif isinstance(op, Prepare):
                ops.append(Prepare(mapping[op.wire], op.basis, op.value))
            else:
                ops.append(op)
        return Circuit(width, ops, tuple(mapping[a] for a in self.ancillas))

    def count(self, kind: str) -> int:
        return sum(1 for op in self.ops if isinstance(op, Gate) and op.kind == kind)

    def is_unitary(self) -> bool:
        return all(type(op) is Gate for op in self.ops)

    def lower(self) -> "Circuit":
        """Expand every NToffoli with three or more controls into a Toffoli ladder.

        Clean ancillas are appended after the existing wires and shared between
        gates (each ladder leaves them computationally clean).
        """
        need = max((len(op.wires) - 3 for op in self.ops
                    if isinstance(op, Gate) and op.kind == "NToffoli"), default=0)
        anc = tuple(range(self.width, self.width + max(need, 0)))
        ops = []
        for op in self.ops:
            if isinstance(op, Gate) and op.kind == "NToffoli" and len(op.wires) > 3:
                ops.extend(ntoffoli_ladder(op.wires[:-1], op.polarities, op.wires[-1], anc))
            else:
                ops.append(op)
        return Circuit(self.width + len(anc), ops, self.ancillas + anc)


def invert(circuit: Circuit) -> Circuit:
    """Reverse the gate list and invert every gate."""
    if not circuit.is_unitary():
        raise KernelError("only gate-only circuits can be inverted")
    return Circuit._trusted(circuit.width, tuple(g.inverse() for g in reversed(circuit.ops)),
                            circuit.ancillas)


# --------------------------------------------------------------------------
# Lane-parallel gate maps
# --------------------------------------------------------------------------

def apply_lanes(g: Gate, xs: list[int], ps: list[int], full: int, record: Sequence[int] = ()) -> None:
    """Apply gate ``g`` in place to lane vectors ``xs``/``ps``."""
    k = g.kind
    w = g.wires
    if k == "CNOT":
        c, t = w
        ps[c] ^= ps[t]
        xs[t] ^= xs[c]
    elif k == "H":
        a = w[0]
        xs[a], ps[a] = ps[a], xs[a]
    elif k == "NToffoli":
        _ntoffoli_lanes(w[:-1], g.polarities, w[-1], xs, ps, full)
    elif k == "X":
        xs[w[0]] ^= full
    elif k == "Z":
        ps[w[0]] ^= full
    elif k == "Y":
        xs[w[0]] ^= full
        ps[w[0]] ^= full
    elif k == "S":
        a = w[0]
        ps[a] ^= xs[a]
        xs[a] ^= full
    elif k == "Sinv":
        a = w[0]
        ps[a] ^= xs[a] ^ full
        xs[a] ^= full
    elif k == "CZ":
        a, b = w
        ps[a] ^= xs[b]
        ps[b] ^= xs[a]
    elif k == "SWAP":
        a, b = w
        xs[a], xs[b] = xs[b], xs[a]
        ps[a], ps[b] = ps[b], ps[a]
    elif k == "Toffoli":
        c1, c2, t = w
        pt = ps[t]
        ps[c1] ^= pt & xs[c2]
        ps[c2] ^= pt & xs[c1]
        xs[t] ^= xs[c1] & xs[c2]
    elif k == "Fredkin":
        c, a, b = w
        dx = xs[a] ^ xs[b]
        dp = ps[a] ^ ps[b]
        xc = xs[c]
        ps[c] ^= dx & dp
        mx = xc & dx
        mp = xc & dp
        xs[a] ^= mx
        xs[b] ^= mx
        ps[a] ^= mp
        ps[b] ^= mp
    elif k == "CC":
        mask = record[g.cbit] if g.cvalue else record[g.cbit] ^ full
        if not mask:
            return
        inner = g.inner
        wires = inner.wires
        ox = [xs[i] for i in wires]
        op = [ps[i] for i in wires]
        apply_lanes(inner, xs, ps, full, record)
        for i, a in enumerate(wires):
            xs[a] = ox[i] ^ ((xs[a] ^ ox[i]) & mask)
            ps[a] = op[i] ^ ((ps[a] ^ op[i]) & mask)
    else:  # pragma: no cover - guarded by Gate validation
        raise KernelError(k)


def _ntoffoli_lanes(controls, polarities, t, xs, ps, full) -> None:
    cs = [xs[c] if pol else xs[c] ^ full for c, pol in zip(controls, polarities)]
    m = len(cs)
    pt = ps[t]
    if m == 1:
        ps[controls[0]] ^= pt
        xs[t] ^= cs[0]
        return
    # prefix[i] = c_0 & ... & c_{i-1}; walk a suffix product backwards
    prefix = [full] * (m + 1)
    acc = full
    for i, c in enumerate(cs):
        acc &= c
        prefix[i + 1] = acc
    if pt:
        suffix = full
        for i in range(m - 1, -1, -1):
            ps[controls[i]] ^= pt & prefix[i] & suffix
            suffix &= cs[i]
    xs[t] ^= prefix[m]


def _check_width(g: Gate, width: int) -> None:
    if any(w >= width for w in g.touched):
        raise WireError(f"{g.kind} on wires {g.touched} exceeds width {width}")


def apply(gate: Gate, state: Sequence[ElementarySystem]) -> Register:
    """Apply one gate to a single-lane register and return the new register."""
    _check_width(gate, len(state))
    if gate.kind == "CC":
        raise KernelError("classically controlled gates need a measurement record; use the engine")
    xs = [s.x for s in state]
    ps = [s.p for s in state]
    apply_lanes(gate, xs, ps, 1)
    return tuple(ElementarySystem(x, p) for x, p in zip(xs, ps))


def apply_circuit(circuit: Circuit, state: Sequence[ElementarySystem]) -> Register:
    for g in circuit.ops:
        state = apply(g, state)
    return tuple(state)


# --------------------------------------------------------------------------
# n-Toffoli ladder
# --------------------------------------------------------------------------

def ntoffoli_ladder(controls: Sequence[int], polarities: Sequence[int], target: int,
                    ancillas: Sequence[int]) -> list[Gate]:
    """Toffoli ladder for a multi-controlled X using ``len(controls) - 2`` clean ancillas.

    Inverted controls are wrapped in X gates.  Each level computes the AND of
    two controls into a fresh ancilla, recurses, and uncomputes.
    """
    controls = list(controls)
    if len(ancillas) < max(0, len(controls) - 2):
        raise AncillaError(f"{len(controls)} controls need {len(controls) - 2} ancillas")
    flips = [X(c) for c, pol in zip(controls, polarities) if not pol]

    def build(cs: list[int], anc: list[int]) -> list[Gate]:
        if len(cs) == 1:
            return [CNOT(cs[0], target)]
        if len(cs) == 2:
            return [Toffoli(cs[0], cs[1], target)]
        a = anc[0]
        step = Toffoli(cs[0], cs[1], a)
        return [step] + build([a] + cs[2:], anc[1:]) + [step]

    return flips + build(controls, list(ancillas)) + flips


def n_toffoli(controls: Sequence[int], polarities: Sequence[int], target: int,
              state: Sequence[ElementarySystem], ancillas: Sequence[int] = ()) -> Register:
    """Apply an n-Toffoli through the explicit ladder on ``state``.

    ``ancillas`` are wire indices of ``state``; each must hold computational 0.
    """
    for a in ancillas:
        if state[a].x:
            raise AncillaError(f"ancilla wire {a} is not computationally clean")
    for g in ntoffoli_ladder(controls, polarities, target, ancillas):
        state = apply(g, state)
    return tuple(state)


# --------------------------------------------------------------------------
# Permutation synthesis
# --------------------------------------------------------------------------

_cnot = lru_cache(maxsize=4096)(CNOT)  # gates are immutable, so fans can share them


def _transposition(a: int, b: int, n: int) -> list[Gate]:
    """Gates exchanging computational states ``a`` and ``b`` (all others fixed)."""
    diff = a ^ b
    k = (diff & -diff).bit_length() - 1  # lowest differing bit is the pivot
    if (a >> k) & 1:
        a, b = b, a
    if n == 1:
        return [X(0)]
    others = [j for j in range(n) if j != k and (diff >> j) & 1]
    fan = [_cnot(k, j) for j in others]
    controls = [j for j in range(n) if j != k]
    pols = [(a >> j) & 1 for j in controls]
    return fan + [NToffoli(controls, k, pols)] + fan[::-1]


def synthesize_permutation(perm: Sequence[int], wires: Sequence[int] | None = None) -> Circuit:
    """Circuit whose computational action is ``x -> perm[x]`` on ``n`` wires.

    The permutation is split into cycles, each cycle into adjacent
    transpositions, and every transposition becomes a CNOT fan around one
    multi-controlled X.  Optimality is not attempted.
    """
    perm = [int(v) for v in perm]
    size = len(perm)
    n = size.bit_length() - 1
    if size < 1 or (1 << n) != size or sorted(perm) != list(range(size)):
        raise NotABijection(f"not a bijection on range(2**n): length {size}")
    gates: list[Gate] = []
    seen = [False] * size
    for start in range(size):
        if seen[start]:
            continue
        cycle = []
        v = start
        while not seen[v]:
            seen[v] = True
            cycle.append(v)
            v = perm[v]
        # (c0 c1 ... cm) = (c0 c1)(c1 c2)...(c_{m-1} c_m), rightmost applied first
        for i in range(len(cycle) - 2, -1, -1):
            gates.extend(_transposition(cycle[i], cycle[i + 1], n))
    circ = Circuit._trusted(max(n, 1) if size > 1 else 0, gates)
    if wires is not None:
        circ = circ.remapped(list(wires), max(wires) + 1 if wires else 0)
    return circ


def truth_table(circuit: Circuit, n_in: int, wires: Sequence[int] | None = None) -> list[int]:
    """Computational action on the first ``n_in`` wires (or ``wires``), other wires 0.

    Returns the full computational output word for every input, evaluated in
    parallel across ``2**n_in`` lanes.
    """
    wires = list(range(n_in)) if wires is None else list(wires)
    lanes = 1 << n_in
    full = (1 << lanes) - 1
    idx = np.arange(lanes, dtype=np.int64)
    xs = [0] * circuit.width
    for k, w in enumerate(wires):
        xs[w] = _pattern(((idx >> k) & 1).astype(np.uint8))
    ps = [0] * circuit.width
    for g in circuit.ops:
        apply_lanes(g, xs, ps, full)
    out = np.zeros(lanes, dtype=np.int64)
    for w in range(circuit.width):
        out |= unpack_lanes(xs[w], lanes).astype(np.int64) << w
    return out.tolist()


def _pattern(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits, bitorder="little").tobytes(), "little")


def unpack_lanes(v: int, lanes: int) -> np.ndarray:
    raw = np.frombuffer(v.to_bytes((lanes + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:lanes]


def pack_lanes(bits: np.ndarray) -> int:
    return _pattern(np.asarray(bits, dtype=np.uint8))


def all_states(width: int) -> Iterable[Register]:
    """Every point of the ``4**width`` phase space."""
    for code in range(4 ** width):
        yield tuple(ElementarySystem.from_label((code >> (2 * i)) & 3) for i in range(width))

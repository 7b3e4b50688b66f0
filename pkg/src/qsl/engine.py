"""
Circuit execution, measurement with disturbance, sampling and exact enumeration.

All three entry points share one interpreter, :func:`_execute`, which runs a
circuit over ``L`` lanes at once.  The only thing that differs is where fresh
random bits come from:

* :func:`run` uses one lane and draws from a :class:`~qsl.kernel.RandomSource`;
* :func:`sample` uses one lane per trial, trial ``i`` drawing from stream ``i``;
* :func:`exact_distribution` uses ``2**B`` lanes and gives free bit ``k`` the
  pattern ``(lane >> k) & 1``, so every assignment is visited exactly once.

Randomization that can no longer influence the record (a measurement
disturbance on wires that nothing touches afterwards, or preparation
randomness on wires that nothing ever touches) is skipped during exact
enumeration.  This leaves the outcome distribution unchanged and keeps the
enumeration budget small.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .kernel import (Circuit, Coin, ElementarySystem, Gate, KernelError, Measure,
                     Prepare, RandomSource, apply_lanes, pack_lanes, unpack_lanes)

__all__ = ["Experiment", "Distribution", "WorldState", "ExactIntractable",
           "run", "measure", "sample", "exact_distribution", "budget", "DEFAULT_CAP"]

DEFAULT_CAP = 24


class ExactIntractable(RuntimeError):
    """The number of free random bits exceeds the enumeration cap."""


@dataclass(frozen=True)
class Experiment:
    """A circuit together with its initial preparation and readout.

    ``preparation`` holds one ``(basis, value)`` pair per wire; missing entries
    default to ``("Z", 0)``.  ``measurements`` are appended after the circuit.
    ``readout`` selects record bits (in execution order) that form the outcome;
    ``None`` keeps them all.  Record bit ``readout[k]`` has weight ``2**k``.

    ``reveal`` is a bookkeeping hook for tests and demos: for every listed
    wire the final computational bit and then the final phase bit are
    appended to the outcome, above the readout bits.  It is not a
    measurement and has no physical counterpart.

    Besides ``Z``, ``X``, ``Y`` and ``mixed``, a wire may be prepared as
    ``("point", label)``, the fixed phase-space point ``(label >> 1, label & 1)``.
    """

    circuit: Circuit
    preparation: tuple = ()
    measurements: tuple = ()
    readout: tuple[int, ...] | None = None
    reveal: tuple[int, ...] = ()

    @property
    def ops(self) -> tuple:
        return self.circuit.ops + tuple(self.measurements)

    @property
    def width(self) -> int:
        return self.circuit.width

    def prep(self, wire: int) -> tuple[str, int]:
        if wire < len(self.preparation) and self.preparation[wire] is not None:
            return self.preparation[wire]
        return ("Z", 0)

    @property
    def record_length(self) -> int:
        return sum(op.record_bits for op in self.ops if isinstance(op, (Measure, Coin)))

    @property
    def outcome_width(self) -> int:
        base = self.record_length if self.readout is None else len(self.readout)
        return base + 2 * len(self.reveal)


@dataclass(frozen=True)
class WorldState:
    systems: tuple[ElementarySystem, ...]
    record: tuple[int, ...] = ()


@dataclass
class Distribution:
    """Outcome distribution over fixed-width bit strings.

    Keys are integers (bit ``k`` is readout position ``k``).  ``exact`` holds
    Fractions; otherwise ``counts`` and ``total`` describe an empirical sample.
    """

    width: int
    probs: dict[int, Fraction] = field(default_factory=dict)
    counts: dict[int, int] | None = None
    total: int = 0

    @property
    def exact(self) -> bool:
        return self.counts is None

    def __getitem__(self, outcome) -> Fraction | float:
        key = int(outcome, 2) if isinstance(outcome, str) else int(outcome)
        if self.counts is not None:
            return self.counts.get(key, 0) / self.total
        return self.probs.get(key, Fraction(0))

    def prob(self, outcome) -> Fraction | float:
        return self[outcome]

    def items(self):
        if self.counts is not None:
            return [(k, c / self.total) for k, c in sorted(self.counts.items())]
        return sorted(self.probs.items())

    def support(self) -> list[int]:
        return [k for k, v in self.items() if v]

    def key(self, outcome: int) -> str:
        return format(outcome, f"0{self.width}b") if self.width else ""

    def as_strings(self) -> dict[str, Fraction | float]:
        return {self.key(k): v for k, v in self.items()}

    def as_floats(self) -> dict[int, float]:
        return {k: float(v) for k, v in self.items()}

    def is_point_mass(self) -> bool:
        return len(self.support()) == 1

    def marginal(self, positions: Sequence[int]) -> "Distribution":
        """Keep readout positions ``positions`` (new bit k = old bit positions[k])."""
        def proj(k: int) -> int:
            return sum(((k >> p) & 1) << i for i, p in enumerate(positions))
        if self.counts is not None:
            counts: dict[int, int] = {}
            for k, c in self.counts.items():
                counts[proj(k)] = counts.get(proj(k), 0) + c
            return Distribution(len(positions), counts=counts, total=self.total)
        probs: dict[int, Fraction] = {}
        for k, v in self.probs.items():
            probs[proj(k)] = probs.get(proj(k), Fraction(0)) + v
        return Distribution(len(positions), probs)

    def conditional(self, position: int, value: int) -> "Distribution":
        """Condition on readout bit ``position`` == ``value``; that bit is dropped."""
        keep = [i for i in range(self.width) if i != position]
        sel = {k: v for k, v in self.items() if ((k >> position) & 1) == value}
        norm = sum(sel.values())
        if not norm:
            raise ZeroDivisionError("conditioning on an impossible event")
        sub = Distribution(self.width, {k: Fraction(v) / Fraction(norm) if self.exact else v / norm
                                        for k, v in sel.items()})
        return sub.marginal(keep)


# --------------------------------------------------------------------------
# Free-bit accounting
# --------------------------------------------------------------------------

def _prep_draws(basis: str) -> int:
    if basis == "point":
        return 0
    return 2 if basis in ("mixed", "MIXED") else 1


def _meas_draws(m: Measure) -> int:
    if m.kind == "AllZero":
        return len(m.wires)
    return 2 if m.kind == "Bell" else 1


def _liveness(exp: Experiment) -> tuple[list[bool], list[bool]]:
    """Which preparations and which measurement disturbances can matter.

    A random bit is dead when no later op touches the wire it lands on.
    """
    ops = exp.ops
    later: set[int] = set(exp.reveal)
    live_op = [True] * len(ops)
    for i in range(len(ops) - 1, -1, -1):
        op = ops[i]
        kind = type(op)
        if kind is Gate:
            later.update(op.inner.wires if op.kind == "CC" else op.wires)
        elif kind is Measure:
            live_op[i] = any(w in later for w in op.wires)
            later.update(op.wires)
        elif kind is Prepare:
            live_op[i] = op.wire in later
            later.discard(op.wire)
    # the initial preparation matters iff the first op on the wire is not a re-preparation
    width = exp.width
    live_prep = [False] * width
    seen: set[int] = set()
    for op in ops:
        if len(seen) == width:
            break
        if type(op) is Prepare:
            seen.add(op.wire)
            continue
        for w in op.touched:
            if w not in seen:
                seen.add(w)
                live_prep[w] = True
    for w in exp.reveal:
        if w not in seen:
            live_prep[w] = True
    return live_prep, live_op


def budget(exp: Experiment, prune: bool = True, liveness=None) -> int:
    """Number of free random bits needed to enumerate ``exp`` exactly."""
    if liveness is None:
        liveness = _liveness(exp) if prune else _all_live(exp)
    live_prep, live_op = liveness
    total = 0
    for w in range(exp.width):
        basis, _ = exp.prep(w)
        if live_prep[w]:
            total += _prep_draws(basis)
    for op, live in zip(exp.ops, live_op):
        if type(op) is Gate:
            continue
        if isinstance(op, Coin):
            total += 1
        elif isinstance(op, Prepare) and live:
            total += _prep_draws(op.basis)
        elif isinstance(op, Measure) and live:
            total += _meas_draws(op)
    return total


# --------------------------------------------------------------------------
# Interpreter
# --------------------------------------------------------------------------

def _prepare_lane(basis: str, value: int, draw, full: int, live: bool) -> tuple[int, int]:
    if basis == "point":
        if not 0 <= value < 4:
            raise KernelError(f"point label {value} outside 0..3")
        return (full if value >> 1 else 0), (full if value & 1 else 0)
    v = full if value else 0
    r = draw() if live else 0
    if basis == "Z":
        return v, r
    if basis == "X":
        return r, v
    if basis == "Y":
        return r, r ^ v
    if basis in ("mixed", "MIXED"):
        return r, draw() if live else 0
    raise KernelError(f"unknown basis {basis!r}")


def _measure_lanes(m: Measure, xs: list[int], ps: list[int], full: int, draw, live: bool) -> list[int]:
    def fresh() -> int:
        return draw() if live else 0

    k, w = m.kind, m.wires
    if k == "Z":
        out = xs[w[0]]
        ps[w[0]] = fresh()
        return [out]
    if k == "X":
        out = ps[w[0]]
        xs[w[0]] = fresh()
        return [out]
    if k == "Y":
        a = w[0]
        out = xs[a] ^ ps[a]
        r = fresh()
        xs[a], ps[a] = r, r ^ out
        return [out]
    if k in ("ZZ", "XX", "ZX"):
        i, j = w
        left = xs if k[0] == "Z" else ps
        right = xs if k[1] == "Z" else ps
        out = left[i] ^ right[j]
        r = fresh()
        left[i], right[j] = r, r ^ out
        return [out]
    if k == "Bell":
        i, j = w
        ox = xs[i] ^ xs[j]
        op = ps[i] ^ ps[j]
        r1, r2 = fresh(), fresh()
        xs[i], xs[j] = r1, r1 ^ ox
        ps[i], ps[j] = r2, r2 ^ op
        return [ox, op]
    if k == "AllZero":
        any_one = 0
        for a in w:
            any_one |= xs[a]
        for a in w:
            ps[a] = fresh()
        return [full ^ any_one]
    raise KernelError(k)  # pragma: no cover


def _all_live(exp: Experiment) -> tuple[list[bool], list[bool]]:
    return [True] * exp.width, [True] * len(exp.ops)


def _execute(exp: Experiment, draw: Callable[[], int], full: int, liveness=None):
    live_prep, live_op = liveness or _all_live(exp)
    xs: list[int] = []
    ps: list[int] = []
    for w in range(exp.width):
        basis, value = exp.prep(w)
        x, p = _prepare_lane(basis, value, draw, full, live_prep[w])
        xs.append(x)
        ps.append(p)
    record: list[int] = []
    for op, live in zip(exp.ops, live_op):
        if type(op) is Gate:
            if op.kind == "CNOT":  # by far the most common gate; skip the dispatch
                c, t = op.wires
                ps[c] ^= ps[t]
                xs[t] ^= xs[c]
            else:
                apply_lanes(op, xs, ps, full, record)
        elif isinstance(op, Measure):
            record.extend(_measure_lanes(op, xs, ps, full, draw, live))
        elif isinstance(op, Coin):
            record.append(draw())
        elif isinstance(op, Prepare):
            xs[op.wire], ps[op.wire] = _prepare_lane(op.basis, op.value, draw, full, live)
        else:
            raise KernelError(f"unknown op {op!r}")
    return xs, ps, record


def _readout(exp: Experiment, record: list[int], xs: list[int], ps: list[int]) -> list[int]:
    bits = list(record) if exp.readout is None else [record[i] for i in exp.readout]
    for w in exp.reveal:
        bits += [xs[w], ps[w]]
    return bits


def run(exp: Experiment, rng: RandomSource | None = None) -> tuple[str, WorldState]:
    """Execute one trial; return the outcome bit string and the final state."""
    rng = rng or RandomSource()
    counter = iter(range(1 << 62))

    def draw() -> int:
        return rng.bit(next(counter))

    xs, ps, record = _execute(exp, draw, 1)
    bits = _readout(exp, record, xs, ps)
    outcome = "".join(str(b) for b in reversed(bits))
    state = WorldState(tuple(ElementarySystem(x, p) for x, p in zip(xs, ps)), tuple(record))
    return outcome, state


def measure(spec: Measure, state: Sequence[ElementarySystem], rng: RandomSource | None = None):
    """Measure a single-lane register; returns ``(outcome bits, new register)``."""
    rng = rng or RandomSource()
    counter = iter(range(1 << 62))
    xs = [s.x for s in state]
    ps = [s.p for s in state]
    out = _measure_lanes(spec, xs, ps, 1, lambda: rng.bit(next(counter)), True)
    new = tuple(ElementarySystem(x, p) for x, p in zip(xs, ps))
    return (out[0] if len(out) == 1 else tuple(out)), new


def _histogram(bits: list[int], lanes: int) -> np.ndarray:
    idx = np.zeros(lanes, dtype=np.int64)
    for k, v in enumerate(bits):
        if v:
            idx |= unpack_lanes(v, lanes).astype(np.int64) << k
    return np.bincount(idx, minlength=1 << len(bits)) if len(bits) <= 20 else idx


def _to_counts(bits: list[int], lanes: int) -> dict[int, int]:
    h = _histogram(bits, lanes)
    if len(bits) <= 20:
        nz = np.nonzero(h)[0]
        return {int(k): int(h[k]) for k in nz}
    keys, cnt = np.unique(h, return_counts=True)
    return {int(k): int(c) for k, c in zip(keys, cnt)}


def exact_distribution(exp: Experiment, cap: int = DEFAULT_CAP, prune: bool = True) -> Distribution:
    """Exact outcome distribution by enumerating every free random bit.

    With ``prune=False`` dead random bits are enumerated too, so every raw
    execution branch is visited; the distribution is the same either way.
    """
    liveness = _liveness(exp) if prune else _all_live(exp)
    b = budget(exp, liveness=liveness)
    if b > cap:
        raise ExactIntractable(f"{b} free random bits exceed the cap of {cap}")
    lanes = 1 << b
    full = (1 << lanes) - 1
    idx = np.arange(lanes, dtype=np.int64)
    patterns = iter([pack_lanes(((idx >> k) & 1).astype(np.uint8)) for k in range(b)])
    xs, ps, record = _execute(exp, lambda: next(patterns), full, liveness)
    counts = _to_counts(_readout(exp, record, xs, ps), lanes)
    return Distribution(exp.outcome_width, {k: Fraction(c, lanes) for k, c in counts.items()})


def sample(exp: Experiment, trials: int, seed: int = 0, chunk: int = 1 << 16) -> Distribution:
    """Empirical distribution from ``trials`` independent runs.

    Trial ``i`` uses stream ``i`` of ``RandomSource(seed)``, so the result does
    not depend on ``chunk``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = RandomSource(seed)
    counts: dict[int, int] = {}
    for start in range(0, trials, chunk):
        lanes = min(chunk, trials - start)
        full = (1 << lanes) - 1
        streams = np.arange(start, start + lanes, dtype=np.uint64)
        counter = iter(range(1 << 62))

        def draw() -> int:
            return pack_lanes(rng.bits(next(counter), streams))

        xs, ps, record = _execute(exp, draw, full)
        for k, c in _to_counts(_readout(exp, record, xs, ps), lanes).items():
            counts[k] = counts.get(k, 0) + c
    return Distribution(exp.outcome_width, counts=counts, total=trials)


def distribution_from_mapping(width: int, mapping: Mapping) -> Distribution:
    """Build an exact Distribution from ``{outcome: probability}``."""
    probs = {}
    for k, v in mapping.items():
        key = int(k, 2) if isinstance(k, str) else int(k)
        probs[key] = Fraction(v)
    return Distribution(width, probs)

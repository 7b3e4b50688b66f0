"""
Algorithm drivers: experiment builders plus classical post-processing.

Every ``*_experiment`` function returns an :class:`~qsl.engine.Experiment`
whose readout is the algorithm's raw measurement, so callers can choose
between a single :func:`~qsl.engine.run`, :func:`~qsl.engine.sample` or
:func:`~qsl.engine.exact_distribution`.  The drivers on top run single trials
with a :class:`~qsl.kernel.RandomSource` and count oracle calls.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import gf2
from .engine import Experiment, run
from .kernel import Circuit, H, Measure, NToffoli, RandomSource, Sinv, X, classically_controlled
from .oracles import OracleError, OracleSpec, shor15_multiplier

__all__ = [
    "DJVerdict", "dj_experiment", "deutsch_jozsa", "dj_verdict_from_raw",
    "bv_experiment", "bernstein_vazirani",
    "grover_round_experiment", "grover_default_budget", "GroverResult", "grover_search",
    "simon_experiment", "simon_subroutine", "gf2_nullspace", "BudgetExhausted", "SimonResult",
    "simon_solve", "simon_deterministic_experiment", "simon_deterministic",
    "continued_fraction_r", "shor15_experiment", "ShorOutcome", "shor_factor15",
    "shor_order", "count_oracle_calls",
]

DJ_FAMILIES = ("DJPromise", "DJDecision", "DJ3Catalog", "Majority")


def _expect(oracle: OracleSpec, *families: str) -> None:
    if oracle.family not in families:
        raise OracleError(f"expected a {'/'.join(families)} oracle, got {oracle.family}")


def _prep(width: int, ones: Sequence[int] = ()) -> tuple:
    return tuple(("Z", int(w in ones)) for w in range(width))


def count_oracle_calls(circuit: Circuit, oracle: OracleSpec) -> int:
    """How many times the oracle's gate list occurs contiguously in ``circuit``."""
    body = oracle.circuit.ops
    ops = circuit.ops
    if not body:
        return 0
    hits, i = 0, 0
    while i + len(body) <= len(ops):
        if ops[i:i + len(body)] == body:
            hits += 1
            i += len(body)
        else:
            i += 1
    return hits


# --------------------------------------------------------------------------
# Deutsch-Jozsa and Bernstein-Vazirani
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DJVerdict:
    """``value`` is ``constant``/``balanced`` for promise oracles and
    ``not_balanced``/``not_constant`` for the decision form."""

    value: str
    raw: str
    queries: int = 1

    @property
    def says_constant(self) -> bool:
        return self.value in ("constant", "not_balanced")


def _phase_query_experiment(oracle: OracleSpec, readout_kind: str) -> Experiment:
    """Query in (0,R), answer in (1,R), H on both, oracle, H on the query."""
    q, a = oracle.query, oracle.answer
    pre = [H(w) for w in q + a]
    post = [H(w) for w in q]
    circ = Circuit(oracle.circuit.width, pre, oracle.circuit.ancillas) + oracle.circuit \
        + Circuit(oracle.circuit.width, post)
    if readout_kind == "allzero":
        meas = (Measure("AllZero", q),)
    else:
        meas = tuple(Measure("Z", (w,)) for w in q)
    return Experiment(circ, _prep(circ.width, a), meas)


def dj_experiment(oracle: OracleSpec, readout: str = "raw") -> Experiment:
    """Deutsch-Jozsa circuit.  ``readout="raw"`` Z-measures every query wire;
    ``readout="allzero"`` performs a single all-zero test (outcome 1 = constant)."""
    _expect(oracle, *DJ_FAMILIES)
    if readout not in ("raw", "allzero"):
        raise ValueError(f"unknown DJ readout {readout!r}")
    return _phase_query_experiment(oracle, readout)


def dj_verdict_from_raw(oracle: OracleSpec, raw: str) -> DJVerdict:
    constant = set(raw) <= {"0"}
    if oracle.family == "DJDecision":
        value = "not_balanced" if constant else "not_constant"
    else:
        value = "constant" if constant else "balanced"
    return DJVerdict(value, raw, 1)


def deutsch_jozsa(oracle: OracleSpec, rng: RandomSource | None = None) -> DJVerdict:
    raw, _ = run(dj_experiment(oracle), rng)
    return dj_verdict_from_raw(oracle, raw)


def bv_experiment(oracle: OracleSpec) -> Experiment:
    _expect(oracle, "BV")
    return _phase_query_experiment(oracle, "raw")


def bernstein_vazirani(oracle: OracleSpec, rng: RandomSource | None = None) -> str:
    """One query; the Z readout of the query register is the secret string."""
    raw, _ = run(bv_experiment(oracle), rng)
    return raw


# --------------------------------------------------------------------------
# Grover
# --------------------------------------------------------------------------

def grover_round_experiment(oracle: OracleSpec) -> Experiment:
    """One query followed by the inversion about the mean, then Z readout."""
    _expect(oracle, "Grover")
    q, (t,) = oracle.query, oracle.answer
    w = oracle.circuit.width
    hq = [H(i) for i in q]
    flips = [X(i) for i in q]
    # n-controlled Z: conjugate an NToffoli onto wire q[0] with Hadamards
    cz = [H(q[0]), NToffoli(q[1:], q[0]), H(q[0])]
    circ = (Circuit(w, hq + [H(t)]) + oracle.circuit
            + Circuit(w, hq + flips + cz + flips + hq))
    return Experiment(circ, _prep(w, (t,)), tuple(Measure("Z", (i,)) for i in q))


def grover_default_budget(n: int, kappa: float = 1.0) -> int:
    """``ceil(kappa * 2**n / (n + 2))`` rounds; failure probability below ``exp(-kappa)``."""
    return math.ceil(kappa * (1 << n) / (n + 2))


@dataclass(frozen=True)
class GroverResult:
    xstar: str | None
    rounds: int
    queries: int


def grover_search(oracle: OracleSpec, budget: int | None = None, seed: int = 0) -> GroverResult:
    """Repeat single rounds, checking each candidate with one classical query."""
    _expect(oracle, "Grover")
    n = oracle.n
    budget = grover_default_budget(n) if budget is None else budget
    if budget < 1:
        raise ValueError("budget must be >= 1")
    exp = grover_round_experiment(oracle)
    for k in range(budget):
        cand, _ = run(exp, RandomSource(seed, k))
        if oracle.f(int(cand, 2)):
            return GroverResult(cand, k + 1, 2 * (k + 1))
    return GroverResult(None, budget, 2 * budget)


# --------------------------------------------------------------------------
# Simon
# --------------------------------------------------------------------------

class BudgetExhausted(RuntimeError):
    """The query budget ran out before enough independent vectors appeared."""


@dataclass(frozen=True)
class SimonResult:
    kind: str                       # "two_to_one" or "one_to_one"
    s: str | None
    queries: int
    vectors: tuple[str, ...] = field(default=())


def gf2_nullspace(rows: Sequence[str], n: int | None = None) -> list[str]:
    """Basis of the vectors orthogonal to every row, as MSB-first strings."""
    if n is None:
        if not rows:
            raise ValueError("width needed when there are no rows")
        n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise ValueError("rows must all have length n")
    return [format(v, f"0{n}b") for v in gf2.nullspace([int(r, 2) for r in rows], n)]


def simon_experiment(oracle: OracleSpec) -> Experiment:
    """Query through H, one oracle call with the answer in (0,R), H, Z readout."""
    _expect(oracle, "Simon")
    q = oracle.query
    w = oracle.circuit.width
    circ = Circuit(w, [H(i) for i in q]) + oracle.circuit + Circuit(w, [H(i) for i in q])
    return Experiment(circ, _prep(w), tuple(Measure("Z", (i,)) for i in q))


def simon_subroutine(oracle: OracleSpec, rng: RandomSource | None = None) -> str:
    out, _ = run(simon_experiment(oracle), rng)
    return out


def _candidate(vectors: list[int], n: int) -> int | None:
    null = gf2.nullspace(vectors, n)
    return null[0] if len(null) == 1 else None


def simon_solve(oracle: OracleSpec, rng: RandomSource | None = None,
                max_queries: int | None = None) -> SimonResult:
    """Collect outputs until they span ``n - 1`` dimensions, then verify ``s*``.

    The verification compares ``f(0)`` with ``f(s*)``: two classical queries.
    """
    _expect(oracle, "Simon")
    rng = rng or RandomSource()
    n = oracle.n
    max_queries = 4 * n if max_queries is None else max_queries
    exp = simon_experiment(oracle)
    basis: list[int] = []
    seen: list[str] = []
    for k in range(max_queries):
        out, _ = run(exp, rng.spawn((rng.stream << 20) + k))
        seen.append(out)
        v = int(out, 2)
        if v and not gf2.in_span(v, basis):
            basis.append(v)
        if len(basis) >= n - 1:
            s = _candidate(basis, n)
            queries = k + 1 + 2
            if s is not None and oracle.f(0) == oracle.f(s):
                return SimonResult("two_to_one", format(s, f"0{n}b"), queries, tuple(seen))
            return SimonResult("one_to_one", None, queries, tuple(seen))
    raise BudgetExhausted(f"only {len(basis)} independent vectors after {max_queries} queries")


def simon_deterministic_experiment(oracle: OracleSpec, k: int) -> Experiment:
    """Query ``k`` of the deterministic variant: answer wire ``k`` gets phase 1."""
    _expect(oracle, "Simon")
    n = oracle.n
    if not 0 <= k < n:
        raise ValueError(f"k must be in [0, {n})")
    q, a = oracle.query, oracle.answer
    w = oracle.circuit.width
    circ = Circuit(w, [H(i) for i in q + a]) + oracle.circuit + Circuit(w, [H(i) for i in q])
    return Experiment(circ, _prep(w, (a[k],)), tuple(Measure("Z", (i,)) for i in q))


def simon_deterministic(oracle: OracleSpec, rng: RandomSource | None = None) -> SimonResult:
    """Exactly ``n`` queries, one per answer phase pattern ``delta_k``.

    The outputs span ``n - 1`` dimensions when ``f`` is two-to-one and all
    of ``Z_2^n`` when it is one-to-one.
    """
    _expect(oracle, "Simon")
    n = oracle.n
    outs = [run(simon_deterministic_experiment(oracle, k), rng)[0] for k in range(n)]
    vecs = [int(o, 2) for o in outs]
    if gf2.rank(vecs) == n:
        return SimonResult("one_to_one", None, n, tuple(outs))
    s = _candidate(vecs, n)
    return SimonResult("two_to_one", format(s, f"0{n}b"), n, tuple(outs))


# --------------------------------------------------------------------------
# Shor, N = 15
# --------------------------------------------------------------------------

SHOR_Q = 8
# (query wire, power) in application order: the squared multiplier runs first
_SHOR_STAGES = ((1, 2), (0, 1))


def shor_order(a: int, modulus: int = 15) -> int:
    r, v = 1, a % modulus
    while v != 1:
        v = v * a % modulus
        r += 1
    return r


def shor15_experiment(a: int, layout: str = "fredkin") -> Experiment:
    """Period finding for ``a`` mod 15 with a semiclassical inverse transform.

    Wires 0..2 are the query (wire 2 is the stage whose multiplier is always
    the identity), wires 3..6 hold ``y`` prepared as the number 1.  The
    outcome ``m2 + 2*m1 + 4*m0`` reads the query wires in measurement order.
    """
    width = 7
    ops = [H(0), H(1), H(2)]
    for wire, power in _SHOR_STAGES:
        mult = shor15_multiplier(a, power, layout)
        ops += mult.circuit.remapped([wire, 3, 4, 5, 6], width).ops
    ops += [H(2), Measure("Z", (2,)),
            classically_controlled(Sinv(1), 0), H(1), Measure("Z", (1,)),
            classically_controlled(Sinv(0), 1), H(0), Measure("Z", (0,))]
    prep = _prep(width, (3,))
    return Experiment(Circuit(width, ops), prep)


def continued_fraction_r(y: int, Q: int = SHOR_Q, rmax: int = 15) -> int | None:
    """Denominator of the best approximation to ``y/Q`` with denominator <= ``rmax``."""
    if not 0 <= y < Q:
        raise ValueError("need 0 <= y < Q")
    if y == 0:
        return None
    return Fraction(y, Q).limit_denominator(rmax).denominator


@dataclass(frozen=True)
class ShorOutcome:
    a: int
    samples: tuple[int, ...]
    r: int | None
    factors: tuple[int, int] | None


def _factors_from(a: int, r: int | None, N: int = 15) -> tuple[int, int] | None:
    if r is None or r % 2 or pow(a, r, N) != 1:
        return None
    h = pow(a, r // 2, N)
    f1, f2 = math.gcd(h - 1, N), math.gcd(h + 1, N)
    if 1 < f1 < N and 1 < f2 < N and f1 * f2 == N:
        return tuple(sorted((f1, f2)))
    return None


def shor_factor15(a: int, seed: int = 0, max_samples: int = 16,
                  layout: str = "fredkin") -> ShorOutcome:
    """Sample until a continued-fraction candidate yields both factors of 15."""
    if a not in (2, 4, 7, 8, 11, 13):
        raise OracleError(f"a={a} is not a valid base for N=15")
    exp = shor15_experiment(a, layout)
    samples: list[int] = []
    for k in range(max_samples):
        out, _ = run(exp, RandomSource(seed, k))
        y = int(out, 2)
        samples.append(y)
        r = continued_fraction_r(y)
        factors = _factors_from(a, r)
        if factors:
            return ShorOutcome(a, tuple(samples), r, factors)
    return ShorOutcome(a, tuple(samples), None, None)

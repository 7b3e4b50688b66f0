"""
Quantum-information protocols rebuilt from QSL parts.

Each protocol comes as an experiment builder plus a small driver.  The
builders are what the tests enumerate exactly; the drivers run one trial.

Two-system registers use wire 1 as the *first* system (the one the Bell
circuit puts the Hadamard on) and wire 0 as the second.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import stats
from .engine import Experiment, exact_distribution, run, sample
from .kernel import (CNOT, Circuit, Coin, ElementarySystem, H, Measure, RandomSource, Toffoli,
                     X, Y, Z, classically_controlled)

__all__ = ["BELL_KINDS", "bell_circuit", "bell_experiment", "bell_pair", "teleport_experiment",
           "teleport", "superdense_experiment", "superdense_roundtrip", "BB84Round",
           "bb84_experiment", "bb84_round", "bb84_run", "bb84_exact_qber", "ghz_circuit",
           "ghz_experiment", "ghz_state", "ghz_conditional_entropy",
           "singlet_pauli_correlations"]

# kind -> (computational value of first system, of second system) before H and CNOT
BELL_KINDS = {"psi+": (0, 0), "psi-": (1, 0), "phi+": (0, 1), "phi-": (1, 1)}
_ALIASES = {"Ψ+": "psi+", "Ψ-": "psi-", "Ψ−": "psi-", "Φ+": "phi+", "Φ-": "phi-", "Φ−": "phi-"}


def _bell_kind(kind: str) -> str:
    k = _ALIASES.get(kind, kind.lower())
    if k not in BELL_KINDS:
        raise ValueError(f"unknown Bell state {kind!r}; expected one of {sorted(BELL_KINDS)}")
    return k


def bell_circuit(first: int = 1, second: int = 0, width: int = 2) -> Circuit:
    return Circuit(width, [H(first), CNOT(first, second)])


def _bell_prep(kind: str, first: int, second: int, width: int) -> list:
    a, b = BELL_KINDS[_bell_kind(kind)]
    prep = [("Z", 0)] * width
    prep[first] = ("Z", a)
    prep[second] = ("Z", b)
    return prep


def bell_experiment(kind: str, measurements: tuple = (), reveal: tuple = ()) -> Experiment:
    return Experiment(bell_circuit(), tuple(_bell_prep(kind, 1, 0, 2)), measurements,
                      reveal=reveal)


def bell_pair(kind: str, rng: RandomSource | None = None) -> tuple[ElementarySystem, ...]:
    """Prepare a Bell-state analog; returns ``(second, first)`` indexed by wire."""
    _, state = run(bell_experiment(kind), rng)
    return state.systems


# --------------------------------------------------------------------------
# Teleportation
# --------------------------------------------------------------------------

def teleport_experiment(preparation: tuple[str, int] = ("point", 0)) -> Experiment:
    """Input on wire 2, Alice's half of a psi+ pair on wire 1, Bob on wire 0.

    The record holds Alice's two outcomes (input wire first); Bob's final
    bit pair is revealed above them.
    """
    ops = [H(1), CNOT(1, 0),
           CNOT(2, 1), H(2), Measure("Z", (2,)), Measure("Z", (1,)),
           classically_controlled(X(0), 1), classically_controlled(Z(0), 0)]
    prep = (("Z", 0), ("Z", 0), preparation)
    return Experiment(Circuit(3, ops), prep, reveal=(0,))


def teleport(state: ElementarySystem, rng: RandomSource | None = None) -> ElementarySystem:
    _, world = run(teleport_experiment(("point", state.label)), rng)
    return world.systems[0]


# --------------------------------------------------------------------------
# Superdense coding
# --------------------------------------------------------------------------

def superdense_experiment(m1: int, m0: int) -> Experiment:
    """Alice encodes ``m1`` as a Z flip and ``m0`` as an X flip on wire 1."""
    ops = [H(1), CNOT(1, 0)]
    if m1 and m0:
        ops.append(Y(1))
    elif m1:
        ops.append(Z(1))
    elif m0:
        ops.append(X(1))
    return Experiment(Circuit(2, ops), (), (Measure("Bell", (1, 0)),))


def superdense_roundtrip(m1: int, m0: int, rng: RandomSource | None = None) -> tuple[int, int]:
    outcome, _ = run(superdense_experiment(m1, m0), rng)
    # outcome string is "<phase correlation><computational correlation>"
    return int(outcome[0]), int(outcome[1])


# --------------------------------------------------------------------------
# BB84
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BB84Round:
    alice_basis: int
    alice_bit: int
    eve_present: bool
    eve_basis: int | None
    bob_basis: int
    bob_bit: int

    @property
    def sifted(self) -> bool:
        return self.alice_basis == self.bob_basis

    @property
    def error(self) -> bool:
        return self.sifted and self.alice_bit != self.bob_bit


def bb84_experiment(eavesdrop: bool) -> Experiment:
    """One round on a single wire; bases and bits come from coins.

    Record layout: Alice basis, Alice bit, [Eve basis, Eve outcome,] Bob
    basis, Bob outcome.  Basis 1 means the X basis.
    """
    ops: list = [Coin(), Coin(), classically_controlled(X(0), 1), classically_controlled(H(0), 0)]
    bob = 2
    if eavesdrop:
        ops += [Coin(), classically_controlled(H(0), 2), Measure("Z", (0,)),
                classically_controlled(H(0), 2)]
        bob = 4
    ops += [Coin(), classically_controlled(H(0), bob), Measure("Z", (0,))]
    return Experiment(Circuit(1, ops))


def _decode_round(bits: int, eavesdrop: bool) -> BB84Round:
    rec = [(bits >> k) & 1 for k in range(6 if eavesdrop else 4)]
    if eavesdrop:
        return BB84Round(rec[0], rec[1], True, rec[2], rec[4], rec[5])
    return BB84Round(rec[0], rec[1], False, None, rec[2], rec[3])


def bb84_round(eavesdrop: bool, rng: RandomSource | None = None) -> BB84Round:
    outcome, _ = run(bb84_experiment(eavesdrop), rng)
    return _decode_round(int(outcome, 2), eavesdrop)


def bb84_run(rounds: int, eavesdrop: bool, seed: int = 0) -> tuple[int, int]:
    """Sample ``rounds`` rounds; returns ``(sifted rounds, sifted errors)``."""
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    dist = sample(bb84_experiment(eavesdrop), rounds, seed)
    sifted = errors = 0
    for bits, count in dist.counts.items():
        r = _decode_round(bits, eavesdrop)
        sifted += count * r.sifted
        errors += count * r.error
    return sifted, errors


def bb84_exact_qber(eavesdrop: bool) -> Fraction:
    """Exact ``P(error | sifted)`` for one round."""
    sifted = errors = Fraction(0)
    for bits, p in exact_distribution(bb84_experiment(eavesdrop)).items():
        r = _decode_round(bits, eavesdrop)
        sifted += p * r.sifted
        errors += p * r.error
    return errors / sifted


# --------------------------------------------------------------------------
# GHZ
# --------------------------------------------------------------------------

def ghz_circuit(construction: str) -> Circuit:
    """Two builds with the same computational action, fanned out from wire 2.

    ``toffoli``: H, CNOT(2->1), Toffoli(2,1->0).  ``cnot``: H, CNOT(2->1), CNOT(2->0).
    """
    if construction == "toffoli":
        last = Toffoli(2, 1, 0)
    elif construction == "cnot":
        last = CNOT(2, 0)
    else:
        raise ValueError(f"unknown GHZ construction {construction!r}")
    return Circuit(3, [H(2), CNOT(2, 1), last])


def ghz_experiment(construction: str, measurements: tuple = (), reveal: tuple = ()) -> Experiment:
    return Experiment(ghz_circuit(construction), (), measurements, reveal=reveal)


def ghz_state(construction: str, rng: RandomSource | None = None) -> tuple[ElementarySystem, ...]:
    _, state = run(ghz_experiment(construction), rng)
    return state.systems


def ghz_conditional_entropy(construction: str) -> float:
    """Entropy in bits of system 2 given Z on system 0 and X on system 1."""
    exp = ghz_experiment(construction, (Measure("Z", (0,)), Measure("X", (1,))), reveal=(2,))
    joint = exact_distribution(exp)
    return stats.entropy(joint) - stats.entropy(joint.marginal([0, 1]))


# --------------------------------------------------------------------------
# Singlet correlations
# --------------------------------------------------------------------------

def singlet_pauli_correlations() -> dict[str, int]:
    """Sign of the outcome correlation for equal local measurements on phi-.

    ``-1`` means the two outcomes always differ, ``+1`` always agree, ``0``
    neither.
    """
    table = {}
    for kind in ("Z", "X", "Y"):
        exp = bell_experiment("phi-", (Measure(kind, (1,)), Measure(kind, (0,))))
        parity = {(k & 1) ^ (k >> 1) for k in exact_distribution(exp).support()}
        table[kind] = {frozenset({0}): 1, frozenset({1}): -1}.get(frozenset(parity), 0)
    return table

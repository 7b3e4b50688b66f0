"""Distance and information measures between outcome distributions.

All functions accept :class:`~qsl.engine.Distribution` objects or plain
``{outcome: probability}`` mappings.  Empirical distributions enter through
their maximum-likelihood estimate ``count / total``.
"""
from __future__ import annotations

import math
from typing import Mapping

from .engine import Distribution

__all__ = ["SpaceMismatch", "statistical_overlap", "fidelity", "sso", "entropy"]


class SpaceMismatch(ValueError):
    """The two distributions live on different outcome spaces."""


def _as_map(d) -> tuple[int | None, dict]:
    if isinstance(d, Distribution):
        return d.width, {k: float(v) for k, v in d.items()}
    if isinstance(d, Mapping):
        return None, {k: float(v) for k, v in d.items()}
    raise TypeError(f"expected a Distribution or mapping, got {type(d).__name__}")


def _pair(P, Q) -> tuple[dict, dict, list]:
    wp, p = _as_map(P)
    wq, q = _as_map(Q)
    if wp is not None and wq is not None and wp != wq:
        raise SpaceMismatch(f"outcome widths differ: {wp} vs {wq}")
    kinds = {type(k) for k in p} | {type(k) for k in q}
    if len(kinds) > 1:
        raise SpaceMismatch("outcome labels mix types")
    if str in kinds:
        lengths = {len(k) for k in p} | {len(k) for k in q}
        if len(lengths) > 1:
            raise SpaceMismatch(f"outcome strings of different lengths: {sorted(lengths)}")
    return p, q, sorted(set(p) | set(q))


def statistical_overlap(P, Q) -> float:
    """One minus the total-variation distance."""
    p, q, keys = _pair(P, Q)
    tv = 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)
    return min(1.0, max(0.0, 1.0 - tv))


def fidelity(P, Q) -> float:
    return math.sqrt(statistical_overlap(P, Q))


def sso(P, Q) -> float:
    """Squared Bhattacharyya coefficient."""
    p, q, keys = _pair(P, Q)
    bc = sum(math.sqrt(p.get(k, 0.0) * q.get(k, 0.0)) for k in keys)
    return min(1.0, bc * bc)


def entropy(P) -> float:
    """Shannon entropy in bits."""
    _, p = _as_map(P)
    h = -sum(v * math.log2(v) for v in p.values() if v > 0)
    return h + 0.0  # normalise -0.0

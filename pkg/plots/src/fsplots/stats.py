"""Statistics helpers re-derived in the plot layer.

Likelihood bands and rate conversions are recomputed here from the raw
shots/errors columns rather than trusted from upstream, as a cross-check
on the producing pipeline.
"""

from __future__ import annotations

import math


def likelihood_band(shots: int, errors: int, factor: float = 1000.0) -> tuple[float, float]:
    """Interval of p with binomial likelihood within `factor` of the maximum."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if errors == 0:
        return 0.0, 1.0 - factor ** (-1.0 / shots)
    if errors == shots:
        return factor ** (-1.0 / shots), 1.0
    p_hat = errors / shots
    log_f = math.log(factor)

    def excess(p: float) -> float:
        return (
            errors * (math.log(p) - math.log(p_hat))
            + (shots - errors) * (math.log1p(-p) - math.log1p(-p_hat))
            + log_f
        )

    low = _bisect(excess, 1e-18, p_hat)
    high = _bisect(excess, 1.0 - 1e-16, p_hat)
    return low, high


def _bisect(f, outer: float, inner: float) -> float:
    # f(inner) = log(factor) > 0, f(outer) < 0; shrink to relative 1e-12.
    a, b = outer, inner
    for _ in range(200):
        mid = 0.5 * (a + b)
        if f(mid) < 0:
            a = mid
        else:
            b = mid
        if abs(a - b) <= 1e-12 * max(abs(a), abs(b), 1e-300):
            break
    return 0.5 * (a + b)


def per_round_rate(p_shot: float, rounds: int) -> float:
    p_shot = min(p_shot, 0.5)
    return (1.0 - (1.0 - 2.0 * p_shot) ** (1.0 / max(rounds, 1))) / 2.0


def combine_xz(p_x: float, p_z: float) -> float:
    return p_x + p_z - p_x * p_z

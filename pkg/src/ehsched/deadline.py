"""Completion-time minimisation by inverting the throughput function D(T)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .curves import DEFAULT_CELLS
from .multihop import MultiHopSolution, Scenario, solve_throughput
from .rate import check_rate_law

__all__ = ["DeadlineQuery", "UnreachableTarget", "throughput_at", "min_completion_time"]


class UnreachableTarget(ValueError):
    """The target cannot be delivered within the horizon."""


@dataclass(frozen=True, eq=False)
class DeadlineQuery:
    scenario: Scenario
    target_bits: float
    t_max: float
    time_tol: float = 1e-6
    iterations: int = 40
    cells: int = DEFAULT_CELLS

    def __post_init__(self):
        if not self.target_bits > 0:
            raise ValueError("target data must be positive")
        if not self.t_max > 0:
            raise ValueError("horizon cap must be positive")
        if self.t_max > self.scenario.horizon * (1 + 1e-12):
            raise ValueError(f"horizon cap {self.t_max:g} exceeds the curve domain {self.scenario.horizon:g}")


def throughput_at(sc: Scenario, t: float, cells: int = DEFAULT_CELLS) -> float:
    """End-to-end throughput D(t) with the deadline moved to ``t``."""
    if not t > 0:
        raise ValueError(f"deadline must be positive, got {t}")
    return solve_throughput(sc.with_deadline(t), cells=cells, minimize_energy=False).throughput


def min_completion_time(q: DeadlineQuery) -> tuple[float, MultiHopSolution]:
    """Smallest deadline at which ``q.target_bits`` reach the receiver.

    Bisection on the nondecreasing D(t).  Returns the deadline and the
    energy-trimmed solution for it.
    """
    sc = q.scenario
    for i, r in enumerate(sc.rates):
        if not check_rate_law(r).sublinear:
            warnings.warn(
                f"rate law of hop {i} does not grow sublinearly; D(t) may be discontinuous",
                RuntimeWarning,
                stacklevel=2,
            )
    d_max = throughput_at(sc, q.t_max, q.cells)
    if d_max < q.target_bits:
        raise UnreachableTarget(
            f"only {d_max:.6g} bits can be delivered by t_max = {q.t_max:g}, target is {q.target_bits:g}"
        )
    lo, hi = 0.0, q.t_max
    for _ in range(q.iterations):
        if hi - lo <= q.time_tol:
            break
        mid = 0.5 * (lo + hi)
        if throughput_at(sc, mid, q.cells) >= q.target_bits:
            hi = mid
        else:
            lo = mid
    return hi, solve_throughput(sc.with_deadline(hi), cells=q.cells)

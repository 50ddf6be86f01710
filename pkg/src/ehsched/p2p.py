"""Offline point-to-point throughput maximisation.

One transmitter, a harvested-energy curve ``E``, an arrived-data curve ``B``
and a deadline ``T``.  The solver sweeps the grid forward; at each cell start
``t0`` it transmits with the largest constant power that, if held, would
violate neither causality constraint anywhere in ``(t0, T]``:

    p(t0) = min( r^-1( inf (B(x) - B_tx(t0)) / (x - t0) ),
                 inf (E(x) - E_tx(t0)) / (x - t0) )

The power is frozen over the cell.  The result is the taut, convex
transmitted-data curve: throughput-maximal and, among maximisers, the one
that spends the least energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import DEFAULT_CELLS, CurveError, PiecewiseCurve, make_grid
from .rate import RateFunction

__all__ = [
    "Schedule",
    "FeasibilityReport",
    "solve_p2p",
    "schedule_from_power",
    "schedule_from_data_curve",
    "energy_of_data_curve",
    "check_feasible",
    "causality_tol",
]

CAUSALITY_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class Schedule:
    """Piecewise-constant power on a grid with its cumulative integrals.

    ``power[k]`` holds on ``[t[k], t[k+1])``; ``energy`` and ``data`` are
    sampled at every grid point and start at zero.
    """

    t: np.ndarray
    power: np.ndarray
    energy: np.ndarray
    data: np.ndarray

    @property
    def T(self) -> float:
        return float(self.t[-1])

    @property
    def throughput(self) -> float:
        return float(self.data[-1])

    @property
    def total_energy(self) -> float:
        return float(self.energy[-1])

    def data_curve(self) -> PiecewiseCurve:
        return PiecewiseCurve.from_samples(self.t, self.data)

    def energy_curve(self) -> PiecewiseCurve:
        return PiecewiseCurve.from_samples(self.t, self.energy)

    def scaled(self, factor: float, rate: RateFunction) -> Schedule:
        return schedule_from_power(self.t, self.power * factor, rate)


def schedule_from_power(t: np.ndarray, power: np.ndarray, rate: RateFunction) -> Schedule:
    t = np.asarray(t, dtype=float)
    power = np.asarray(power, dtype=float)
    dt = np.diff(t)
    energy = np.concatenate(([0.0], np.cumsum(power * dt)))
    data = np.concatenate(([0.0], np.cumsum(np.asarray(rate(power)) * dt)))
    return Schedule(t, power, energy, data)


def schedule_from_data_curve(t: np.ndarray, data: np.ndarray, rate: RateFunction) -> Schedule:
    """Schedule whose transmitted-data samples are ``data`` (linear in each cell)."""
    t = np.asarray(t, dtype=float)
    data = np.asarray(data, dtype=float)
    dt = np.diff(t)
    slopes = np.maximum(np.diff(data), 0.0) / dt
    power = np.asarray(rate.inverse(slopes), dtype=float)
    energy = np.concatenate(([0.0], np.cumsum(power * dt)))
    return Schedule(t, power, energy, data.copy())


def energy_of_data_curve(t, data, rate: RateFunction) -> float:
    """Energy needed to follow a transmitted-data curve: ``sum r^-1(slope) dt``."""
    t = np.asarray(t, dtype=float)
    data = np.asarray(data, dtype=float)
    dt = np.diff(t)
    inc = np.diff(data)
    scale = max(1.0, float(np.max(np.abs(data))))
    if np.min(inc, initial=0.0) < -1e-12 * scale:
        raise ValueError("transmitted-data curve must be nondecreasing")
    slopes = np.maximum(inc, 0.0) / dt
    return float(np.sum(np.asarray(rate.inverse(slopes)) * dt))


def causality_tol(curve_samples: np.ndarray) -> float:
    return CAUSALITY_RTOL * max(1.0, float(np.max(np.abs(curve_samples))))


def solve_p2p(
    energy: PiecewiseCurve,
    data: PiecewiseCurve,
    rate: RateFunction,
    T: float | None = None,
    grid: np.ndarray | None = None,
    cells: int = DEFAULT_CELLS,
) -> Schedule:
    """Throughput-maximal, energy-minimal schedule for one link.

    Parameters
    ----------
    energy, data : PiecewiseCurve
        Harvested energy and arrived data, both valid on ``[0, T]``.
    rate : RateFunction
    T : float, optional
        Deadline; defaults to the last grid point when ``grid`` is given.
    grid : ndarray, optional
        Time grid to sweep.  Built from ``cells`` and both curves'
        breakpoints when omitted.
    """
    if grid is None:
        if T is None or not T > 0:
            raise CurveError(f"deadline must be positive, got {T}")
        grid = make_grid(T, cells, np.concatenate((energy.breakpoints, data.breakpoints)))
    t = np.asarray(grid, dtype=float)
    if T is not None and abs(t[-1] - T) > 1e-12 * max(1.0, T):
        raise CurveError("grid does not end at the deadline")
    # left limits: an arrival at x is not usable for transmissions before x
    E = np.asarray(energy.left(t), dtype=float)
    B = np.asarray(data.left(t), dtype=float)
    return _sweep(t, E, B, rate)


def _sweep(t: np.ndarray, E: np.ndarray, B: np.ndarray, rate: RateFunction) -> Schedule:
    n = t.size - 1
    power = np.zeros(n)
    energy = np.zeros(n + 1)
    data = np.zeros(n + 1)
    e = b = 0.0
    for k in range(n):
        span = t[k + 1:] - t[k]
        p_energy = np.min((E[k + 1:] - e) / span)
        q_data = np.min((B[k + 1:] - b) / span)
        if p_energy <= 0.0 or q_data <= 0.0:
            p = 0.0
        else:
            p = min(p_energy, rate.inverse(q_data))
        h = t[k + 1] - t[k]
        q = rate(p) if p > 0.0 else 0.0
        power[k] = p
        e += p * h
        b += q * h
        energy[k + 1] = e
        data[k + 1] = b
    return Schedule(t, power, energy, data)


@dataclass
class FeasibilityReport:
    energy_violation: float
    data_violation: float
    energy_tol: float
    data_tol: float
    energy_used: float
    data_used: float

    @property
    def ok(self) -> bool:
        return self.energy_violation <= self.energy_tol and self.data_violation <= self.data_tol


def check_feasible(s: Schedule, energy: PiecewiseCurve, data: PiecewiseCurve | np.ndarray) -> FeasibilityReport:
    """Largest causality violations of ``s`` against ``energy`` and ``data``.

    ``data`` may be a curve or grid samples of an upstream transmitted-data
    curve (the relay case).
    """
    E = np.asarray(energy.left(s.t), dtype=float)
    B = np.asarray(data.left(s.t), dtype=float) if isinstance(data, PiecewiseCurve) else np.asarray(data, dtype=float)
    if B.shape != s.t.shape:
        raise ValueError("data samples do not match the schedule grid")
    ev = float(np.max(s.energy - E))
    dv = float(np.max(s.data - B))
    return FeasibilityReport(
        max(ev, 0.0), max(dv, 0.0), causality_tol(E), causality_tol(B), s.total_energy, s.throughput
    )

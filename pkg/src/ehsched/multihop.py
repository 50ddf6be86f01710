"""Relay chains: hop-by-hop throughput cascade and backward energy trimming.

The forward pass solves every hop as a point-to-point problem whose arrival
curve is the upstream node's optimal transmitted-data curve.  The backward
pass walks from the second-to-last transmitter to the source, replacing each
node's curve after its last contact with the line through
``(T, delivered)`` that is tangent to it from below.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .curves import (
    DEFAULT_CELLS,
    CurveError,
    PiecewiseCurve,
    make_grid,
    tangent_on_samples,
)
from .p2p import Schedule, _sweep, check_feasible, schedule_from_data_curve
from .rate import RateFunction

__all__ = ["Scenario", "Tangent", "MultiHopSolution", "solve_throughput", "minimize_source_energy", "source_tangent"]


@dataclass(frozen=True, eq=False)
class Scenario:
    """A chain ``node 0 -> node 1 -> ... -> receiver``.

    ``energy[i]`` and ``rates[i]`` belong to transmitting node ``i`` and its
    outgoing hop; ``arrival`` is the data arriving at the source.
    """

    energy: tuple[PiecewiseCurve, ...]
    arrival: PiecewiseCurve
    rates: tuple[RateFunction, ...]
    deadline: float
    names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "energy", tuple(self.energy))
        object.__setattr__(self, "rates", tuple(self.rates))
        if len(self.energy) < 1:
            raise ValueError("scenario needs at least one hop")
        if len(self.rates) != len(self.energy):
            raise ValueError(f"{len(self.energy)} transmitting nodes but {len(self.rates)} rate laws")
        if not self.deadline > 0:
            raise ValueError(f"deadline must be positive, got {self.deadline}")
        for c in (*self.energy, self.arrival):
            if c.t_end < self.deadline * (1 - 1e-12):
                raise ValueError(f"curve domain [0, {c.t_end:g}] does not cover the deadline {self.deadline:g}")
        if not self.names:
            names = ["source"] + [f"relay{i}" for i in range(1, self.hops)] + ["receiver"]
            if self.hops == 2:
                names[1] = "relay"
            object.__setattr__(self, "names", tuple(names))

    @property
    def hops(self) -> int:
        return len(self.energy)

    @property
    def horizon(self) -> float:
        return min(c.t_end for c in (*self.energy, self.arrival))

    def breakpoints(self) -> np.ndarray:
        return np.concatenate([c.breakpoints for c in (*self.energy, self.arrival)])

    def grid(self, cells: int = DEFAULT_CELLS, T: float | None = None) -> np.ndarray:
        return make_grid(self.deadline if T is None else T, cells, self.breakpoints())

    def with_deadline(self, T: float) -> Scenario:
        return replace(self, deadline=float(T))

    def with_curves(self, energy: Sequence[PiecewiseCurve], arrival: PiecewiseCurve) -> Scenario:
        return replace(self, energy=tuple(energy), arrival=arrival)


@dataclass(frozen=True)
class Tangent:
    slope: float
    intercept: float
    T1: float


@dataclass(frozen=True, eq=False)
class MultiHopSolution:
    """Per-node schedules and the end-to-end throughput.

    ``schedules`` are the returned (energy-trimmed when requested) policies;
    ``unminimized`` keeps the forward-pass curves.  ``tangents[i]`` is set for
    every node whose tail was replaced by a tangent line.
    """

    schedules: tuple[Schedule, ...]
    unminimized: tuple[Schedule, ...]
    tangents: tuple[Tangent | None, ...] = field(default=())

    @property
    def throughput(self) -> float:
        return self.schedules[-1].throughput

    @property
    def energies(self) -> list[float]:
        return [s.total_energy for s in self.schedules]

    @property
    def t(self) -> np.ndarray:
        return self.schedules[0].t


def source_tangent(upstream_opt: Schedule, delivered: float) -> Tangent:
    """Tangent from below to ``upstream_opt``'s data curve through ``(T, delivered)``."""
    tol = 1e-9 * max(1.0, upstream_opt.throughput)
    if delivered > upstream_opt.throughput + tol:
        raise CurveError(
            f"requested {delivered:g} bits exceeds the {upstream_opt.throughput:g} bits the node can send"
        )
    slope, intercept, T1 = tangent_on_samples(upstream_opt.t, upstream_opt.data, min(delivered, upstream_opt.throughput))
    return Tangent(slope, intercept, T1)


def minimize_source_energy(upstream_opt: Schedule, delivered: float, rate: RateFunction) -> Schedule:
    """Least-energy curve that still delivers ``delivered`` bits by ``T``.

    Follows ``upstream_opt`` up to the last tangency point ``T1`` and the
    tangent line afterwards.
    """
    tan = source_tangent(upstream_opt, delivered)
    if tan.T1 >= upstream_opt.T:
        return upstream_opt
    t = upstream_opt.t
    line = tan.intercept + tan.slope * t
    trimmed = np.where(t <= tan.T1, upstream_opt.data, line)
    trimmed[-1] = min(delivered, upstream_opt.throughput)
    return schedule_from_data_curve(t, trimmed, rate)


def solve_throughput(
    sc: Scenario,
    cells: int = DEFAULT_CELLS,
    minimize_energy: bool = True,
    grid: np.ndarray | None = None,
) -> MultiHopSolution:
    """Maximum end-to-end throughput by ``sc.deadline``.

    With ``minimize_energy`` every node except the last is trimmed, in
    reverse order, to the least energy that keeps its downstream curve
    feasible.
    """
    t = sc.grid(cells) if grid is None else np.asarray(grid, dtype=float)
    upstream = np.asarray(sc.arrival.left(t), dtype=float)
    forward: list[Schedule] = []
    for E, r in zip(sc.energy, sc.rates):
        s = _sweep(t, np.asarray(E.left(t), dtype=float), upstream, r)
        forward.append(s)
        upstream = s.data
    if not minimize_energy or sc.hops == 1:
        return MultiHopSolution(tuple(forward), tuple(forward), (None,) * sc.hops)

    trimmed = list(forward)
    tangents: list[Tangent | None] = [None] * sc.hops
    for i in range(sc.hops - 2, -1, -1):
        target = trimmed[i + 1].throughput
        tangents[i] = source_tangent(forward[i], target)
        trimmed[i] = minimize_source_energy(forward[i], target, sc.rates[i])
        # downstream curve must stay feasible under the trimmed arrivals
        rep = check_feasible(trimmed[i + 1], sc.energy[i + 1], trimmed[i].data)
        if not rep.ok:
            raise CurveError(
                f"energy trimming at node {i} broke downstream data causality by {rep.data_violation:g} bits"
            )
    return MultiHopSolution(tuple(trimmed), tuple(forward), tuple(tangents))

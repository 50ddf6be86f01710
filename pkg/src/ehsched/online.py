"""Causal (online) policies for relay chains.

Every node re-plans at each grid step as if it would keep its current power
until the deadline: it spends the remaining energy, or sends the remaining
data, evenly over ``T - t + epsilon``, whichever is tighter.  In the
``proposed`` variant a relay additionally never transmits slower than the
data currently streaming in from its upstream node.  The ``benchmark``
variant applies the plain point-to-point rule at every node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .curves import DEFAULT_CELLS, PiecewiseCurve
from .multihop import Scenario
from .p2p import Schedule
from .rate import RateFunction

__all__ = [
    "LookaheadError",
    "CausalView",
    "OnlineState",
    "OnlineResult",
    "source_power",
    "relay_power",
    "relay_branch",
    "run_online",
]

Variant = Literal["proposed", "benchmark"]


class LookaheadError(RuntimeError):
    """A policy tried to read a curve beyond the current time."""


class CausalView:
    """Read-only view of a curve that refuses to look past ``now``."""

    def __init__(self, curve: PiecewiseCurve):
        self._curve = curve
        self.now = 0.0

    def advance(self, t: float) -> None:
        if t < self.now:
            raise ValueError("time cannot move backwards")
        self.now = t

    def __call__(self, t: float) -> float:
        if t > self.now + 1e-12 * max(1.0, self.now):
            raise LookaheadError(f"read at t={t:g} while now={self.now:g}")
        return float(self._curve(t))


@dataclass
class OnlineState:
    """What a two-node chain knows at time ``t``."""

    t: float
    T: float
    epsilon: float
    b_rem_s: float
    e_rem_s: float
    b_rem_r: float = 0.0
    e_rem_r: float = 0.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def horizon(self) -> float:
        return self.T - self.t + self.epsilon


def _source_power(b_rem: float, e_rem: float, horizon: float, rate: RateFunction) -> float:
    if b_rem <= 0.0 or e_rem <= 0.0:
        return 0.0
    return min(rate.inverse(b_rem / horizon), e_rem / horizon)


def _relay_terms(b_rem, e_rem, horizon, p_up, r_up, r_own, variant):
    data_branch = r_own.inverse(b_rem / horizon) if b_rem > 0.0 else 0.0
    arrival_branch = r_own.inverse(r_up(p_up)) if (variant == "proposed" and p_up > 0.0) else 0.0
    energy_branch = max(e_rem, 0.0) / horizon
    return data_branch, arrival_branch, energy_branch


def source_power(st: OnlineState, r_sr: RateFunction) -> float:
    """``min(r^-1(B_rem / h), E_rem / h)`` with ``h = T - t + epsilon``."""
    return _source_power(st.b_rem_s, st.e_rem_s, st.horizon, r_sr)


def relay_power(
    st: OnlineState, p_src: float, r_sr: RateFunction, r_rd: RateFunction, variant: Variant = "proposed"
) -> float:
    """Relay power; the proposed rule also keeps pace with the incoming stream."""
    data_b, arr_b, en_b = _relay_terms(st.b_rem_r, st.e_rem_r, st.horizon, p_src, r_sr, r_rd, variant)
    return min(max(data_b, arr_b), en_b)


def relay_branch(st: OnlineState, p_src: float, r_sr: RateFunction, r_rd: RateFunction,
                 variant: Variant = "proposed") -> str:
    """Which limit sets the relay power: ``data``, ``arrival`` or ``energy``."""
    data_b, arr_b, en_b = _relay_terms(st.b_rem_r, st.e_rem_r, st.horizon, p_src, r_sr, r_rd, variant)
    if en_b < max(data_b, arr_b):
        return "energy"
    return "arrival" if arr_b > data_b else "data"


@dataclass(frozen=True, eq=False)
class OnlineResult:
    schedules: tuple[Schedule, ...]
    variant: str
    epsilon: float
    switch_times: tuple[tuple[float, ...], ...] = field(default=())
    branches: tuple[tuple[str, ...], ...] = field(default=())

    @property
    def delivered(self) -> float:
        return self.schedules[-1].throughput


def run_online(
    sc: Scenario,
    epsilon: float | None = None,
    variant: Variant = "proposed",
    cells: int = DEFAULT_CELLS,
    grid: np.ndarray | None = None,
) -> OnlineResult:
    """Simulate the causal policy at every node of ``sc`` on a time grid.

    Node ``i`` at step ``t_k`` only reads its curves at ``t_k`` through a
    :class:`CausalView`; upstream powers are those chosen at the same step.
    """
    if variant not in ("proposed", "benchmark"):
        raise ValueError(f"unknown variant {variant!r}")
    T = sc.deadline
    eps = 1e-5 * T if epsilon is None else float(epsilon)
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    t = sc.grid(cells) if grid is None else np.asarray(grid, dtype=float)
    n, hops = t.size - 1, sc.hops

    energy_views = [CausalView(c) for c in sc.energy]
    arrival_view = CausalView(sc.arrival)
    power = np.zeros((hops, n))
    used_e = np.zeros((hops, n + 1))
    sent_b = np.zeros((hops, n + 1))
    branch_log: list[list[str]] = [[] for _ in range(hops)]

    for k in range(n):
        tk = t[k]
        for v in (*energy_views, arrival_view):
            v.advance(tk)
        horizon = T - tk + eps
        h = t[k + 1] - tk
        for i in range(hops):
            e_rem = energy_views[i](tk) - used_e[i, k]
            if i == 0:
                p = _source_power(arrival_view(tk) - sent_b[0, k], e_rem, horizon, sc.rates[0])
                branch_log[0].append("source")
            else:
                b_rem = sent_b[i - 1, k] - sent_b[i, k]
                terms = _relay_terms(b_rem, e_rem, horizon, power[i - 1, k], sc.rates[i - 1], sc.rates[i], variant)
                data_b, arr_b, en_b = terms
                p = min(max(data_b, arr_b), en_b)
                if en_b < max(data_b, arr_b):
                    branch_log[i].append("energy")
                else:
                    branch_log[i].append("arrival" if arr_b > data_b else "data")
            p = max(float(p), 0.0)
            power[i, k] = p
            used_e[i, k + 1] = used_e[i, k] + p * h
            sent_b[i, k + 1] = sent_b[i, k] + (float(sc.rates[i](p)) if p > 0 else 0.0) * h

    schedules = tuple(Schedule(t, power[i], used_e[i], sent_b[i]) for i in range(hops))
    switches = []
    for i in range(hops):
        labels = branch_log[i]
        switches.append(tuple(float(t[k]) for k in range(1, n) if labels[k] != labels[k - 1]))
    return OnlineResult(schedules, variant, eps, tuple(switches), tuple(tuple(b) for b in branch_log))

"""Exhaustive verifier for tiny slotted instances.

Powers are restricted to a finite grid and held constant over each slot;
every combination is enumerated and checked against cumulative energy and
data causality.  This makes no structural assumption about optimal
policies, so it can certify the grid solvers on small cases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import PiecewiseCurve, Step
from .multihop import Scenario
from .rate import RateFunction

__all__ = [
    "OracleTooLarge",
    "SlottedInstance",
    "OracleResult",
    "brute_force_p2p",
    "brute_force_two_hop",
    "slot_from_scenario",
    "scenario_from_slotted",
    "MAX_SLOTS",
    "MAX_LEVELS",
]

MAX_SLOTS = 6
MAX_LEVELS = 12
MAX_PAIRS = 5 * 10**8
_TOL = 1e-9


class OracleTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SlottedInstance:
    """``N`` slots of length ``slot``.

    ``energy[i, k]`` and ``data[k]`` are the cumulative amounts available to
    node ``i`` (resp. the source) from the start of slot ``k``.
    """

    slot: float
    energy: np.ndarray
    data: np.ndarray
    powers: np.ndarray

    def __post_init__(self):
        energy = np.atleast_2d(np.asarray(self.energy, dtype=float))
        data = np.asarray(self.data, dtype=float)
        powers = np.unique(np.asarray(self.powers, dtype=float))
        object.__setattr__(self, "energy", energy)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "powers", powers)
        if not self.slot > 0:
            raise ValueError("slot length must be positive")
        if energy.shape[1] != data.size:
            raise ValueError("energy and data availability must cover the same slots")
        if self.n_slots > MAX_SLOTS or powers.size > MAX_LEVELS:
            raise OracleTooLarge(
                f"exhaustive mode allows at most {MAX_SLOTS} slots and {MAX_LEVELS} power levels "
                f"(got {self.n_slots} and {powers.size})"
            )
        if np.any(np.diff(energy, axis=1) < 0) or np.any(np.diff(data) < 0):
            raise ValueError("availabilities must be cumulative (nondecreasing)")

    @property
    def n_slots(self) -> int:
        return int(self.data.size)

    @property
    def horizon(self) -> float:
        return self.slot * self.n_slots


@dataclass(frozen=True, eq=False)
class OracleResult:
    delivered: float
    powers: tuple[np.ndarray, ...]
    min_source_energy: float


def _all_vectors(levels: np.ndarray, n: int) -> np.ndarray:
    mesh = np.meshgrid(*([levels] * n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _profiles(vecs: np.ndarray, slot: float, rate: RateFunction):
    energy = np.cumsum(vecs * slot, axis=1)
    data = np.cumsum(np.asarray(rate(vecs)) * slot, axis=1)
    return energy, data


def _tol(x: np.ndarray) -> float:
    return _TOL * max(1.0, float(np.max(np.abs(x)))) if x.size else _TOL


def brute_force_p2p(inst: SlottedInstance, rate: RateFunction, node: int = 0) -> OracleResult:
    """Best single-link throughput and the least energy achieving it."""
    vecs = _all_vectors(inst.powers, inst.n_slots)
    e, b = _profiles(vecs, inst.slot, rate)
    ok = np.all(e <= inst.energy[node] + _tol(inst.energy), axis=1) & np.all(b <= inst.data + _tol(inst.data), axis=1)
    vecs, e, b = vecs[ok], e[ok], b[ok]
    total = b[:, -1]
    best = float(total.max())
    tie = total >= best - _tol(total)
    j = np.flatnonzero(tie)[np.argmin(e[tie, -1])]
    return OracleResult(best, (vecs[j],), float(e[j, -1]))


def brute_force_two_hop(inst: SlottedInstance, r_sr: RateFunction, r_rd: RateFunction) -> OracleResult:
    """Exhaustive two-hop optimum.

    Maximises the relay's delivered bits under energy causality at both
    nodes and data causality at source and relay; among maximisers returns
    the least source energy.
    """
    if inst.energy.shape[0] < 2:
        raise ValueError("two-hop oracle needs energy availability for two nodes")
    vecs = _all_vectors(inst.powers, inst.n_slots)

    se, sb = _profiles(vecs, inst.slot, r_sr)
    s_ok = np.all(se <= inst.energy[0] + _tol(inst.energy[0]), axis=1) & np.all(sb <= inst.data + _tol(inst.data), axis=1)
    s_vecs, s_energy, s_data = vecs[s_ok], se[s_ok, -1], sb[s_ok]

    re, rb = _profiles(vecs, inst.slot, r_rd)
    r_ok = np.all(re <= inst.energy[1] + _tol(inst.energy[1]), axis=1)
    r_vecs, r_data = vecs[r_ok], rb[r_ok]
    # identical data profiles are interchangeable; keep one of each
    _, first = np.unique(np.round(r_data, 12), axis=0, return_index=True)
    r_vecs, r_data = r_vecs[first], r_data[first]
    order = np.argsort(-r_data[:, -1], kind="stable")
    r_vecs, r_data = r_vecs[order], r_data[order]

    if s_vecs.shape[0] * r_vecs.shape[0] > MAX_PAIRS:
        raise OracleTooLarge(f"{s_vecs.shape[0]} x {r_vecs.shape[0]} policy pairs exceed the enumeration budget")

    tol = _tol(s_data)
    best_total = np.zeros(s_vecs.shape[0])
    best_relay = np.zeros(s_vecs.shape[0], dtype=int)
    chunk = max(1, 2_000_000 // max(1, r_vecs.shape[0] * inst.n_slots))
    for lo in range(0, s_vecs.shape[0], chunk):
        a = s_data[lo:lo + chunk]
        fits = np.all(r_data[None, :, :] <= a[:, None, :] + tol, axis=2)
        # relay rows are sorted by total, so the first fit is the best
        j = np.argmax(fits, axis=1)
        best_relay[lo:lo + chunk] = j
        best_total[lo:lo + chunk] = np.where(fits[np.arange(a.shape[0]), j], r_data[j, -1], 0.0)

    top = float(best_total.max())
    tie = np.flatnonzero(best_total >= top - tol)
    i = tie[np.argmin(s_energy[tie])]
    relay = r_vecs[best_relay[i]] if best_total[i] > 0 else np.zeros(inst.n_slots)
    return OracleResult(top, (s_vecs[i], relay), float(s_energy[i]))


def slot_from_scenario(sc: Scenario, n_slots: int, levels: int = 9, powers=None) -> SlottedInstance:
    """Sample ``sc`` at slot starts (availability is what has arrived by then).

    The default power grid is ``levels`` equally spaced values from zero to
    the largest power any node could sustain over one slot.
    """
    if n_slots > MAX_SLOTS:
        raise OracleTooLarge(f"at most {MAX_SLOTS} slots")
    slot = sc.deadline / n_slots
    starts = np.arange(n_slots) * slot
    energy = np.array([c.sample(starts) for c in sc.energy])
    data = sc.arrival.sample(starts)
    if powers is None:
        p_max = max(float(energy[:, -1].max()) / slot, 1e-12)
        powers = np.linspace(0.0, p_max, levels)
    return SlottedInstance(slot, energy, data, powers)


def _staircase(avail: np.ndarray, slot: float) -> PiecewiseCurve:
    inc = np.diff(avail, prepend=0.0)
    terms = [Step(float(a), float(k * slot)) for k, a in enumerate(inc) if a != 0.0 or k == 0]
    return PiecewiseCurve(terms, slot * avail.size)


def scenario_from_slotted(inst: SlottedInstance, rates) -> Scenario:
    """Step-curve scenario equivalent to ``inst`` for the grid solvers."""
    rates = tuple(rates)
    energy = [_staircase(inst.energy[i], inst.slot) for i in range(len(rates))]
    return Scenario(energy, _staircase(inst.data, inst.slot), rates, inst.horizon)

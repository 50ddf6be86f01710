"""Throughput-optimal transmission scheduling for energy-harvesting relay chains.

Energy harvesting and data arrivals are general cumulative curves.  The
package provides the offline point-to-point and multi-hop solvers, source
energy minimisation, minimum completion time, causal online policies, an
exhaustive verifier for tiny slotted instances and a command-line runner.
"""

from .curves import (
    CurveError,
    Exp,
    PiecewiseCurve,
    Poly,
    Pwl,
    Step,
    discretize,
    make_grid,
)
from .deadline import (
    DeadlineQuery,
    UnreachableTarget,
    min_completion_time,
    throughput_at,
)
from .multihop import (
    MultiHopSolution,
    Scenario,
    minimize_source_energy,
    solve_throughput,
)
from .online import OnlineResult, run_online
from .oracle import SlottedInstance, brute_force_p2p, brute_force_two_hop
from .p2p import Schedule, check_feasible, energy_of_data_curve, solve_p2p
from .rate import RateFunction, check_rate_law, custom, shannon

__all__ = [
    "CurveError",
    "DeadlineQuery",
    "Exp",
    "MultiHopSolution",
    "OnlineResult",
    "PiecewiseCurve",
    "Poly",
    "Pwl",
    "RateFunction",
    "Scenario",
    "Schedule",
    "SlottedInstance",
    "Step",
    "UnreachableTarget",
    "brute_force_p2p",
    "brute_force_two_hop",
    "check_feasible",
    "check_rate_law",
    "custom",
    "discretize",
    "energy_of_data_curve",
    "make_grid",
    "min_completion_time",
    "minimize_source_energy",
    "run_online",
    "shannon",
    "solve_p2p",
    "solve_throughput",
    "throughput_at",
]

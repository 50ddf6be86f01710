"""Built-in two-hop scenarios, all with ``log2(1 + p)`` on both hops."""

from __future__ import annotations

from .curves import Exp, PiecewiseCurve, Poly
from .multihop import Scenario
from .rate import shannon
from .scenario_file import RunConfig

__all__ = ["PRESETS", "ex1", "ex2", "ex3", "get"]

_NAMES = ("source", "relay", "receiver")


def ex1(horizon: float = 0.6) -> RunConfig:
    """Relay-energy bottleneck with continuous arrivals; the discretisation study."""
    T = 0.6
    r = shannon()
    sc = Scenario(
        (PiecewiseCurve([Poly(100.0, 2.0, 0.0, 1.0)], horizon), PiecewiseCurve([Exp(0.5, 7.0, 1.0, -0.5)], horizon)),
        PiecewiseCurve([Poly(10.0, 2.0, 0.0, 0.1)], horizon),
        (r, r),
        T,
        _NAMES,
    )
    return RunConfig(sc)


def ex2(horizon: float = 2.5) -> RunConfig:
    """Source energy trimming: the relay can forward less than the source sends."""
    T = 1.9
    r = shannon()
    sc = Scenario(
        (PiecewiseCurve([Poly(3.5, 5.0, 1.0, 3.5)], horizon), PiecewiseCurve([Poly(0.45, 4.0)], horizon)),
        PiecewiseCurve([Poly(2.0, 5.0, 1.0, 2.0)], horizon),
        (r, r),
        T,
        _NAMES,
    )
    return RunConfig(sc, target_bits=2.8, t_max=horizon)


def ex3(horizon: float = 2.0) -> RunConfig:
    """Online comparison scenario."""
    T = 2.0
    r = shannon()
    sc = Scenario(
        (PiecewiseCurve([Poly(80.0, 3.0, 1.0, 80.0)], horizon), PiecewiseCurve([Exp(1.0, 1.0, 3.0)], horizon)),
        PiecewiseCurve([Poly(3.5, 3.0, 1.0, 3.5)], horizon),
        (r, r),
        T,
        _NAMES,
    )
    return RunConfig(sc, epsilon=1e-5)


PRESETS = {"ex1": ex1, "ex2": ex2, "ex3": ex3}


def get(name: str) -> RunConfig:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown built-in scenario {name!r} (choose from {', '.join(PRESETS)})") from None

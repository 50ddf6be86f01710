"""Rate-versus-power laws ``r(p)`` with their inverses."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = ["RateFunction", "RateLawReport", "shannon", "custom", "from_callable", "check_rate_law", "rate_from_dict"]

_LN2 = np.log(2.0)
BISECTION_STEPS = 60


@dataclass(frozen=True, eq=False)
class RateFunction:
    """A concave increasing rate law.

    ``inverse`` falls back to bracketed bisection when no analytic inverse
    is supplied; monotonicity makes that always converge.
    """

    name: str
    forward: Callable[[np.ndarray], np.ndarray]
    analytic_inverse: Callable[[np.ndarray], np.ndarray] | None = None
    params: dict = field(default_factory=dict)

    def __call__(self, p):
        out = self.forward(np.asarray(p, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def inverse(self, x):
        arr = np.asarray(x, dtype=float)
        if self.analytic_inverse is not None:
            out = self.analytic_inverse(arr)
        else:
            out = _bisect_inverse(self.forward, arr)
        return float(out) if np.ndim(out) == 0 else out

    def to_dict(self) -> dict:
        return {"name": self.name, **self.params}


def _bisect_inverse(f: Callable, x: np.ndarray) -> np.ndarray:
    shape = np.shape(x)
    x = np.atleast_1d(x).astype(float)
    out = np.zeros_like(x)
    pending = x > 0
    if not np.any(pending):
        return out.reshape(shape)
    target = x[pending]
    hi = np.ones_like(target)
    # bracket [hi/2, hi] around the root, growing or shrinking geometrically
    for _ in range(2100):
        low = f(hi) < target
        if not np.any(low):
            break
        hi[low] *= 2.0
    for _ in range(2100):
        big = (f(hi / 2.0) >= target) & (hi > 1e-300)
        if not np.any(big):
            break
        hi[big] /= 2.0
    lo = hi / 2.0
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        below = f(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    out[pending] = 0.5 * (lo + hi)
    return out.reshape(shape)


def shannon() -> RateFunction:
    """``log2(1 + p)`` with inverse ``2**x - 1``."""
    return RateFunction(
        "shannon",
        lambda p: np.log1p(p) / _LN2,
        lambda x: np.expm1(np.minimum(x, 1000.0) * _LN2),
    )


def custom(points) -> RateFunction:
    """Piecewise-linear law through ``[[p, r], ...]`` starting at ``(0, 0)``.

    Beyond the last point the final slope is continued, so the law stays
    unbounded when that slope is positive.  Concavity is the caller's job;
    :func:`check_rate_law` reports it.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("custom rate law needs at least two [p, r] points")
    if pts[0, 0] != 0.0 or pts[0, 1] != 0.0:
        pts = np.vstack([[0.0, 0.0], pts])
    if np.any(np.diff(pts[:, 0]) <= 0):
        raise ValueError("custom rate law powers must be strictly increasing")
    ps, rs = pts[:, 0], pts[:, 1]
    tail = (rs[-1] - rs[-2]) / (ps[-1] - ps[-2])

    def forward(p):
        p = np.asarray(p, dtype=float)
        return np.where(p <= ps[-1], np.interp(p, ps, rs), rs[-1] + tail * (p - ps[-1]))

    return RateFunction("custom", forward, params={"points": pts.tolist()})


def from_callable(fn: Callable, name: str = "callable", inverse: Callable | None = None) -> RateFunction:
    return RateFunction(name, fn, inverse)


def rate_from_dict(d: dict) -> RateFunction:
    name = d.get("name")
    if name == "shannon":
        return shannon()
    if name == "custom":
        if "points" not in d:
            raise ValueError("custom rate law needs 'points'")
        return custom(d["points"])
    raise ValueError(f"unknown rate law {name!r} (expected shannon or custom)")


@dataclass
class RateLawReport:
    zero_at_origin: bool
    increasing: bool
    concave: bool
    inverse_consistent: bool
    unbounded: bool
    sublinear: bool

    @property
    def valid(self) -> bool:
        """Every modelling assumption except sublinear growth."""
        return self.zero_at_origin and self.increasing and self.concave and self.inverse_consistent and self.unbounded

    @property
    def all_passed(self) -> bool:
        return self.valid and self.sublinear


def check_rate_law(rf: RateFunction, p_max: float = 1e6, tol: float = 1e-10) -> RateLawReport:
    """Sample-based check of the assumptions the solvers rely on."""
    p = np.concatenate(([0.0], np.geomspace(1e-6, p_max, 400)))
    r = np.asarray(rf(p), dtype=float)
    scale = max(1.0, float(np.max(np.abs(r))))

    zero = abs(float(r[0])) <= tol
    increasing = bool(np.all(np.diff(r) > 0))

    concave = True
    grid = np.linspace(0.0, min(p_max, 100.0), 41)
    p1, p2 = np.meshgrid(grid, grid)
    for lam in (0.25, 0.5, 0.75):
        mix = np.asarray(rf(lam * p1 + (1 - lam) * p2))
        chord = lam * np.asarray(rf(p1)) + (1 - lam) * np.asarray(rf(p2))
        if np.min(mix - chord) < -1e-9 * scale:
            concave = False

    x = r[1:]
    back = np.asarray(rf(np.asarray(rf.inverse(x))))
    p_back = np.asarray(rf.inverse(x))
    inverse_ok = bool(
        np.all(np.abs(back - x) <= tol * np.maximum(np.abs(x), 1e-300))
        and np.all(np.abs(p_back - p[1:]) <= tol * p[1:])
    )

    far = np.geomspace(1.0, 1e12, 25)
    rf_far = np.asarray(rf(far))
    unbounded = bool(np.all(np.diff(rf_far) > 0) and rf_far[-1] > 10.0 * rf_far[0])
    per_power = rf_far / far
    sublinear = bool(np.all(np.diff(per_power) <= 1e-12) and per_power[-1] < 1e-3 * per_power[0])

    return RateLawReport(zero, increasing, concave, inverse_ok, unbounded, sublinear)

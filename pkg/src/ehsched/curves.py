"""Cumulative piecewise curves: harvested energy, arrived data, transmitted data.

A curve is a sum of elementary terms evaluated on a closed domain ``[0, t_end]``.
Jumps (from ``step`` terms) are right-continuous: an amount arriving at ``t``
is usable from ``t`` on.  Every solver in this package works on a finite time
grid, so the helpers here come in two flavours: an analytic one acting on a
:class:`PiecewiseCurve` and an array one acting on grid samples.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

__all__ = [
    "CurveError",
    "Poly",
    "Exp",
    "Step",
    "Pwl",
    "PiecewiseCurve",
    "term_from_dict",
    "make_grid",
    "inf_ratio",
    "tangent_from_point",
    "tangent_on_samples",
    "is_convex_samples",
    "discretize",
    "DEFAULT_CELLS",
]

DEFAULT_CELLS = 4000
_DOMAIN_SLACK = 1e-12


class CurveError(ValueError):
    """Invalid curve definition or out-of-domain evaluation."""


# ---------------------------------------------------------------------------
# elementary terms
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Poly:
    """``c * (t - shift)**k + offset``."""

    c: float
    k: float = 1.0
    shift: float = 0.0
    offset: float = 0.0

    def value(self, t: np.ndarray) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return self.c * np.power(t - self.shift, self.k) + self.offset

    left = value
    breakpoints = ()

    def to_dict(self) -> dict:
        return {"kind": "poly", "c": self.c, "k": self.k, "shift": self.shift, "offset": self.offset}


@dataclass(frozen=True)
class Exp:
    """``c * exp(a * t**k) + offset``."""

    c: float
    a: float
    k: float = 1.0
    offset: float = 0.0

    def value(self, t: np.ndarray) -> np.ndarray:
        with np.errstate(invalid="ignore", over="ignore"):
            return self.c * np.exp(self.a * np.power(t, self.k)) + self.offset

    left = value
    breakpoints = ()

    def to_dict(self) -> dict:
        return {"kind": "exp", "c": self.c, "a": self.a, "k": self.k, "offset": self.offset}


@dataclass(frozen=True)
class Step:
    """``amount`` becomes available at time ``at`` (right-continuous)."""

    amount: float
    at: float

    def value(self, t: np.ndarray) -> np.ndarray:
        return np.where(t >= self.at, self.amount, 0.0)

    def left(self, t: np.ndarray) -> np.ndarray:
        return np.where(t > self.at, self.amount, 0.0)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (self.at,)

    def to_dict(self) -> dict:
        return {"kind": "step", "amount": self.amount, "at": self.at}


@dataclass(frozen=True, eq=False)
class Pwl:
    """Linear interpolation through ``(times, values)``; flat outside the knots."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 1:
            raise CurveError("pwl term needs matching 1-d time and value lists")
        if np.any(np.diff(times) <= 0):
            raise CurveError("pwl knot times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def value(self, t: np.ndarray) -> np.ndarray:
        return np.interp(t, self.times, self.values)

    left = value

    @property
    def breakpoints(self) -> tuple[float, ...]:
        # knots are kinks; large sample sets are handled by the grid instead
        if self.times.size > 64:
            return ()
        return tuple(self.times.tolist())

    def to_dict(self) -> dict:
        return {"kind": "pwl", "points": [[float(a), float(b)] for a, b in zip(self.times, self.values)]}


Term = Poly | Exp | Step | Pwl


def term_from_dict(d: dict) -> Term:
    """Build a term from its scenario-file record."""
    d = dict(d)
    kind = d.pop("kind", None)
    try:
        if kind == "poly":
            return Poly(**{k: float(v) for k, v in d.items()})
        if kind == "exp":
            return Exp(**{k: float(v) for k, v in d.items()})
        if kind == "step":
            return Step(**{k: float(v) for k, v in d.items()})
        if kind == "pwl":
            pts = np.asarray(d.pop("points"), dtype=float)
            if d:
                raise TypeError(f"unexpected fields {sorted(d)}")
            if pts.ndim != 2 or pts.shape[1] != 2:
                raise CurveError("pwl points must be a list of [t, value] pairs")
            return Pwl(pts[:, 0], pts[:, 1])
    except TypeError as exc:
        raise CurveError(f"bad fields for {kind!r} term: {exc}") from None
    except KeyError as exc:
        raise CurveError(f"missing field {exc} for {kind!r} term") from None
    raise CurveError(f"unknown term kind {kind!r} (expected poly, exp, step or pwl)")


# ---------------------------------------------------------------------------
# curve
# ---------------------------------------------------------------------------
class PiecewiseCurve:
    """Nondecreasing cumulative curve on ``[0, t_end]``.

    Parameters
    ----------
    terms : sequence of terms
        Elementary terms summed pointwise.
    t_end : float
        End of the domain.  Evaluating past it raises :class:`CurveError`.
    validate : bool
        Check monotonicity and ``value(0) >= 0`` on a dense grid.
    """

    def __init__(self, terms: Iterable[Term], t_end: float, validate: bool = True):
        self.terms = tuple(terms)
        self.t_end = float(t_end)
        if not self.t_end > 0:
            raise CurveError(f"curve domain end must be positive, got {t_end}")
        bps = {b for term in self.terms for b in term.breakpoints if 0.0 <= b <= self.t_end}
        self.breakpoints = np.array(sorted(bps), dtype=float)
        if validate:
            self._validate()

    # constructors -------------------------------------------------------
    @classmethod
    def from_samples(cls, times, values, validate: bool = False) -> PiecewiseCurve:
        times = np.asarray(times, dtype=float)
        return cls([Pwl(times, values)], times[-1], validate=validate)

    @classmethod
    def constant(cls, value: float, t_end: float) -> PiecewiseCurve:
        return cls([Poly(0.0, 0.0, 0.0, float(value))], t_end)

    @classmethod
    def buffered(cls, amount: float, t_end: float) -> PiecewiseCurve:
        """All ``amount`` present at ``t = 0``."""
        return cls([Step(float(amount), 0.0)], t_end)

    @classmethod
    def from_dicts(cls, records: Sequence[dict], t_end: float) -> PiecewiseCurve:
        return cls([term_from_dict(r) for r in records], t_end)

    def to_dicts(self) -> list[dict]:
        return [term.to_dict() for term in self.terms]

    # evaluation ---------------------------------------------------------
    def _check_domain(self, t: np.ndarray) -> None:
        if t.size and (np.min(t) < -_DOMAIN_SLACK or np.max(t) > self.t_end * (1 + _DOMAIN_SLACK) + _DOMAIN_SLACK):
            raise CurveError(f"time outside curve domain [0, {self.t_end}]")

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        self._check_domain(arr)
        out = np.zeros_like(arr)
        for term in self.terms:
            out = out + term.value(arr)
        return float(out) if out.ndim == 0 else out

    def left(self, t):
        """Left limit; equals the value except at upward jumps."""
        arr = np.asarray(t, dtype=float)
        self._check_domain(arr)
        out = np.zeros_like(arr)
        for term in self.terms:
            out = out + term.left(arr)
        # the left limit at the origin is taken as the value there
        out = np.where(arr <= 0.0, self(np.maximum(arr, 0.0)), out)
        return float(out) if out.ndim == 0 else out

    @property
    def jumps(self) -> dict[float, float]:
        out: dict[float, float] = {}
        for term in self.terms:
            if isinstance(term, Step) and 0.0 <= term.at <= self.t_end:
                out[term.at] = out.get(term.at, 0.0) + term.amount
        return out

    def scale(self, t_end: float | None = None) -> float:
        """Magnitude used for relative tolerances (never below 1)."""
        end = self.t_end if t_end is None else t_end
        return max(1.0, abs(self(end)), abs(self(0.0)))

    def sample(self, grid: np.ndarray) -> np.ndarray:
        return np.asarray(self(grid), dtype=float)

    def _validate(self, cells: int = DEFAULT_CELLS) -> None:
        grid = make_grid(self.t_end, cells, self.breakpoints)
        vals = self.sample(grid)
        lefts = np.asarray(self.left(grid))
        if not np.all(np.isfinite(vals)):
            raise CurveError("curve is not finite on its domain")
        tol = 1e-9 * max(1.0, float(np.max(np.abs(vals))))
        if vals[0] < -tol:
            raise CurveError(f"curve starts below zero (value(0) = {vals[0]:g})")
        drops = np.diff(vals)
        if np.min(drops, initial=0.0) < -tol or np.any(lefts - vals > tol):
            i = int(np.argmin(drops)) if drops.size else 0
            raise CurveError(f"curve is decreasing near t = {grid[i]:g}")

    def __repr__(self) -> str:
        return f"PiecewiseCurve({len(self.terms)} terms, t_end={self.t_end:g})"


# ---------------------------------------------------------------------------
# grids and geometric primitives
# ---------------------------------------------------------------------------
def make_grid(T: float, cells: int = DEFAULT_CELLS, breakpoints: Iterable[float] = ()) -> np.ndarray:
    """Uniform grid on ``[0, T]`` with ``cells`` cells, unioned with breakpoints."""
    if not T > 0:
        raise CurveError(f"grid end must be positive, got {T}")
    if cells < 1:
        raise CurveError("need at least one grid cell")
    base = np.linspace(0.0, T, int(cells) + 1)
    extra = np.array([b for b in breakpoints if 0.0 < b < T], dtype=float)
    if extra.size == 0:
        return base
    grid = np.union1d(base, extra)
    # drop near-duplicates so no cell is degenerate
    keep = np.concatenate(([True], np.diff(grid) > 1e-12 * T))
    grid = grid[keep]
    grid[-1] = T
    return grid


def _ratio_scan(times: np.ndarray, values: np.ndarray, t0: float, base: float):
    ratios = (values - base) / (times - t0)
    j = int(np.argmin(ratios))
    return float(ratios[j]), j


def inf_ratio(c: PiecewiseCurve, t0: float, base: float, T: float, cells: int = DEFAULT_CELLS) -> tuple[float, float]:
    """Infimum over ``t0 < x <= T`` of ``(c(x) - base) / (x - t0)``.

    Scans a uniform grid joined with the curve breakpoints, using left limits
    at jumps (the infimum is approached from below a jump), then polishes the
    minimiser with a bounded scalar search between its grid neighbours.

    Returns
    -------
    (value, argmin) : (float, float)
    """
    if not t0 < T:
        raise CurveError(f"empty interval: t0={t0} >= T={T}")
    xs = make_grid(T - t0, cells, [b - t0 for b in c.breakpoints]) + t0
    xs = xs[1:]
    xs[-1] = T
    lefts = np.asarray(c.left(xs), dtype=float)
    best, j = _ratio_scan(xs, lefts, t0, base)
    x_best = float(xs[j])
    # the infimum may only be approached as x -> t0, so let the first cell reach almost to t0
    lo = xs[j - 1] if j > 0 else t0 + 1e-6 * (xs[0] - t0)
    hi = xs[j + 1] if j + 1 < xs.size else xs[j]
    if hi > lo and not np.any((c.breakpoints > lo) & (c.breakpoints < hi)):
        res = minimize_scalar(lambda x: (c(x) - base) / (x - t0), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, T)})
        if res.success and res.fun < best:
            best, x_best = float(res.fun), float(res.x)
    return best, x_best


def is_convex_samples(times: np.ndarray, values: np.ndarray, rel_tol: float = 1e-9) -> bool:
    """Sampled convexity test: secant slopes nondecreasing up to ``rel_tol * scale``."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size < 3:
        return True
    h = np.diff(times)
    slopes = np.diff(values) / h
    hmin = np.minimum(h[1:], h[:-1])
    second = np.diff(slopes) * hmin
    scale = max(1.0, float(np.max(np.abs(values))))
    return bool(np.min(second) >= -rel_tol * scale)


def tangent_on_samples(times: np.ndarray, values: np.ndarray, D: float, tol: float | None = None):
    """Tangent from below through ``(times[-1], D)`` to sampled convex data.

    The samples are read as a piecewise-linear curve, for which the supremum
    of the secant slope is attained at a knot.  Returns ``(slope, intercept, T1)``.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    T = float(times[-1])
    scale = max(1.0, float(np.max(np.abs(values))))
    if tol is None:
        tol = 1e-9 * scale
    if D > values[-1] + tol:
        raise CurveError(f"anchor value {D:g} lies above the curve end {values[-1]:g}")
    slopes = (D - values[:-1]) / (T - times[:-1])
    j = int(np.argmax(slopes))
    slope = float(slopes[j])
    if D >= values[-1] - tol:
        # anchor on the curve: terminal tangent, nothing to cut
        slope = max(slope, float((values[-1] - values[-2]) / (T - times[-2])))
        return slope, D - slope * T, T
    line = D + slope * (times - T)
    gap = values - line
    touch = np.nonzero(gap[:-1] <= tol + 1e-12 * scale)[0]
    T1 = float(times[touch[-1]]) if touch.size else float(times[j])
    return slope, D - slope * T, T1


def tangent_from_point(c: PiecewiseCurve, anchor: tuple[float, float], cells: int = DEFAULT_CELLS):
    """Line through ``anchor = (T, D)`` tangent to convex ``c`` from below on ``[0, T]``.

    Returns ``(slope, intercept, T1)`` where ``T1`` is the last contact point.
    When ``D == c(T)`` the line is the terminal tangent and ``T1 == T``.
    """
    T, D = float(anchor[0]), float(anchor[1])
    grid = make_grid(T, cells, c.breakpoints)
    vals = c.sample(grid)
    if not is_convex_samples(grid, vals):
        raise CurveError("tangent construction needs a convex curve")
    tol = 1e-9 * max(1.0, float(np.max(np.abs(vals))))
    if D > vals[-1] + tol:
        raise CurveError(f"anchor value {D:g} lies above c(T) = {vals[-1]:g}")
    if D >= vals[-1] - tol:
        h = 1e-7 * T
        slope = float((c(T) - c(T - h)) / h)
        return slope, D - slope * T, T
    slope, _, _ = tangent_on_samples(grid, vals, D, tol)
    slopes = (D - vals[:-1]) / (T - grid[:-1])
    j = int(np.argmax(slopes))
    # polish the contact point between grid neighbours
    lo = grid[max(j - 1, 0)]
    hi = grid[min(j + 1, grid.size - 2)]
    t1 = float(grid[j])
    if hi > lo:
        res = minimize_scalar(lambda x: -(D - c(x)) / (T - x), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * T})
        if res.success and -res.fun > slope:
            slope, t1 = float(-res.fun), float(res.x)
    # last contact: largest grid point still touching, else the polished one
    line = D + slope * (grid - T)
    touch = np.nonzero(vals[:-1] - line[:-1] <= tol)[0]
    if touch.size and grid[touch[-1]] > t1:
        t1 = float(grid[touch[-1]])
    return slope, D - slope * T, t1


def discretize(c: PiecewiseCurve, epochs: int, T: float | None = None) -> PiecewiseCurve:
    """Staircase version of ``c`` on ``[0, T]`` with ``epochs`` equal epochs.

    The staircase holds ``c(epoch start)`` through each epoch, so an amount
    only becomes available at the start of the epoch following its arrival.
    """
    if epochs < 1:
        raise CurveError("need at least one epoch")
    T = c.t_end if T is None else float(T)
    starts = np.linspace(0.0, T, int(epochs) + 1)[:-1]
    levels = c.sample(starts)
    amounts = np.diff(levels, prepend=0.0)
    terms = [Step(float(a), float(s)) for a, s in zip(amounts, starts) if a != 0.0 or s == 0.0]
    return PiecewiseCurve(terms, T)

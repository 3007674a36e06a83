"""Quadrature, differentiation and monotonicity tools on a time window.

The measures all reduce to two primitives defined here: locating the
sub-intervals where a rate function is negative (`find_sign_changes`) and
summing the rises of a bounded function of time (`accumulate_increase`).
Both sample the function on a uniform grid, check the sign structure
against a refined grid, and then polish each endpoint locally.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import optimize, special

from .errors import DomainError, GridTooCoarse, RangeError, ToleranceNotReached

Interval = Tuple[float, float]

DEFAULT_REFINE_TOL = 1e-8
DEFAULT_GRID_POINTS = 2000
MAX_GRID_DOUBLINGS = 3


@dataclass(frozen=True)
class TimeWindow:
    """Closed time interval ``[t_start, t_end]`` sampled on ``grid_points`` points."""

    t_start: float
    t_end: float
    grid_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self):
        if not (0 <= self.t_start < self.t_end):
            raise DomainError(f"need 0 <= t_start < t_end, got [{self.t_start}, {self.t_end}]")
        if not np.isfinite(self.t_end):
            raise DomainError("t_end must be finite")
        if self.grid_points < 100:
            raise DomainError("grid_points must be at least 100")

    def grid(self, points: Optional[int] = None) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, points or self.grid_points)


def evaluate_on(f: Callable, t: np.ndarray) -> np.ndarray:
    """Evaluate ``f`` on an array, falling back to a loop for scalar-only callables."""
    t = np.asarray(t, dtype=float)
    try:
        out = np.asarray(f(t))
        if out.shape == t.shape:
            return out
    except TypeError:
        pass
    return np.array([f(float(x)) for x in t])


# ---------------------------------------------------------------------------
# quadrature

# 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded 7-point Gauss rule
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_WEIGHTS_K = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes
_WEIGHTS_G = np.zeros(15)
_WEIGHTS_G[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    y = evaluate_on(f, mid + half * _NODES)
    if not np.all(np.isfinite(y)):
        raise ToleranceNotReached(f"non-finite integrand on [{a}, {b}]")
    k = half * np.dot(_WEIGHTS_K, y)
    g = half * np.dot(_WEIGHTS_G, y)
    return k, abs(k - g)


def integrate_adaptive(f: Callable[[float], float], a: float, b: float,
                       rel_tol: float = 1e-10, abs_tol: float = 1e-12,
                       max_subdivisions: int = 2000) -> float:
    """Adaptive Gauss-Kronrod (7/15) quadrature of a real function.

    The interval with the largest local error estimate is bisected until the
    summed estimate drops below ``max(abs_tol, rel_tol * |result|)``.

    Raises
    ------
    ToleranceNotReached
        If the budget of ``max_subdivisions`` is exhausted, or the integrand
        is not finite at a node.
    """
    if b < a:
        raise DomainError("integrate_adaptive needs a <= b")
    if a == b:
        return 0.0
    k, e = _gk15(f, a, b)
    heap = [(-e, a, b, k)]
    total, err = k, e
    for _ in range(max_subdivisions):
        if err <= max(abs_tol, rel_tol * abs(total)):
            return float(total)
        neg_e, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        k1, e1 = _gk15(f, lo, mid)
        k2, e2 = _gk15(f, mid, hi)
        total += k1 + k2 - val
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, lo, mid, k1))
        heapq.heappush(heap, (-e2, mid, hi, k2))
    if err <= max(abs_tol, rel_tol * abs(total)):
        return float(total)
    raise ToleranceNotReached(
        f"error estimate {err:.3e} after {max_subdivisions} subdivisions on [{a}, {b}]")


def derivative(f: Callable[[float], float], t: float, h: float) -> float:
    """Central difference ``(f(t+h) - f(t-h)) / 2h``."""
    return (f(t + h) - f(t - h)) / (2.0 * h)


# ---------------------------------------------------------------------------
# sign structure

def _negative_runs(y, atol):
    """Index pairs (i, j) of maximal runs of grid points with y < -atol."""
    neg = y < -atol
    if not neg.any():
        return []
    edges = np.diff(neg.astype(np.int8))
    starts = list(np.flatnonzero(edges == 1) + 1)
    stops = list(np.flatnonzero(edges == -1))
    if neg[0]:
        starts.insert(0, 0)
    if neg[-1]:
        stops.append(len(y) - 1)
    return list(zip(starts, stops))


def _sign_structure(f, window, points, atol):
    t = window.grid(points)
    y = evaluate_on(f, t)
    return t, y, _negative_runs(y, atol)


def find_sign_changes(f: Callable, window: TimeWindow,
                      refine_tol: float = DEFAULT_REFINE_TOL,
                      atol: float = 0.0, check_grid: bool = True) -> List[Interval]:
    """Maximal sub-intervals of ``window`` on which ``f < 0``.

    Endpoints are located by a bracketing root search to ``refine_tol``; a
    negative stretch that is still open at ``t_end`` is reported with
    ``b = t_end``.  With ``check_grid`` the sign pattern is recomputed on a
    grid twice as dense and the grid keeps doubling (up to
    ``MAX_GRID_DOUBLINGS`` times) until both agree.

    Raises
    ------
    GridTooCoarse
        If the sign pattern has not stabilised at the finest grid.
    """
    points = window.grid_points
    t, y, runs = _sign_structure(f, window, points, atol)
    if check_grid:
        for _ in range(MAX_GRID_DOUBLINGS + 1):
            t2, y2, runs2 = _sign_structure(f, window, 2 * points - 1, atol)
            if len(runs2) == len(runs):
                break
            t, y, runs, points = t2, y2, runs2, 2 * points - 1
        else:
            raise GridTooCoarse(f"sign pattern still changing at {points} grid points")

    def root(lo, hi):
        flo, fhi = f(lo), f(hi)
        if flo == 0:
            return lo
        if fhi == 0 or np.sign(flo) == np.sign(fhi):
            return hi
        return optimize.brentq(lambda x: float(f(x)), lo, hi, xtol=refine_tol, rtol=4 * np.finfo(float).eps)

    out = []
    for i, j in runs:
        a = t[0] if i == 0 else root(t[i - 1], t[i])
        b = t[-1] if j == len(t) - 1 else root(t[j], t[j + 1])
        if b > a:
            out.append((float(a), float(b)))
    return out


# ---------------------------------------------------------------------------
# monotone increase

def _rising_runs(y, atol):
    """Grid index pairs (i, j) bounding maximal stretches where y increases.

    Steps smaller than ``atol`` in magnitude inherit the direction of the
    preceding step so that rounding noise cannot split or create runs; runs
    whose total rise does not exceed ``atol`` are dropped.
    """
    d = np.diff(y)
    direction = np.zeros(len(d), dtype=np.int8)
    direction[d > atol] = 1
    direction[d < -atol] = -1
    # forward-fill the flat steps
    nz = direction != 0
    idx = np.where(nz, np.arange(len(direction)), -1)
    np.maximum.accumulate(idx, out=idx)
    direction = np.where(idx >= 0, direction[np.maximum(idx, 0)], -1)
    up = np.concatenate([[False], direction == 1, [False]])
    edges = np.diff(up.astype(np.int8))
    starts = np.flatnonzero(edges == 1)
    stops = np.flatnonzero(edges == -1)
    return [(int(i), int(j)) for i, j in zip(starts, stops) if y[j] - y[i] > atol]


def _significant(runs, y, min_rise):
    return sum(1 for i, j in runs if y[j] - y[i] > min_rise)


def _polish(f, t, i, maximize, tol):
    """Refine a grid extremum at index ``i`` inside its neighbouring cell pair."""
    lo = t[max(i - 1, 0)]
    hi = t[min(i + 1, len(t) - 1)]
    sign = -1.0 if maximize else 1.0
    scalar = lambda x: float(np.ravel(f(x))[0])
    res = optimize.minimize_scalar(lambda x: sign * scalar(x), bounds=(lo, hi),
                                   method="bounded", options={"xatol": tol})
    x, fx = float(res.x), float(sign * res.fun)
    fi = scalar(t[i])
    if (maximize and fi >= fx) or (not maximize and fi <= fx):
        return float(t[i]), fi
    return x, fx


def accumulate_increase(f: Callable, window: TimeWindow,
                        refine_tol: float = DEFAULT_REFINE_TOL,
                        tail_value: Optional[float] = None,
                        atol: float = 1e-13, check_grid: bool = True,
                        refine: bool = True, values: Optional[np.ndarray] = None,
                        check_rise: float = 1e-10) -> Tuple[float, List[Interval]]:
    """Total rise of ``f`` over its intervals of increase within ``window``.

    Parameters
    ----------
    f : callable
        Continuous function of time; vectorised callables are used as such.
    window : TimeWindow
    refine_tol : float
        Location tolerance for the interior minima and maxima bounding each
        rising stretch.
    tail_value : float, optional
        Known limit ``f(inf)``.  When ``f`` is monotone beyond ``t_end`` the
        missing rise ``max(0, tail_value - f(t_end))`` is added and reported
        as the interval ``(t_end, inf)``.
    atol : float
        Grid steps smaller than this are treated as flat.
    check_grid : bool
        Recount the rising stretches on a twice-denser grid and raise
        `GridTooCoarse` if the count is still changing after a few doublings.
        Only stretches rising by more than ``check_rise`` are counted.
    refine : bool
        Polish interior extrema; without it the grid values are used.
    values : ndarray, optional
        Precomputed ``f`` on ``window.grid()``.

    Returns
    -------
    total : float
    intervals : list of (a, b)
    """
    points = window.grid_points
    t = window.grid(points)
    y = evaluate_on(f, t) if values is None else np.asarray(values, dtype=float)
    runs = _rising_runs(y, atol)
    if check_grid:
        for _ in range(MAX_GRID_DOUBLINGS + 1):
            t2 = window.grid(2 * points - 1)
            y2 = np.empty(len(t2))
            y2[::2] = y
            y2[1::2] = evaluate_on(f, t2[1::2])
            runs2 = _rising_runs(y2, atol)
            if _significant(runs2, y2, check_rise) == _significant(runs, y, check_rise):
                break
            t, y, runs, points = t2, y2, runs2, 2 * points - 1
        else:
            raise GridTooCoarse(f"monotonicity pattern still changing at {points} grid points")

    total = 0.0
    intervals: List[Interval] = []
    last = len(t) - 1
    for i, j in runs:
        if refine and 0 < i:
            a, fa = _polish(f, t, i, False, refine_tol)
        else:
            a, fa = float(t[i]), float(y[i])
        if refine and j < last:
            b, fb = _polish(f, t, j, True, refine_tol)
        else:
            b, fb = float(t[j]), float(y[j])
        rise = fb - fa
        if rise > atol:
            total += rise
            intervals.append((a, b))
    if tail_value is not None:
        rise = float(tail_value) - float(y[-1])
        if rise > atol:
            total += rise
            if intervals and intervals[-1][1] == float(t[-1]):
                intervals[-1] = (intervals[-1][0], float("inf"))
            else:
                intervals.append((float(t[-1]), float("inf")))
    return total, intervals


# ---------------------------------------------------------------------------
# special functions

COMPLEX_ERF_RADIUS = 30.0


def complex_erf(z):
    """Error function of a complex argument, valid for ``|z| <= 30``.

    Raises
    ------
    RangeError
        Outside the validated disk.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > COMPLEX_ERF_RADIUS):
        raise RangeError(f"complex_erf validated only for |z| <= {COMPLEX_ERF_RADIUS}")
    out = special.erf(z)
    return out if out.ndim else complex(out)

"""Non-Markovianity measures and the capacity evaluators behind them.

Five measures are provided, each returning a `MeasureResult`:

``n_rhp``  divisibility violation, the time integral of the negative parts of
           the generator rates;
``n_blp``  total revival of the trace distance between two evolved states;
``n_lfs``  total revival of the channel mutual information ``I(rho, Phi_t)``,
           maximised over the input state;
``n_c``    total revival of the entanglement-assisted classical capacity;
``n_q``    total revival of the quantum capacity.

For one qubit, or two qubits in separate baths, with Ohmic dephasing, every
backflow interval is known in closed form.  By default the window is then
stretched past the last zero of the dephasing rate and the rise left over
until ``t = inf`` is added from the exact limit (``analytic_tail``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np
from scipy import optimize

from . import decoherence as deco
from .channels import (AmplitudeDamping1Q, AmplitudeDamping2QIndependent, ChannelModel,
                       Dephasing1Q, Dephasing2QCommon, Dephasing2QIndependent,
                       _AmplitudeDampingModel, _mask_kraus_coeffs)
from .numerics import (DEFAULT_REFINE_TOL, TimeWindow, accumulate_increase, evaluate_on,
                       find_sign_changes, integrate_adaptive)
from .qmath import binary_entropy, entropy_unchecked, kron, trace_norm
from .sampling import StateSampler, candidate_pairs, candidate_states

TIE_TOL = 1e-12
TOP_K = 6
COARSE_POINTS = 401
CAPACITY_GRID = 64
GOLDEN_ITERS = 60


@dataclass
class MeasureResult:
    """Value of a measure together with its diagnostics.

    Attributes
    ----------
    value : float
        Non-negative measure value (for a diverged result, the sum over the
        window with the amplitude clamped at the pole guard).
    diverged : bool
    intervals : list of (a, b)
        Backflow intervals; ``b = inf`` marks a rise completed by the
        analytic tail.
    argmax : ndarray or tuple of ndarray or None
        Optimal input state (or state pair) when an optimisation was done.
    label : str
        Short name of the optimal state family, e.g. ``"bell_psi_pair"``.
    sampler_budget_used : int
        Random samples evaluated (analytic candidates not counted).
    tail : float
        Part of ``value`` contributed beyond the last grid point.
    """

    value: float
    diverged: bool = False
    intervals: List = field(default_factory=list)
    argmax: object = None
    label: str = ""
    sampler_budget_used: int = 0
    tail: float = 0.0


# ---------------------------------------------------------------------------
# helpers

def _local_ohmic(model):
    return isinstance(model, (Dephasing1Q, Dephasing2QIndependent))


def _working_window(model, window, analytic_tail):
    """Window and tail flag: for local Ohmic dephasing, stretch past the last rate zero."""
    if not (analytic_tail and _local_ohmic(model)):
        return window, False
    zeros = deco.rate_zeros(model.spectrum)
    t_end = window.t_end
    if zeros and 2.0 * zeros[-1] > t_end:
        t_end = 2.0 * zeros[-1]
    return TimeWindow(window.t_start, t_end, window.grid_points), True


def _golden_max(fun, lo, hi, iters=GOLDEN_ITERS):
    """Vectorised golden-section maximisation of ``fun`` on ``[lo, hi]`` (arrays)."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a = np.array(lo, dtype=float)
    b = np.array(hi, dtype=float)
    for _ in range(iters):
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        left = fun(c) >= fun(d)
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    x = 0.5 * (a + b)
    return x, fun(x)


def _bracketed_max(fun_grid, fun, lo, hi, n):
    """Maximise on a ``CAPACITY_GRID`` grid, then refine around the best node."""
    grid = np.linspace(lo, hi, CAPACITY_GRID)
    vals = fun_grid(grid)                       # (n, CAPACITY_GRID)
    k = np.argmax(vals, axis=1)
    left = grid[np.clip(k - 1, 0, CAPACITY_GRID - 1)]
    right = grid[np.clip(k + 1, 0, CAPACITY_GRID - 1)]
    x, fx = _golden_max(fun, left, right)
    best_grid = vals[np.arange(n), k]
    use_grid = best_grid > fx
    return np.where(use_grid, grid[k], x), np.where(use_grid, best_grid, fx)


def _trace_distance_curve(model, rho1, rho2, t):
    return 0.5 * trace_norm(model.evolve(rho1, t) - model.evolve(rho2, t))


def _entropy(rho):
    return entropy_unchecked(rho)


# ---------------------------------------------------------------------------
# information quantities

def mutual_info_channel(model: ChannelModel, rho, t):
    """``I(rho, Phi_t) = S(rho) + S(Phi_t rho) - S(rho, Phi_t)`` in bits.

    The last term, the entropy exchange, is the entropy of the complementary
    (environment) output.
    """
    rho = np.asarray(rho, dtype=complex)
    val = _entropy(rho) + _entropy(model.evolve(rho, t)) - _entropy(model.complementary(rho, t))
    return val if np.ndim(val) else float(val)


def coherent_info(model: ChannelModel, rho, t):
    """``I_c(rho, Phi_t) = S(Phi_t rho) - S(rho, Phi_t)`` in bits."""
    rho = np.asarray(rho, dtype=complex)
    val = _entropy(model.evolve(rho, t)) - _entropy(model.complementary(rho, t))
    return val if np.ndim(val) else float(val)


def _h2(p):
    return binary_entropy(np.clip(p, 0.0, 1.0))


def _ad_capacity_objective(eta, quantum):
    """Capacity objective in the excited population ``p`` for damping ``eta = |G|^2``."""
    eta = np.asarray(eta, dtype=float)

    def one(p):
        val = _h2(eta * p) - _h2((1 - eta) * p)
        return val if quantum else val + _h2(p)

    def grid(ps):
        e = eta[:, None]
        val = _h2(e * ps) - _h2((1 - e) * ps)
        return val if quantum else val + _h2(np.broadcast_to(ps, val.shape))

    return one, grid


def _common_info_objective(model: Dephasing2QCommon, t, quantum):
    """Information in ``a`` for inputs ``diag(a, 1/2-a, 1/2-a, a)``.

    The channel is covariant under diagonal unitaries, qubit exchange and
    ``X (x) X``; both information quantities are concave in the input (the
    channel is degradable), so twirling over these symmetries shows that this
    one-parameter family contains an optimal input.
    """
    b = _mask_kraus_coeffs(model.mask(t).real)         # (n, K, 4) real

    def info(a):
        a = np.asarray(a, dtype=float)
        pops = np.stack([a, 0.5 - a, 0.5 - a, a], axis=-1)
        pops = np.clip(pops, 0.0, None)
        if pops.ndim == 2:
            env = np.einsum("nki,ni,nli->nkl", b, pops, b)
        else:
            env = np.einsum("nki,nmi,nli->nmkl", b, pops, b)
        s_in = -np.sum(np.where(pops > 0, pops * np.log2(np.where(pops > 0, pops, 1)), 0), axis=-1)
        s_env = _entropy(env)
        return s_in - s_env if quantum else 2 * s_in - s_env

    def grid(avals):
        return info(np.broadcast_to(avals, (b.shape[0], len(avals))))

    return info, grid


def _symmetric_diag(a):
    return np.diag([a, 0.5 - a, 0.5 - a, a]).astype(complex)


def capacity_curve(model: ChannelModel, t, quantum: bool):
    """Capacity on a time grid and the optimal input parameter per time.

    Returns
    -------
    values : ndarray
    params : ndarray
        Excited population ``p`` (amplitude damping), weight ``a`` of
        ``diag(a, 1/2-a, 1/2-a, a)`` (common dephasing), or ``nan`` when the
        maximally mixed input is optimal (local dephasing).
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    n = len(t)
    if isinstance(model, (Dephasing1Q, Dephasing2QIndependent)):
        rho = np.eye(model.dim, dtype=complex) / model.dim
        f = coherent_info if quantum else mutual_info_channel
        return np.asarray(f(model, rho, t)).reshape(n), np.full(n, np.nan)
    if isinstance(model, Dephasing2QCommon):
        one, grid = _common_info_objective(model, t, quantum)
        a, val = _bracketed_max(grid, one, 0.0, 0.5, n)
        return val, a
    if isinstance(model, _AmplitudeDampingModel):
        eta = np.abs(np.atleast_1d(model.amplitude(t))) ** 2
        eta = np.clip(eta, 0.0, 1.0)
        one, grid = _ad_capacity_objective(eta, quantum)
        p, val = _bracketed_max(grid, one, 0.0, 1.0, n)
        if quantum:
            dead = eta <= 0.5
            val = np.where(dead, 0.0, val)
        if isinstance(model, AmplitudeDamping2QIndependent):
            val = 2.0 * val
        return val, p
    raise TypeError(f"no capacity evaluator for {model!r}")


def _capacity_state(model, param):
    if isinstance(model, Dephasing2QCommon):
        return _symmetric_diag(float(param))
    if isinstance(model, _AmplitudeDampingModel):
        one = np.diag([1 - param, param]).astype(complex)
        return one if model.dim == 2 else kron(one, one)
    return np.eye(model.dim, dtype=complex) / model.dim


def _capacity_at(model, t, optimizer_budget, quantum, seed=0):
    vals, params = capacity_curve(model, np.array([float(t)]), quantum)
    value, state = float(vals[0]), _capacity_state(model, params[0])
    if isinstance(model, Dephasing2QCommon) and optimizer_budget > 0:
        f = coherent_info if quantum else mutual_info_channel
        sampler = StateSampler(budget=optimizer_budget, seed=seed)
        for _, rho in sampler.states(4):
            v = float(f(model, rho, float(t)))
            if v > value + TIE_TOL:
                value, state = v, rho
    return value, state


def c_ea(model: ChannelModel, t: float, optimizer_budget: int = 0, seed: int = 0):
    """Entanglement-assisted classical capacity ``max_rho I(rho, Phi_t)`` and its optimiser.

    ``optimizer_budget`` random states are additionally tried for the
    common-bath model (they never beat the symmetric family, see
    `capacity_curve`).
    """
    return _capacity_at(model, t, optimizer_budget, False, seed)


def q_cap(model: ChannelModel, t: float, optimizer_budget: int = 0, seed: int = 0):
    """Single-letter quantum capacity ``max_rho I_c(rho, Phi_t)``; zero once ``|G|^2 <= 1/2``."""
    return _capacity_at(model, t, optimizer_budget, True, seed)


# ---------------------------------------------------------------------------
# RHP

def _rate_part(model, k):
    return lambda t: np.asarray(model.rhp_rates(t)[k][1])


def _min_amplitude(model, window):
    """Smallest ``|G|`` on the window, polishing every grid-local minimum."""
    t = window.grid()
    g = np.atleast_1d(model.amplitude(t))
    mag = np.abs(g)
    best = float(mag.min())
    if np.all(np.abs(g.imag) == 0) and np.any(np.diff(np.sign(g.real)) != 0):
        return 0.0
    idx = np.flatnonzero((mag[1:-1] <= mag[:-2]) & (mag[1:-1] <= mag[2:])) + 1
    for i in idx:
        res = optimize.minimize_scalar(lambda x: abs(complex(model.amplitude(x))),
                                       bounds=(t[i - 1], t[i + 1]), method="bounded",
                                       options={"xatol": 1e-12})
        best = min(best, float(res.fun))
    return best


def n_rhp(model: ChannelModel, window: TimeWindow, analytic_tail: bool = True,
          refine_tol: float = DEFAULT_REFINE_TOL,
          pole_guard: float = deco.DEFAULT_POLE_GUARD) -> MeasureResult:
    """Time integral of the divisibility violation ``g(t)``.

    Dephasing: each rate with weight ``w`` contributes ``-w int_{rate<0} rate``
    (weight 2 for one qubit, 4 for two separate baths, 2 for each collective
    rate of a shared bath).  Amplitude damping: ``-w int_{gamma<0} gamma`` with
    ``w = 1`` (one qubit) or 2 (two qubits), computed as the summed rises of
    ``w log|G|^2``.  A zero of ``G`` in the window sets ``diverged``.
    """
    if isinstance(model, _AmplitudeDampingModel):
        return _n_rhp_amplitude(model, window, refine_tol, pole_guard)
    win, tail_on = _working_window(model, window, analytic_tail)
    total = 0.0
    tail = 0.0
    intervals = []
    for k, (weight, _) in enumerate(model.rhp_rates(0.0)):
        rate = _rate_part(model, k)
        for a, b in find_sign_changes(rate, win, refine_tol):
            total += weight * integrate_adaptive(lambda x: -float(rate(x)), a, b,
                                                 rel_tol=1e-12, abs_tol=1e-14)
            intervals.append((a, b))
        if tail_on and float(rate(win.t_end)) < 0:
            gam = model.spectrum
            extra = 0.5 * weight * (float(deco.gamma_ohmic(gam, win.t_end))
                                    - float(deco.gamma_ohmic(gam, np.inf)))
            if extra > 0:
                tail += extra
                intervals[-1] = (intervals[-1][0], math.inf)
    intervals.sort()
    return MeasureResult(value=total + tail, intervals=intervals, tail=tail)


def _n_rhp_amplitude(model, window, refine_tol, pole_guard):
    weight = model.rhp_rates(0.0)[0][0]

    def log_pop(t):
        mag = np.abs(np.asarray(model.amplitude(t)))
        return weight * 2.0 * np.log(np.maximum(mag, pole_guard))

    total, intervals = accumulate_increase(log_pop, window, refine_tol)
    diverged = _min_amplitude(model, window) <= pole_guard
    return MeasureResult(value=total, diverged=diverged, intervals=intervals)


# ---------------------------------------------------------------------------
# optimisation over sampled inputs

def _best_curve(items, curve, window, tail_fn, n_candidates):
    """Screen all items on a coarse grid, then refine the best few on the full grid.

    Candidates (the first ``n_candidates`` items) are always refined and win
    ties against random samples.
    """
    coarse_window = TimeWindow(window.t_start, window.t_end, min(window.grid_points, COARSE_POINTS))
    tc = coarse_window.grid()
    coarse = []
    for i, item in enumerate(items[n_candidates:], start=n_candidates):
        total, _ = accumulate_increase(None, coarse_window, values=curve(item, tc),
                                       check_grid=False, refine=False,
                                       tail_value=tail_fn(item) if tail_fn else None)
        coarse.append((total, i))
    chosen = list(range(n_candidates)) + sorted(i for _, i in sorted(coarse, key=lambda c: -c[0])[:TOP_K])
    t = window.grid()
    best = None
    for i in chosen:
        item = items[i]
        f = lambda x, item=item: curve(item, x)
        total, ivs = accumulate_increase(f, window, values=curve(item, t),
                                         tail_value=tail_fn(item) if tail_fn else None)
        if best is None or total > best[0] + TIE_TOL:
            best = (total, ivs, item)
    return best


def n_blp(model: ChannelModel, window: TimeWindow, sampler: Optional[StateSampler] = None,
          analytic_tail: bool = True) -> MeasureResult:
    """Largest total revival of the trace distance over sampled state pairs."""
    sampler = sampler or StateSampler(budget=0)
    win, tail_on = _working_window(model, window, analytic_tail)
    pairs = sampler.pairs(model.dim)
    n_cand = len(candidate_pairs(model.dim)) if sampler.include_candidates else 0

    def curve(item, t):
        return _trace_distance_curve(model, item[1], item[2], t)

    tail_fn = (lambda item: float(curve(item, np.inf))) if tail_on else None
    total, ivs, item = _best_curve(pairs, curve, win, tail_fn, n_cand)
    return MeasureResult(value=total, intervals=ivs, argmax=(item[1], item[2]), label=item[0],
                         sampler_budget_used=len(pairs) - n_cand,
                         tail=_tail_part(ivs, item, curve, win) if tail_on else 0.0)


def _tail_part(ivs, item, curve, win):
    """Rise contributed beyond the grid, when the last interval is open-ended."""
    if ivs and ivs[-1][1] == math.inf:
        end = np.array([win.t_end, np.inf])
        y = np.atleast_1d(curve(item, end))
        return max(0.0, float(y[1] - y[0]))
    return 0.0


def _product_candidates(model, window, sampler, analytic_tail):
    """Products of the single-qubit optimum for two-qubit independent models."""
    single = model.single
    res = n_lfs(single, window, sampler, analytic_tail)
    rho = res.argmax
    return [("product_of_1q_optima", kron(rho, rho))]


def n_lfs(model: ChannelModel, window: TimeWindow, sampler: Optional[StateSampler] = None,
          analytic_tail: bool = True) -> MeasureResult:
    """Largest total revival of ``I(rho, Phi_t)`` over sampled inputs ``rho``."""
    sampler = sampler or StateSampler(budget=0)
    win, tail_on = _working_window(model, window, analytic_tail)
    states = sampler.states(model.dim)
    n_cand = len(candidate_states(model.dim)) if sampler.include_candidates else 0
    if isinstance(model, (Dephasing2QIndependent, AmplitudeDamping2QIndependent)):
        states = _product_candidates(model, window, sampler, analytic_tail) + states
        n_cand += 1

    def curve(item, t):
        return np.atleast_1d(mutual_info_channel(model, item[1], t))

    tail_fn = (lambda item: float(curve(item, np.inf)[0])) if tail_on else None
    total, ivs, item = _best_curve(states, curve, win, tail_fn, n_cand)
    return MeasureResult(value=total, intervals=ivs, argmax=item[1], label=item[0],
                         sampler_budget_used=len(states) - n_cand,
                         tail=_tail_part(ivs, item, curve, win) if tail_on else 0.0)


def _capacity_measure(model, window, quantum, analytic_tail):
    win, tail_on = _working_window(model, window, analytic_tail)
    f = lambda t: capacity_curve(model, t, quantum)[0]
    tail_value = float(f(np.array([np.inf]))[0]) if tail_on else None
    total, ivs = accumulate_increase(f, win, tail_value=tail_value)
    tail = 0.0
    if tail_on and ivs and ivs[-1][1] == math.inf:
        tail = max(0.0, tail_value - float(f(np.array([win.t_end]))[0]))
    label = "max_mixed" if _local_ohmic(model) else (
        "symmetric_diag" if isinstance(model, Dephasing2QCommon) else "diag_population")
    return MeasureResult(value=total, intervals=ivs, label=label, tail=tail)


def n_c(model: ChannelModel, window: TimeWindow, analytic_tail: bool = True) -> MeasureResult:
    """Total revival of the entanglement-assisted classical capacity."""
    return _capacity_measure(model, window, False, analytic_tail)


def n_q(model: ChannelModel, window: TimeWindow, analytic_tail: bool = True) -> MeasureResult:
    """Total revival of the quantum capacity."""
    return _capacity_measure(model, window, True, analytic_tail)


MEASURES = {"rhp": n_rhp, "blp": n_blp, "lfs": n_lfs, "cea": n_c, "q": n_q}
SAMPLED = {"blp", "lfs"}


def default_window(model: ChannelModel, grid_points: int = 2000) -> TimeWindow:
    """Standard windows: 20 for dephasing and band gap, 40 for the Lorentzian cavity."""
    if isinstance(model, _AmplitudeDampingModel) and isinstance(model.reservoir, deco.LorentzianSpec):
        return TimeWindow(0.0, 40.0, grid_points)
    return TimeWindow(0.0, 20.0, grid_points)

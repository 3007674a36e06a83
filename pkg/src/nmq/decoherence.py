"""Decoherence functions of the five reservoir models.

Times are dimensionless: ``omega_c * t`` for the Ohmic family, ``lambda * t``
for the Lorentzian cavity and ``beta * t`` for the photonic band gap.  All
functions accept scalars or numpy arrays of times.

Ohmic dephasing
    ``Gamma(t)`` is the decoherence exponent of one qubit (coherences decay as
    ``exp(-Gamma)``), ``gamma_1 = Gamma'/2`` the dephasing rate.  Two qubits in
    a shared bath pick up the cross-talk ``delta(t)`` and the collective
    exponents ``Gamma_pm = 2 Gamma +- delta``.

Amplitude damping
    The excited-state amplitude ``G(t)`` with ``G(0) = 1``; the decay rate is
    ``-2 Re(G'/G)`` and diverges where ``G`` vanishes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchError, DomainError, PoleProximity
from .numerics import complex_erf

DEFAULT_POLE_GUARD = 1e-9


def _times(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise DomainError("time must be non-negative")
    return t


def _out(x):
    return x if np.ndim(x) else x.item()


# ---------------------------------------------------------------------------
# Ohmic family

@dataclass(frozen=True)
class OhmicSpectrum:
    """Spectral density ``omega**s * exp(-omega)`` (cutoff frequency set to 1)."""

    s: float

    def __post_init__(self):
        if not self.s > 0:
            raise DomainError(f"Ohmicity must be positive, got {self.s}")

    def density(self, omega):
        omega = np.asarray(omega, dtype=float)
        return omega ** self.s * np.exp(-omega)


@dataclass(frozen=True)
class CommonEnvSpec:
    """Two qubits in one Ohmic bath, separated by transit time ``t_s``."""

    ohmic: OhmicSpectrum
    t_s: float

    def __post_init__(self):
        if not self.t_s > 0:
            raise DomainError(f"transit time must be positive, got {self.t_s}")


def _relaxation_profile(u, eps):
    """``(1 - Re (1 + i u)**(-eps)) / eps`` without cancellation.

    Even in ``u``; tends to ``log(1 + u**2) / 2`` as ``eps -> 0`` and to
    ``1/eps`` (``inf`` for ``eps <= 0``) as ``|u| -> inf``.
    """
    u = np.abs(np.asarray(u, dtype=float))
    fin = np.isfinite(u)
    uf = np.where(fin, u, 0.0)
    half_log = 0.5 * np.log1p(uf * uf)
    theta = np.arctan(uf)
    if eps == 0:
        val = half_log
        inf_val = np.inf
    else:
        decay = np.exp(-eps * half_log)
        val = (-np.expm1(-eps * half_log) + decay * 2.0 * np.sin(0.5 * eps * theta) ** 2) / eps
        inf_val = 1.0 / eps if eps > 0 else np.inf
    return np.where(fin, val, inf_val)


def _im_power(u, s):
    """``Im (1 + i u)**(-s)`` for real ``u``."""
    u = np.asarray(u, dtype=float)
    return -(1.0 + u * u) ** (-0.5 * s) * np.sin(s * np.arctan(u))


def gamma_ohmic(spec: OhmicSpectrum, t):
    """Decoherence exponent of a single qubit.

    Closed form ``2 G(s)/(s-1) * (1 - (1+t^2)^(-s/2) (cos(s atan t) + t sin(s atan t)))``
    with ``G`` the Euler gamma function; the ``s = 1`` value is the continuous
    limit ``log(1 + t^2)``.  ``t = inf`` returns ``2 G(s-1)`` for ``s > 1`` and
    ``inf`` otherwise.
    """
    t = _times(t)
    return _out(2.0 * math.gamma(spec.s) * _relaxation_profile(t, spec.s - 1.0))


def dephasing_rate(spec: OhmicSpectrum, t):
    """``gamma_1(t) = Gamma'(t) / 2 = G(s) (1+t^2)^(-s/2) sin(s atan t)``."""
    t = _times(t)
    fin = np.isfinite(t)
    tf = np.where(fin, t, 0.0)
    val = math.gamma(spec.s) * (1.0 + tf * tf) ** (-0.5 * spec.s) * np.sin(spec.s * np.arctan(tf))
    return _out(np.where(fin, val, 0.0))


def ohmic_interval_endpoints(spec: OhmicSpectrum):
    """First interval ``(a1, b1)`` of negative dephasing rate, or None.

    Returns None for ``s <= 2`` (rate positive throughout) and for ``s > 6``
    where more than one interval exists; use `rate_negative_intervals` there.
    """
    s = spec.s
    if s <= 2 or s > 6:
        return None
    a1 = math.tan(math.pi / s)
    b1 = math.inf if s <= 4 else math.tan(2 * math.pi / s)
    return a1, b1


def rate_zeros(spec: OhmicSpectrum):
    """All finite positive zeros of the dephasing rate, ``tan(k pi / s)``, ascending."""
    s = spec.s
    k_max = math.ceil(s / 2) - 1
    return [math.tan(k * math.pi / s) for k in range(1, k_max + 1)]


def rate_negative_intervals(spec: OhmicSpectrum):
    """All intervals on ``[0, inf]`` where the dephasing rate is negative, for any s.

    ``sin(s atan t) < 0`` exactly for ``atan t`` in ``(k pi/s, (k+1) pi/s)``
    with odd ``k``.
    """
    zeros = rate_zeros(spec) + [math.inf]
    out = []
    for k in range(1, len(zeros), 2):
        out.append((zeros[k - 1], zeros[k]))
    return out


def gamma_endpoint_values(spec: OhmicSpectrum):
    """``(Gamma(a1), Gamma(b1))`` from the endpoint closed forms, for ``2 < s <= 6``."""
    s = spec.s
    if not 2 < s <= 6:
        raise DomainError(f"endpoint formulas hold for 2 < s <= 6, got {s}")
    g = math.gamma(s)
    at_a1 = 2 * g * (1 + math.cos(math.pi / s) ** s) / (s - 1)
    if s <= 4:
        at_b1 = 2 * math.gamma(s - 1)
    else:
        at_b1 = 2 * g * (1 - math.cos(2 * math.pi / s) ** s) / (s - 1)
    return at_a1, at_b1


def delta_cross_talk(spec: CommonEnvSpec, t):
    """Cross-talk exponent between two qubits sharing the bath.

    ``delta = 2 G(s-1) [2 h(t_s) - h(t_s - t) - h(t_s + t)]`` with
    ``h(u) = Re (1 + i u)**(1-s)``, which is the expanded trigonometric form
    written via the cancellation-free profile.  ``delta(inf) = 0`` for
    ``s > 1``.
    """
    t = _times(t)
    s = spec.ohmic.s
    ts = spec.t_s
    eps = s - 1.0
    fin = np.isfinite(t)
    tf = np.where(fin, t, 0.0)
    q = _relaxation_profile
    val = 2.0 * math.gamma(s) * (q(ts - tf, eps) + q(ts + tf, eps) - 2.0 * q(ts, eps))
    if np.any(~fin):
        lim = 2.0 * math.gamma(s) * (2.0 / eps - 2.0 * q(ts, eps)) if eps > 0 else np.inf
        val = np.where(fin, val, lim)
    return _out(val)


def gamma_plus_minus(spec: CommonEnvSpec, t):
    """``(Gamma_plus, Gamma_minus) = (2 Gamma + delta, 2 Gamma - delta)``."""
    g = np.asarray(gamma_ohmic(spec.ohmic, t))
    d = np.asarray(delta_cross_talk(spec, t))
    return _out(2 * g + d), _out(2 * g - d)


def cross_talk_rate(spec: CommonEnvSpec, t):
    """``gamma_2 = delta'/4``, from the analytic derivative."""
    t = _times(t)
    s = spec.ohmic.s
    ts = spec.t_s
    val = 0.5 * math.gamma(s) * (_im_power(ts - t, s) - _im_power(ts + t, s))
    return _out(np.where(np.isfinite(t), val, 0.0))


def rate_plus_minus(spec: CommonEnvSpec, t):
    """``(gamma_plus, gamma_minus) = (gamma_1 + gamma_2, gamma_1 - gamma_2)``.

    ``Gamma_pm' = 4 gamma_pm``.
    """
    g1 = np.asarray(dephasing_rate(spec.ohmic, t))
    g2 = np.asarray(cross_talk_rate(spec, t))
    return _out(g1 + g2), _out(g1 - g2)


# ---------------------------------------------------------------------------
# amplitude damping: Lorentzian cavity

@dataclass(frozen=True)
class LorentzianSpec:
    """Lorentzian reservoir of unit width: coupling ratio ``r`` and detuning."""

    r: float
    detuning: float = 0.0

    def __post_init__(self):
        if not self.r >= 0:
            raise DomainError(f"coupling ratio must be non-negative, got {self.r}")


def _shc(x):
    """``sinh(x)/x`` for complex ``x``, equal to 1 at 0."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-6
    xs = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x * x / 6.0, np.sinh(xs) / xs)


def _lorentz_parts(spec, t):
    kappa = 0.5 * (1.0 - 1j * spec.detuning)
    w = 0.5 * np.sqrt((1.0 - 1j * spec.detuning) ** 2 - 2.0 * spec.r + 0j)
    return kappa, w


def g_lorentzian(spec: LorentzianSpec, t):
    """Excited-state amplitude ``G(t)`` for the Lorentzian reservoir.

    ``G = exp(-k t) [cosh(W t) + k t sinh(W t)/(W t)]`` with
    ``k = (1 - i Delta)/2`` and ``W = sqrt((1 - i Delta)^2 - 2 r)/2``.  The
    ``sinh(x)/x`` form makes the critical point ``r = 1/2`` and the
    oscillatory regime ``r > 1/2`` regular; for zero detuning the value is
    real.
    """
    t = _times(t)
    kappa, w = _lorentz_parts(spec, t)
    g = np.exp(-kappa * t) * (np.cosh(w * t) + kappa * t * _shc(w * t))
    if spec.detuning == 0:
        g = g.real.astype(complex)
    return _out(g)


def g_lorentzian_derivative(spec: LorentzianSpec, t):
    """``G'(t) = -(r/2) t exp(-k t) sinh(W t)/(W t)``."""
    t = _times(t)
    kappa, w = _lorentz_parts(spec, t)
    gd = -0.5 * spec.r * t * np.exp(-kappa * t) * _shc(w * t)
    if spec.detuning == 0:
        gd = gd.real.astype(complex)
    return _out(gd)


# ---------------------------------------------------------------------------
# amplitude damping: photonic band gap

PBG_Z_RANGE = (-15.0, 2.0)
_DEGENERATE_Z = -3.0 / 4.0 ** (1.0 / 3.0)   # 1 + 4 z^3 / 27 = 0
_DEGENERATE_SHIFT = 1e-5
_OMEGA = np.exp(2j * np.pi / 3)


@dataclass(frozen=True)
class PBGSpec:
    """Photonic band gap reservoir with detuning ratio ``z`` (band-edge frequency unit)."""

    z: float

    def __post_init__(self):
        lo, hi = PBG_Z_RANGE
        if not lo <= self.z <= hi:
            raise DomainError(f"z = {self.z} outside validated range [{lo}, {hi}]")


def pbg_roots(z: float):
    """Roots ``x_j`` of ``x^3 + i z x + exp(-i pi/4) = 0`` and their weights ``v_j``.

    ``x = y exp(i pi/4)`` where ``y`` solves the depressed cubic
    ``y^3 + z y - 1 = 0``, taken in Cardano form
    ``y_1 = A+ + A-``, ``y_2 = w^2 A+ + w A-``, ``y_3 = w A+ + w^2 A-``
    (``w = exp(2 pi i/3)``).  ``A+`` is the principal cube root of
    ``1/2 + sqrt(1 + 4 z^3/27)/2`` and ``A- = -z/(3 A+)`` fixes the partner
    branch, so the construction is valid also where the radicand is negative.
    The weights are ``v_j = x_j / prod_{k != j} (x_j - x_k)``.
    """
    rad = np.sqrt(complex(1.0 + 4.0 * z ** 3 / 27.0))
    a_plus = (0.5 + 0.5 * rad) ** (1.0 / 3.0)
    if abs(a_plus) < 1e-300:
        raise BranchError("vanishing Cardano term")
    a_minus = -z / (3.0 * a_plus)
    y = np.array([a_plus + a_minus,
                  _OMEGA ** 2 * a_plus + _OMEGA * a_minus,
                  _OMEGA * a_plus + _OMEGA ** 2 * a_minus])
    x = y * np.exp(1j * np.pi / 4)
    v = np.empty(3, dtype=complex)
    for j in range(3):
        others = [x[k] for k in range(3) if k != j]
        v[j] = x[j] / ((x[j] - others[0]) * (x[j] - others[1]))
    return x, v


def _pbg_terms(z, t, power):
    x, v = pbg_roots(z)
    rt = np.sqrt(t)[..., None]
    # exp(x^2 t) (1 + erf(x sqrt t)); the exponent is bounded on the validated windows
    w = x * rt
    term = np.exp(w * w) * (1.0 + complex_erf(w))
    return np.exp(1j * z * t) * np.sum(v * x ** power * term, axis=-1)


def _pbg_eval(z, t, power):
    if abs(z - _DEGENERATE_Z) < _DEGENERATE_SHIFT:
        # two roots coincide; the symmetric average is accurate to O(shift^2)
        return 0.5 * (_pbg_terms(z - _DEGENERATE_SHIFT, t, power)
                      + _pbg_terms(z + _DEGENERATE_SHIFT, t, power))
    return _pbg_terms(z, t, power)


def g_pbg(spec: PBGSpec, t):
    """Excited-state amplitude in a photonic band gap reservoir.

    ``G(t) = exp(i z t) sum_j v_j x_j exp(x_j^2 t) (1 + erf(x_j sqrt t))``
    with roots and weights from `pbg_roots`.  Raises `BranchError` if the
    initial condition ``G(0) = 1`` is violated by more than 1e-8.
    """
    t = _times(t)
    g0 = _pbg_eval(spec.z, np.zeros(1), 1)[0]
    if abs(g0 - 1) > 1e-8:
        raise BranchError(f"G(0) = {g0} for z = {spec.z}")
    return _out(_pbg_eval(spec.z, t, 1))


def g_pbg_derivative(spec: PBGSpec, t):
    """``G'(t) = i z G(t) + exp(i z t) sum_j v_j x_j^3 exp(x_j^2 t) (1 + erf(x_j sqrt t))``.

    The singular ``1/sqrt(t)`` contributions cancel because
    ``sum_j v_j x_j^2 = 0``.
    """
    t = _times(t)
    val = 1j * spec.z * _pbg_eval(spec.z, t, 1) + _pbg_eval(spec.z, t, 3)
    return _out(val)


def pbg_memory_kernel(z: float, tau):
    """Kernel ``f(tau)`` of ``G' = -int_0^t f(t - t') G(t') dt'`` (band-edge model)."""
    tau = np.asarray(tau, dtype=float)
    return np.exp(-1j * np.pi / 4) * np.exp(1j * z * tau) / np.sqrt(np.pi * tau)


# ---------------------------------------------------------------------------
# amplitude damping: shared helpers

def amplitude(spec, t):
    """Dispatch ``G(t)`` on the reservoir spec."""
    if isinstance(spec, LorentzianSpec):
        return g_lorentzian(spec, t)
    if isinstance(spec, PBGSpec):
        return g_pbg(spec, t)
    raise TypeError(f"not an amplitude-damping reservoir: {spec!r}")


def amplitude_derivative(spec, t):
    if isinstance(spec, LorentzianSpec):
        return g_lorentzian_derivative(spec, t)
    if isinstance(spec, PBGSpec):
        return g_pbg_derivative(spec, t)
    raise TypeError(f"not an amplitude-damping reservoir: {spec!r}")


def ad_decay_rate(g, t, h=1e-4, pole_guard=DEFAULT_POLE_GUARD, g_dot=None):
    """Amplitude-damping rate ``gamma_1(t) = -2 Re(G'(t)/G(t))``.

    Parameters
    ----------
    g : callable
        ``t -> G(t)``.
    t : float
    h : float
        Central-difference step, used when ``g_dot`` is not given.
    pole_guard : float
        Smallest admissible ``|G(t)|``.
    g_dot : callable, optional
        Analytic derivative of ``g``.

    Raises
    ------
    PoleProximity
        If ``|G(t)| <= pole_guard``: the rate diverges there.
    """
    gt = complex(g(t))
    if abs(gt) <= pole_guard:
        raise PoleProximity(t, abs(gt))
    if g_dot is not None:
        gd = complex(g_dot(t))
    else:
        lo = max(t - h, 0.0)
        gd = (complex(g(t + h)) - complex(g(lo))) / (t + h - lo)
    return -2.0 * (gd / gt).real

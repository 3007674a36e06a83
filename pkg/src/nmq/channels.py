"""The five exactly solvable dynamical maps.

Every model is an immutable value exposing

``evolve(rho, t)``
    exact output state(s); ``t`` may be an array, giving a stack of states;
``kraus(t)``
    Kraus operators at a single time;
``kraus_array(t)``
    the same as an array ``(n_times, n_ops, d, d)``;
``complementary(rho, t)``
    environment output ``E_kl = tr(K_k rho K_l^dag)``;
``lindblad_terms(t)``
    ``[(rate, V), ...]`` of the time-local generator
    ``L rho = sum rate (V rho V^dag - {V^dag V, rho}/2)`` (Hamiltonian parts
    omitted; they do not affect divisibility);
``rhp_rates(t)``
    ``[(weight, rate), ...]`` such that ``g(t) = -sum weight * min(rate, 0)``.

Basis conventions: single qubit ``|0> = ground``, ``|1> = excited``; two
qubits use ``|00>, |01>, |10>, |11>`` with the first factor most significant.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from . import decoherence as deco
from .errors import BranchError, DimensionMismatch, DomainError, GeneratorUnavailable
from .qmath import SIGMA_MINUS, SIGMA_Z, kron

FACTOR_ATOL = 1e-12
_I2 = np.eye(2, dtype=complex)


def _time_array(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise DomainError("time must be non-negative")
    return t


def _squeeze(arr, t):
    return arr[0] if np.ndim(t) == 0 else arr


def _check_factor(c, what):
    if np.any(c > 1 + FACTOR_ATOL) or np.any(c < -FACTOR_ATOL) or np.any(np.isnan(c)):
        raise BranchError(f"{what} decoherence factor outside [0, 1]")
    return np.clip(c, 0.0, 1.0)


class ChannelModel:
    """Shared plumbing; subclasses provide the model-specific pieces."""

    dim: int = 2
    label: str = ""

    def _check_rho(self, rho):
        rho = np.asarray(rho, dtype=complex)
        if rho.shape[-2:] != (self.dim, self.dim):
            raise DimensionMismatch(f"{self.label} acts on {self.dim}x{self.dim} states, got {rho.shape}")
        return rho

    # -- overridable -----------------------------------------------------
    def kraus_array(self, t) -> np.ndarray:
        raise NotImplementedError

    def evolve(self, rho, t):
        return self.evolve_kraus(rho, t)

    def lindblad_terms(self, t) -> List[Tuple[float, np.ndarray]]:
        raise GeneratorUnavailable(self.label)

    def rhp_rates(self, t) -> List[Tuple[float, np.ndarray]]:
        raise GeneratorUnavailable(self.label)

    # -- generic ---------------------------------------------------------
    def kraus(self, t: float) -> List[np.ndarray]:
        if np.ndim(t) != 0:
            raise ValueError("kraus takes a single time; use kraus_array for grids")
        return list(self.kraus_array(np.array([t]))[0])

    def evolve_kraus(self, rho, t):
        rho = self._check_rho(rho)
        ks = self.kraus_array(np.atleast_1d(_time_array(t)))
        out = (ks @ rho @ np.swapaxes(ks.conj(), -1, -2)).sum(axis=1)
        return _squeeze(out, t)

    def complementary(self, rho, t):
        rho = self._check_rho(rho)
        ks = self.kraus_array(np.atleast_1d(_time_array(t)))
        n, k, d, _ = ks.shape
        # E_kl = sum_ac (K_k rho)_ac conj(K_l)_ac
        left = (ks @ rho).reshape(n, k, d * d)
        out = left @ np.swapaxes(ks.conj().reshape(n, k, d * d), -1, -2)
        return _squeeze(out, t)

    def rhp_g_rates(self, t):
        """Rate-formula value of the divisibility-violation function ``g(t)``."""
        t = _time_array(t)
        total = np.zeros(np.shape(t))
        for weight, rate in self.rhp_rates(t):
            total = total - weight * np.minimum(rate, 0.0)
        return total if np.ndim(total) else float(total)


# ---------------------------------------------------------------------------
# dephasing

def _dephasing_kraus_coeffs(c):
    """Diagonals of the single-qubit dephasing Kraus pair for factor ``c``."""
    a = np.sqrt((1 + c) / 2)
    b = np.sqrt((1 - c) / 2)
    return np.stack([np.stack([a, a], -1), np.stack([b, -b], -1)], -2)   # (n, 2, 2)


def _diag_kraus(coeffs):
    """(n, K, d) diagonals -> (n, K, d, d) diagonal Kraus operators."""
    n, k, d = coeffs.shape
    out = np.zeros((n, k, d, d), dtype=complex)
    idx = np.arange(d)
    out[:, :, idx, idx] = coeffs
    return out


def _mask_kraus_coeffs(mask):
    """Diagonal Kraus operators ``K_k = diag(sqrt(l_k) u_k)`` from a PSD Hadamard mask."""
    lam, u = np.linalg.eigh(mask)
    if np.any(lam < -1e-9):
        raise BranchError(f"dephasing mask not positive semidefinite (eigenvalue {lam.min():.3e})")
    lam = np.clip(lam, 0.0, None)
    # eigenvalues ascending: put the dominant operator first
    lam = lam[..., ::-1]
    u = u[..., ::-1]
    return np.sqrt(lam)[..., :, None] * np.swapaxes(u, -1, -2)


class _DephasingModel(ChannelModel):
    def mask(self, t):
        raise NotImplementedError

    def evolve(self, rho, t):
        rho = self._check_rho(rho)
        return self.mask(t) * rho

    def kraus_array(self, t):
        m = self.mask(np.atleast_1d(t)).real
        return _diag_kraus(_mask_kraus_coeffs(m))


@dataclass(frozen=True)
class Dephasing1Q(_DephasingModel):
    """Pure dephasing of one qubit in an Ohmic bath."""

    spectrum: deco.OhmicSpectrum
    dim = 2
    label = "dephasing_1q"

    def factor(self, t):
        t = _time_array(t)
        return _check_factor(np.exp(-np.asarray(deco.gamma_ohmic(self.spectrum, t))), "single-qubit")

    def mask(self, t):
        c = self.factor(t)
        m = np.ones(np.shape(c) + (2, 2))
        m[..., 0, 1] = c
        m[..., 1, 0] = c
        return m

    def kraus_array(self, t):
        # K1 = sqrt((1+c)/2) I, K2 = sqrt((1-c)/2) sigma_z
        return _diag_kraus(_dephasing_kraus_coeffs(self.factor(np.atleast_1d(t))))

    def complementary(self, rho, t):
        rho = self._check_rho(rho)
        c = np.atleast_1d(self.factor(t))
        z = (rho[0, 0] - rho[1, 1]).real
        out = np.zeros((len(c), 2, 2), dtype=complex)
        out[:, 0, 0] = (1 + c) / 2
        out[:, 1, 1] = (1 - c) / 2
        out[:, 0, 1] = out[:, 1, 0] = np.sqrt(np.clip(1 - c * c, 0, None)) / 2 * z
        return _squeeze(out, t)

    def lindblad_terms(self, t):
        return [(float(deco.dephasing_rate(self.spectrum, t)), SIGMA_Z)]

    def rhp_rates(self, t):
        return [(2.0, np.asarray(deco.dephasing_rate(self.spectrum, t)))]

    def exponent_at_infinity(self):
        return float(deco.gamma_ohmic(self.spectrum, np.inf))


@dataclass(frozen=True)
class Dephasing2QIndependent(_DephasingModel):
    """Two qubits dephasing in separate, identical Ohmic baths."""

    spectrum: deco.OhmicSpectrum
    dim = 4
    label = "dephasing_2q_independent"

    @property
    def single(self):
        return Dephasing1Q(self.spectrum)

    def mask(self, t):
        m1 = self.single.mask(t)
        return np.einsum("...ij,...kl->...ikjl", m1, m1).reshape(np.shape(t) + (4, 4))

    def kraus_array(self, t):
        k1 = self.single.kraus_array(np.atleast_1d(t))
        n = k1.shape[0]
        return np.einsum("niab,njcd->nijacbd", k1, k1).reshape(n, 4, 4, 4)

    def lindblad_terms(self, t):
        rate = float(deco.dephasing_rate(self.spectrum, t))
        return [(rate, kron(SIGMA_Z, _I2)), (rate, kron(_I2, SIGMA_Z))]

    def rhp_rates(self, t):
        return [(4.0, np.asarray(deco.dephasing_rate(self.spectrum, t)))]

    def exponent_at_infinity(self):
        return float(deco.gamma_ohmic(self.spectrum, np.inf))


@dataclass(frozen=True)
class Dephasing2QCommon(_DephasingModel):
    """Two qubits dephasing in one shared Ohmic bath.

    Coherences between basis states differing in one qubit decay with
    ``Gamma``; the ``|01>,|10>`` coherence with ``Gamma_plus`` and the
    ``|00>,|11>`` coherence with ``Gamma_minus``.
    """

    env: deco.CommonEnvSpec
    dim = 4
    label = "dephasing_2q_common"

    def mask(self, t):
        t = _time_array(t)
        c = _check_factor(np.exp(-np.asarray(deco.gamma_ohmic(self.env.ohmic, t))), "single-flip")
        gp, gm = deco.gamma_plus_minus(self.env, t)
        cp = _check_factor(np.exp(-np.asarray(gp)), "super-decoherent")
        cm = _check_factor(np.exp(-np.asarray(gm)), "sub-decoherent")
        m = np.ones(np.shape(t) + (4, 4))
        for i, j in [(0, 1), (0, 2), (1, 3), (2, 3)]:
            m[..., i, j] = m[..., j, i] = c
        m[..., 1, 2] = m[..., 2, 1] = cp
        m[..., 0, 3] = m[..., 3, 0] = cm
        return m

    def lindblad_terms(self, t):
        gp, gm = deco.rate_plus_minus(self.env, t)
        za, zb = kron(SIGMA_Z, _I2), kron(_I2, SIGMA_Z)
        return [(0.5 * float(gm), za + zb), (0.5 * float(gp), za - zb)]

    def rhp_rates(self, t):
        gp, gm = deco.rate_plus_minus(self.env, t)
        return [(2.0, np.asarray(gp)), (2.0, np.asarray(gm))]


# ---------------------------------------------------------------------------
# amplitude damping

Reservoir = Union[deco.LorentzianSpec, deco.PBGSpec]


def _ad_kraus(g):
    """Single-qubit Kraus pair ``diag(1, conj G)`` and ``sqrt(1-|G|^2) |0><1|``."""
    g = np.atleast_1d(g)
    eta = np.abs(g) ** 2
    if np.any(eta > 1 + 1e-9):
        raise BranchError(f"|G|^2 = {eta.max():.12f} exceeds 1")
    out = np.zeros((len(g), 2, 2, 2), dtype=complex)
    out[:, 0, 0, 0] = 1.0
    out[:, 0, 1, 1] = np.conj(g)
    out[:, 1, 0, 1] = np.sqrt(np.clip(1 - eta, 0, None))
    return out


def _ad2q_excited_first(rho, g):
    """Two-qubit damping in the excited-first basis ``|ee>, |eg>, |ge>, |gg>``.

    ``g`` multiplies each excited-ground coherence ``<e|rho|g>``.
    Indices below are 1-based in the comments to match the usual listing.
    """
    n = len(g)
    e = np.abs(g) ** 2
    r = np.broadcast_to(rho, (n, 4, 4))
    out = np.zeros((n, 4, 4), dtype=complex)
    out[:, 0, 0] = e ** 2 * r[:, 0, 0]                                    # 11
    out[:, 1, 1] = e * r[:, 0, 0] * (1 - e) + r[:, 1, 1] * e              # 22
    out[:, 2, 2] = e * r[:, 0, 0] * (1 - e) + r[:, 2, 2] * e              # 33
    out[:, 3, 3] = 1 - (out[:, 0, 0] + out[:, 1, 1] + out[:, 2, 2])       # 44
    out[:, 0, 1] = e * g * r[:, 0, 1]                                    # 12
    out[:, 0, 2] = e * g * r[:, 0, 2]                                    # 13
    out[:, 0, 3] = g ** 2 * r[:, 0, 3]                                   # 14
    out[:, 1, 2] = e * r[:, 1, 2]                                         # 23
    out[:, 1, 3] = r[:, 0, 2] * g * (1 - e) + r[:, 1, 3] * g            # 24
    out[:, 2, 3] = r[:, 0, 1] * g * (1 - e) + r[:, 2, 3] * g            # 34
    iu = np.triu_indices(4, 1)
    out[:, iu[1], iu[0]] = np.conj(out[:, iu[0], iu[1]])
    return out


class _AmplitudeDampingModel(ChannelModel):
    reservoir: Reservoir

    def amplitude(self, t):
        return np.asarray(deco.amplitude(self.reservoir, _time_array(t)), dtype=complex)

    def decay_rate(self, t, pole_guard=deco.DEFAULT_POLE_GUARD):
        """``-2 Re(G'/G)`` on a grid; ``nan`` where ``|G| <= pole_guard``."""
        t = _time_array(t)
        g = np.asarray(deco.amplitude(self.reservoir, t))
        gd = np.asarray(deco.amplitude_derivative(self.reservoir, t))
        ok = np.abs(g) > pole_guard
        rate = np.where(ok, -2.0 * (gd / np.where(ok, g, 1.0)).real, np.nan)
        return rate if np.ndim(rate) else float(rate)

    def lindblad_terms(self, t):
        rate = deco.ad_decay_rate(lambda x: deco.amplitude(self.reservoir, x), t,
                                  g_dot=lambda x: deco.amplitude_derivative(self.reservoir, x))
        return self._jump_terms(rate)


@dataclass(frozen=True)
class AmplitudeDamping1Q(_AmplitudeDampingModel):
    """Spontaneous decay of one qubit into a structured zero-temperature reservoir."""

    reservoir: Reservoir
    dim = 2
    label = "amplitude_damping_1q"

    def evolve(self, rho, t):
        rho = self._check_rho(rho)
        g = np.atleast_1d(self.amplitude(t))
        eta = np.abs(g) ** 2
        out = np.empty((len(g), 2, 2), dtype=complex)
        out[:, 1, 1] = eta * rho[1, 1]
        out[:, 0, 0] = 1 - out[:, 1, 1]
        out[:, 0, 1] = g * rho[0, 1]
        out[:, 1, 0] = np.conj(g) * rho[1, 0]
        return _squeeze(out, t)

    def kraus_array(self, t):
        return _ad_kraus(self.amplitude(np.atleast_1d(t)))

    def complementary(self, rho, t):
        rho = self._check_rho(rho)
        g = np.atleast_1d(self.amplitude(t))
        lost = 1 - np.abs(g) ** 2
        out = np.empty((len(g), 2, 2), dtype=complex)
        out[:, 0, 0] = 1 - lost * rho[1, 1]
        out[:, 1, 1] = lost * rho[1, 1]
        out[:, 0, 1] = np.sqrt(np.clip(lost, 0, None)) * rho[0, 1]
        out[:, 1, 0] = np.conj(out[:, 0, 1])
        return _squeeze(out, t)

    def _jump_terms(self, rate):
        return [(rate, SIGMA_MINUS)]

    def rhp_rates(self, t):
        return [(1.0, np.asarray(self.decay_rate(t)))]


@dataclass(frozen=True)
class AmplitudeDamping2QIndependent(_AmplitudeDampingModel):
    """Two qubits decaying into separate, identical reservoirs."""

    reservoir: Reservoir
    dim = 4
    label = "amplitude_damping_2q_independent"

    @property
    def single(self):
        return AmplitudeDamping1Q(self.reservoir)

    def evolve(self, rho, t):
        rho = self._check_rho(rho)
        g = np.atleast_1d(self.amplitude(t))
        # excited-first ordering is the index reversal of ours; the conjugate
        # amplitude accounts for our single-qubit convention rho_01 -> G rho_01
        rev = rho[::-1, ::-1]
        out = _ad2q_excited_first(rev, np.conj(g))[:, ::-1, ::-1]
        return _squeeze(np.ascontiguousarray(out), t)

    def kraus_array(self, t):
        k1 = _ad_kraus(self.amplitude(np.atleast_1d(t)))
        n = k1.shape[0]
        return np.einsum("niab,njcd->nijacbd", k1, k1).reshape(n, 4, 4, 4)

    def _jump_terms(self, rate):
        return [(rate, kron(SIGMA_MINUS, _I2)), (rate, kron(_I2, SIGMA_MINUS))]

    def rhp_rates(self, t):
        return [(2.0, np.asarray(self.decay_rate(t)))]


# ---------------------------------------------------------------------------
# module-level wrappers

def apply(model: ChannelModel, rho0, t):
    """Exact output state ``Phi_t(rho0)``."""
    return model.evolve(rho0, t)


def kraus_at(model: ChannelModel, t: float) -> List[np.ndarray]:
    return model.kraus(t)


def complementary_apply(model: ChannelModel, rho0, t):
    """Environment output state, with one dimension per Kraus operator."""
    return model.complementary(rho0, t)


def _generator_action(terms, x, d):
    """Apply ``L (x) 1`` to a ``d^2 x d^2`` operator ``x``."""
    out = np.zeros_like(x)
    eye = np.eye(d)
    for rate, v in terms:
        big = np.kron(v, eye)
        bd = big.conj().T
        vv = bd @ big
        out += rate * (big @ x @ bd - 0.5 * (vv @ x + x @ vv))
    return out


def _trace_norm_excess(terms, d, eps):
    omega = np.eye(d).reshape(d * d) / np.sqrt(d)
    proj = np.outer(omega, omega).astype(complex)
    m = proj + eps * _generator_action(terms, proj, d)
    m = 0.5 * (m + m.conj().T)
    return (np.abs(np.linalg.eigvalsh(m)).sum() - 1.0) / eps


def rhp_g(model: ChannelModel, t: float, eps: float = 1e-4) -> float:
    """Divisibility violation ``g(t)`` from the doubled-space trace norm.

    ``g = lim (|| (1 + eps L_t (x) 1) |Omega><Omega| ||_1 - 1) / eps`` with
    ``|Omega>`` maximally entangled; the limit is Richardson-extrapolated
    (two levels) from ``eps``, ``eps/2`` and ``eps/4``.
    """
    if not 1e-6 <= eps <= 1e-3:
        raise DomainError("eps must lie in [1e-6, 1e-3]")
    terms = model.lindblad_terms(t)
    g1, g2, g4 = (_trace_norm_excess(terms, model.dim, eps / k) for k in (1, 2, 4))
    return max((8 * g4 - 6 * g2 + g1) / 3, 0.0)


FAMILIES = {
    "dephasing_1q": Dephasing1Q,
    "dephasing_2q_independent": Dephasing2QIndependent,
    "dephasing_2q_common": Dephasing2QCommon,
    "amplitude_damping_1q": AmplitudeDamping1Q,
    "amplitude_damping_2q_independent": AmplitudeDamping2QIndependent,
}

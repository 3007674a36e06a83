"""Dense linear algebra and entropies for qubit and two-qubit states.

Every function accepts either a single ``(d, d)`` matrix or a stack
``(..., d, d)``; the stacked form is what the measures use on time grids.
Entropies are in bits.
"""
import numpy as np

from .errors import DimensionMismatch, DomainError, InvalidState, NonHermitianInput

HERMITIAN_ATOL = 1e-10
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# basis index 0 is the ground state |g>, index 1 the excited state |e>
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)


def _square(m):
    m = np.asarray(m)
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise DimensionMismatch(f"expected square matrices, got shape {m.shape}")
    return m


def dagger(m):
    return np.swapaxes(np.conj(m), -1, -2)


def is_hermitian(m, atol=HERMITIAN_ATOL):
    m = _square(m)
    return bool(np.all(np.abs(m - dagger(m)) <= atol))


def hermitian_eigenvalues(m, atol=HERMITIAN_ATOL):
    """Real eigenvalues of a Hermitian matrix (or stack), in descending order.

    Raises
    ------
    NonHermitianInput
        If ``m`` deviates from its adjoint by more than ``atol``.
    """
    m = _square(m)
    if not is_hermitian(m, atol):
        raise NonHermitianInput("matrix is not Hermitian within tolerance")
    return np.linalg.eigvalsh(m)[..., ::-1]


def validate_density(rho, *, psd_atol=PSD_ATOL):
    """Return ``rho`` as a complex array after checking the density-matrix invariants."""
    rho = _square(np.asarray(rho, dtype=complex))
    if not is_hermitian(rho, 1e-12):
        raise InvalidState("density matrix is not Hermitian")
    tr = np.trace(rho, axis1=-2, axis2=-1)
    if np.any(np.abs(tr - 1) > TRACE_ATOL):
        raise InvalidState(f"trace {tr} differs from 1")
    if np.any(np.linalg.eigvalsh(rho) < -psd_atol):
        raise InvalidState("density matrix has negative eigenvalues")
    return rho


def entropy_of_spectrum(lam, *, psd_atol=PSD_ATOL):
    """Shannon entropy (bits) of eigenvalue arrays along the last axis."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < -psd_atol):
        raise InvalidState(f"eigenvalue {lam.min():.3e} below -{psd_atol}")
    lam = np.clip(lam, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0, -lam * np.log2(np.where(lam > 0, lam, 1.0)), 0.0)
    return terms.sum(axis=-1)


def von_neumann_entropy(rho):
    """S(rho) = -tr rho log2 rho, with 0 log 0 := 0."""
    rho = validate_density(rho)
    return entropy_of_spectrum(np.linalg.eigvalsh(rho))


def entropy_unchecked(rho):
    """Entropy of a stack of Hermitian PSD matrices without trace/Hermiticity checks."""
    return entropy_of_spectrum(np.linalg.eigvalsh(rho))


def binary_entropy(p):
    """H2(p) in bits. Inputs within 1e-12 outside [0, 1] are clamped."""
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
        raise DomainError(f"binary entropy argument outside [0, 1]: {p}")
    p = np.clip(p, 0.0, 1.0)
    q = 1.0 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
        h = h + np.where(q > 0, -q * np.log2(np.where(q > 0, q, 1.0)), 0.0)
    return h if h.ndim else float(h)


def trace_norm(m):
    return np.abs(np.linalg.eigvalsh(m)).sum(axis=-1)


def trace_distance(rho1, rho2):
    """D = 1/2 tr|rho1 - rho2| for matching (stacks of) Hermitian matrices."""
    rho1 = np.asarray(rho1)
    rho2 = np.asarray(rho2)
    if rho1.shape[-2:] != rho2.shape[-2:]:
        raise DimensionMismatch(f"{rho1.shape} vs {rho2.shape}")
    d = 0.5 * trace_norm(rho1 - rho2)
    return d if np.ndim(d) else float(d)


def partial_trace(rho, keep=0):
    """Reduce a two-qubit state (or stack) to qubit ``keep`` (0 = first factor)."""
    rho = np.asarray(rho)
    if rho.shape[-2:] != (4, 4):
        raise DimensionMismatch(f"partial_trace needs 4x4 input, got {rho.shape}")
    if keep not in (0, 1):
        raise ValueError("keep must be 0 or 1")
    r = rho.reshape(rho.shape[:-2] + (2, 2, 2, 2))
    if keep == 0:
        return np.einsum("...ijkj->...ik", r)
    return np.einsum("...ijil->...jl", r)


def hadamard_product(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-2:] != b.shape[-2:]:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    return a * b


def ket_to_dm(psi):
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def maximally_mixed(d):
    return np.eye(d, dtype=complex) / d


def kron(*ops):
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


_s = 1 / np.sqrt(2)
KET = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([_s, _s], dtype=complex),
    "-": np.array([_s, -_s], dtype=complex),
    "+i": np.array([_s, 1j * _s], dtype=complex),
    "-i": np.array([_s, -1j * _s], dtype=complex),
}
BELL = {
    "phi+": np.array([_s, 0, 0, _s], dtype=complex),
    "phi-": np.array([_s, 0, 0, -_s], dtype=complex),
    "psi+": np.array([0, _s, _s, 0], dtype=complex),
    "psi-": np.array([0, _s, -_s, 0], dtype=complex),
}

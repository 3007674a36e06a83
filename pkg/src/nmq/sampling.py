"""Seeded generators of input states and state pairs for the optimisations.

The analytic candidates are always emitted first and are never counted
against the random budget.  Random strategies share the budget evenly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .errors import ConfigError
from .qmath import BELL, KET, ket_to_dm, kron, maximally_mixed

STATE_STRATEGIES = ("random_pure", "random_mixed", "eps_families", "symmetric_diagonal")
PAIR_STRATEGIES = ("random_orthogonal_pairs", "mixed_pure_pairs")

Labeled = Tuple[str, np.ndarray]
LabeledPair = Tuple[str, np.ndarray, np.ndarray]


def haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(rng, d, rank=None):
    """Random state of given rank: Haar unitary times Dirichlet spectrum."""
    rank = d if rank is None else rank
    lam = np.zeros(d)
    lam[:rank] = rng.dirichlet(np.ones(rank))
    u = haar_unitary(rng, d)
    rho = (u * lam) @ u.conj().T
    return 0.5 * (rho + rho.conj().T)


def _bloch_diag(p):
    return np.diag([1 - p, p]).astype(complex)


def candidate_states(d: int) -> List[Labeled]:
    """States known to be optimal for some model, plus the diagonal families."""
    out = [("max_mixed", maximally_mixed(d))]
    if d == 2:
        for p in (0.25, 0.4, 0.6, 0.75):
            out.append((f"diag_{p}", _bloch_diag(p)))
        out.append(("plus", ket_to_dm(KET["+"])))
    else:
        for a in np.linspace(0.0, 0.5, 11):
            rho = np.diag([a, 0.5 - a, 0.5 - a, a]).astype(complex)
            out.append(("symmetric_diag", rho))
        for eps in (0.0, 0.05, 0.1):
            out.append(("rank2_eps", np.diag([0.5 + eps, 0, 0, 0.5 - eps]).astype(complex)))
        out.append(("bell_phi", ket_to_dm(BELL["phi+"])))
    return out


def candidate_pairs(d: int) -> List[LabeledPair]:
    """Pairs singled out by symmetry: equatorial antipodes, Bell pairs, product pairs."""
    if d == 2:
        return [
            ("plus_minus_pair", ket_to_dm(KET["+"]), ket_to_dm(KET["-"])),
            ("plus_i_minus_i_pair", ket_to_dm(KET["+i"]), ket_to_dm(KET["-i"])),
            ("ground_excited_pair", ket_to_dm(KET["0"]), ket_to_dm(KET["1"])),
        ]
    pp = kron(KET["+"], KET["+"]).ravel()
    mm = kron(KET["-"], KET["-"]).ravel()
    g = kron(KET["0"], KET["0"]).ravel()
    e = kron(KET["1"], KET["1"]).ravel()
    return [
        ("plus_plus_minus_minus_pair", ket_to_dm(pp), ket_to_dm(mm)),
        ("bell_phi_pair", ket_to_dm(BELL["phi+"]), ket_to_dm(BELL["phi-"])),
        ("bell_psi_pair", ket_to_dm(BELL["psi+"]), ket_to_dm(BELL["psi-"])),
        ("ground_excited_pair", ket_to_dm(g), ket_to_dm(e)),
    ]


@dataclass(frozen=True)
class StateSampler:
    """Reproducible source of trial states and orthogonal state pairs.

    Parameters
    ----------
    budget : int
        Number of random samples beyond the analytic candidates.
    seed : int
    strategies : sequence of str
        Random strategies to draw from; unknown names raise `ConfigError`.
    include_candidates : bool
        Emit the analytic candidates first (default True).
    """

    budget: int = 100
    seed: int = 0
    strategies: Sequence[str] = field(default=STATE_STRATEGIES + PAIR_STRATEGIES)
    include_candidates: bool = True

    def __post_init__(self):
        unknown = set(self.strategies) - set(STATE_STRATEGIES + PAIR_STRATEGIES)
        if unknown:
            raise ConfigError(f"unknown sampler strategies: {sorted(unknown)}")
        if self.budget < 0:
            raise ConfigError("sampler budget must be non-negative")

    def _split(self, names):
        active = [s for s in self.strategies if s in names]
        if not active:
            return {}
        base, extra = divmod(self.budget, len(active))
        return {s: base + (i < extra) for i, s in enumerate(active)}

    def states(self, d: int) -> List[Labeled]:
        rng = np.random.default_rng([self.seed, d, 1])
        out = candidate_states(d) if self.include_candidates else []
        for name, n in self._split(STATE_STRATEGIES).items():
            for _ in range(n):
                if name == "random_pure":
                    out.append(("random_pure", random_density(rng, d, 1)))
                elif name == "random_mixed":
                    out.append(("random_mixed", random_density(rng, d, int(rng.integers(2, d + 1)))))
                elif name == "eps_families":
                    out.append(_eps_state(rng, d))
                else:
                    out.append(_symmetric_diag_state(rng, d))
        return out

    def pairs(self, d: int) -> List[LabeledPair]:
        rng = np.random.default_rng([self.seed, d, 2])
        out = candidate_pairs(d) if self.include_candidates else []
        for name, n in self._split(PAIR_STRATEGIES).items():
            for _ in range(n):
                u = haar_unitary(rng, d)
                if name == "random_orthogonal_pairs" or d == 2:
                    out.append(("random", ket_to_dm(u[:, 0]), ket_to_dm(u[:, 1])))
                else:
                    # pure state against a mixed state on the orthogonal complement
                    w = rng.dirichlet(np.ones(d - 1))
                    rho2 = (u[:, 1:] * w) @ u[:, 1:].conj().T
                    out.append(("mixed_pure", ket_to_dm(u[:, 0]), 0.5 * (rho2 + rho2.conj().T)))
        return out


def _eps_state(rng, d):
    """Rank-2 state with spectrum 1/2 +- eps, or (d = 4) full rank near 1/4."""
    u = haar_unitary(rng, d)
    if d == 4 and rng.random() < 0.5:
        eps = rng.uniform(-0.1, 0.1, size=4)
        eps -= eps.mean()
        lam = 0.25 + eps
        label = "rank4_eps"
    else:
        eps = rng.uniform(0, 0.1)
        lam = np.zeros(d)
        lam[:2] = (0.5 + eps, 0.5 - eps)
        label = "rank2_eps"
    rho = (u * lam) @ u.conj().T
    return label, 0.5 * (rho + rho.conj().T)


def _symmetric_diag_state(rng, d):
    if d == 2:
        return "diag", _bloch_diag(rng.random())
    a = rng.uniform(0, 0.5)
    return "symmetric_diag", np.diag([a, 0.5 - a, 0.5 - a, a]).astype(complex)

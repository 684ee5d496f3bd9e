"""Eigendecomposition, thermal states, purity and the photon partial trace."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .hilbert import K_B_EV, ModelParams

HERMITIAN_TOL = 1e-12
GROUND_DEGENERACY_TOL = 1e-9  # eV
WEIGHT_FLOOR = 1e-300


@dataclass(frozen=True)
class EigenSystem:
    energies: np.ndarray  # ascending, eV
    vectors: np.ndarray  # column j pairs with energies[j]

    def __len__(self):
        return len(self.energies)

    def matrix_elements(self, op: np.ndarray) -> np.ndarray:
        """<l|op|l'> in the eigenbasis."""
        return self.vectors.conj().T @ op @ self.vectors


@dataclass(frozen=True)
class MixedState:
    """rho = sum_l p_l |l><l|."""

    weights: np.ndarray
    basis: np.ndarray
    temperature: Optional[float] = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        if self.basis.shape[1] != len(w):
            raise ValueError("basis columns must match the number of weights")

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def density_matrix(self) -> np.ndarray:
        return (self.basis * self.weights) @ self.basis.conj().T

    @classmethod
    def pure(cls, vector: np.ndarray) -> "MixedState":
        v = np.asarray(vector).reshape(-1, 1)
        v = v / np.linalg.norm(v)
        return cls(np.array([1.0]), v)

    @classmethod
    def from_density_matrix(cls, rho: np.ndarray, temperature=None) -> "MixedState":
        p, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
        p = np.clip(p, 0.0, None)
        return cls(p / p.sum(), vecs, temperature)


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) < tol


def eigendecompose(h: np.ndarray) -> EigenSystem:
    if not is_hermitian(h):
        raise ValueError("eigendecompose requires a Hermitian matrix")
    energies, vectors = np.linalg.eigh(h)
    return EigenSystem(energies, vectors)


def boltzmann_weights(energies: np.ndarray, temperature: float) -> np.ndarray:
    """Normalized Boltzmann weights; T=0 splits weight evenly over the ground multiplet."""
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0 K, got {temperature}")
    shifted = energies - energies[0]
    if temperature == 0:
        w = (shifted < GROUND_DEGENERACY_TOL).astype(float)
    else:
        w = np.exp(-shifted / (K_B_EV * temperature))
        w[w < WEIGHT_FLOOR] = 0.0
    return w / w.sum()


def thermal_state(eig: EigenSystem, temperature: float) -> MixedState:
    return MixedState(boltzmann_weights(eig.energies, temperature), eig.vectors, temperature)


def eigenstate(eig: EigenSystem, index: int) -> MixedState:
    return MixedState.pure(eig.vectors[:, index])


def purity(state: MixedState) -> float:
    return float(np.sum(state.weights ** 2))


def two_state_xi(gap: float, temperature: float) -> float:
    """tanh(gap / 2 k_B T): population imbalance of a two-level thermal state."""
    if temperature == 0:
        return 1.0
    return float(np.tanh(gap / (2 * K_B_EV * temperature)))


def partial_trace_photon(state: MixedState, params: ModelParams) -> np.ndarray:
    """Reduced density matrix on the Dicke ladder."""
    if state.dim != params.dim:
        raise ValueError(f"state dimension {state.dim} does not match params.dim {params.dim}")
    nph, nd = params.n_photon_states, params.n_dicke_states
    # rho_B = sum_l p_l sum_n psi_l[n, :] psi_l[n, :]^dagger
    psi = state.basis.reshape(nph, nd, -1)
    weighted = psi * np.sqrt(state.weights)
    flat = weighted.transpose(1, 0, 2).reshape(nd, -1)
    rho = flat @ flat.conj().T
    return 0.5 * (rho + rho.conj().T)


def photon_distribution(state: MixedState, params: ModelParams) -> np.ndarray:
    """Photon-number probabilities P(n), n = 0..cutoff."""
    if state.dim != params.dim:
        raise ValueError(f"state dimension {state.dim} does not match params.dim {params.dim}")
    psi = state.basis.reshape(params.n_photon_states, params.n_dicke_states, -1)
    return np.einsum("nml,l->n", np.abs(psi) ** 2, state.weights)

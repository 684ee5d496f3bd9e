"""Truncated photon Fock x symmetric Dicke ladder Hilbert space.

Basis ordering is photon-major: index = n * (N_B + 1) + m, where n is the
photon number and m = 0..N_B labels the S^z eigenvalue m - N_B/2.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

K_B_EV = 8.617333262e-5  # Boltzmann constant, eV/K
DEFAULT_CUTOFF = 70


class TruncationWarning(UserWarning):
    """Photon cutoff too small for the requested coupling."""


@dataclass(frozen=True)
class ModelParams:
    """One squeezed-Dicke instance. Energies in eV."""

    omega_c: float = 1.0
    omega_m: float = 1.0
    G: float = 0.0
    kappa: float = 0.0
    n_molecules: int = 3
    photon_cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        if not self.omega_c > 0:
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")
        if not self.omega_m > 0:
            raise ValueError(f"omega_m must be > 0, got {self.omega_m}")
        if self.G < 0:
            raise ValueError(f"G must be >= 0, got {self.G}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if int(self.n_molecules) != self.n_molecules or self.n_molecules < 1:
            raise ValueError(f"n_molecules must be a positive integer, got {self.n_molecules}")
        if int(self.photon_cutoff) != self.photon_cutoff or self.photon_cutoff < 0:
            raise ValueError(f"photon_cutoff must be a non-negative integer, got {self.photon_cutoff}")

    @property
    def g(self) -> float:
        """Single-molecule coupling G / sqrt(N_B)."""
        return self.G / np.sqrt(self.n_molecules)

    @property
    def n_photon_states(self) -> int:
        return self.photon_cutoff + 1

    @property
    def n_dicke_states(self) -> int:
        return self.n_molecules + 1

    @property
    def dim(self) -> int:
        return self.n_photon_states * self.n_dicke_states

    def replace(self, **changes) -> "ModelParams":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return ModelParams(**fields)


def build_collective_spins(n_molecules: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spin-s matrices (s = N_B/2) in the S^z basis ordered m = -s..+s."""
    if int(n_molecules) != n_molecules or n_molecules < 1:
        raise ValueError(f"n_molecules must be a positive integer, got {n_molecules}")
    s = n_molecules / 2
    m = np.arange(n_molecules + 1) - s
    # <m+1|S^+|m> = sqrt(s(s+1) - m(m+1))
    up = np.sqrt(s * (s + 1) - m[:-1] * (m[:-1] + 1))
    s_plus = np.diag(up, k=-1)
    s_minus = s_plus.T
    sx = 0.5 * (s_plus + s_minus)
    sy = -0.5j * (s_plus - s_minus)
    sz = np.diag(m)
    return sx, sy, sz


def annihilation(cutoff: int) -> np.ndarray:
    """Truncated photon annihilation operator on |0>..|cutoff>."""
    return np.diag(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), k=1)


def embed_photon(op: np.ndarray, params: ModelParams) -> np.ndarray:
    return np.kron(op, np.eye(params.n_dicke_states))


def embed_spin(op: np.ndarray, params: ModelParams) -> np.ndarray:
    return np.kron(np.eye(params.n_photon_states), op)


def embedded_spins(params: ModelParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """S^x, S^y, S^z acting as identity on the photon factor."""
    return tuple(embed_spin(s, params) for s in build_collective_spins(params.n_molecules))


def field_quadrature(params: ModelParams) -> np.ndarray:
    """(a^dagger + a) on the photon factor, embedded in the product space."""
    a = annihilation(params.photon_cutoff)
    return embed_photon(a + a.T, params)


def diamagnetic_term(params: ModelParams) -> np.ndarray:
    """(G^2/omega_m) (a^dagger + a)^2, without the kappa prefactor.

    The square is taken in the truncated space, so the top Fock level sees
    (a^dagger + a)^2 without its missing n_max+1 component.
    """
    x = field_quadrature(params)
    return (params.G ** 2 / params.omega_m) * (x @ x)


def build_hamiltonian(params: ModelParams) -> np.ndarray:
    """Squeezed Dicke Hamiltonian H_D + kappa H_A, energy zero at the bare vacuum."""
    if params.photon_cutoff == 0 and params.G > 0:
        warnings.warn(
            "photon_cutoff=0 with G>0: the coupling has no Fock space to act on",
            TruncationWarning,
            stacklevel=2,
        )
    nb = params.n_molecules
    sx, _, sz = build_collective_spins(nb)
    n_ph = np.arange(params.n_photon_states, dtype=float)

    h = params.omega_c * embed_photon(np.diag(n_ph), params)
    h = h + params.omega_m * embed_spin(sz + 0.5 * nb * np.eye(nb + 1), params)
    x = field_quadrature(params)
    h = h + (2 * params.G / np.sqrt(nb)) * (x @ embed_spin(sx, params))
    if params.kappa:
        h = h + params.kappa * diamagnetic_term(params)
    return 0.5 * (h + h.T)


def parity_operator(params: ModelParams) -> np.ndarray:
    """exp(i pi (a^dagger a + S^z + N_B/2)) as a real diagonal matrix; vacuum has +1."""
    n = np.arange(params.n_photon_states)[:, None]
    m = np.arange(params.n_dicke_states)[None, :]
    return np.diag(np.where((n + m) % 2 == 0, 1.0, -1.0).ravel())


def dipole_operator(params: ModelParams, mu: float = 1.0) -> np.ndarray:
    """Transition dipole 2 mu S^x. The scale mu is arbitrary; spectra ratios cancel it."""
    sx = build_collective_spins(params.n_molecules)[0]
    return 2 * mu * embed_spin(sx, params)

import numpy as np
import pytest
from scipy.linalg import expm

from dicke_qfi.hilbert import K_B_EV, ModelParams, build_hamiltonian
from dicke_qfi.spectral import (
    MixedState,
    boltzmann_weights,
    eigendecompose,
    eigenstate,
    partial_trace_photon,
    photon_distribution,
    purity,
    thermal_state,
    two_state_xi,
)


def random_hermitian(n, rng):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def test_eigensystem_contract():
    rng = np.random.default_rng(3)
    h = random_hermitian(40, rng)
    eig = eigendecompose(h)
    v, e = eig.vectors, eig.energies
    assert np.all(np.diff(e) >= 0)
    assert np.max(np.abs(v.conj().T @ v - np.eye(40))) < 1e-10
    norm = np.linalg.norm(h, 2)
    assert np.max(np.linalg.norm(h @ v - v * e, axis=0)) < 1e-10 * norm


def test_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_decoupled_degeneracies():
    p = ModelParams(G=0.0, n_molecules=2, photon_cutoff=4)
    eig = eigendecompose(build_hamiltonian(p))
    expect = sorted(n + m for n in range(5) for m in range(3))
    np.testing.assert_allclose(eig.energies, expect, atol=1e-12)


def test_doublet_at_large_coupling():
    p = ModelParams(G=np.sqrt(3) * 1.0, n_molecules=3, photon_cutoff=70)
    e = eigendecompose(build_hamiltonian(p)).energies
    small = eigendecompose(build_hamiltonian(p.replace(G=0.2))).energies
    assert e[1] - e[0] < 1e-3 * (small[1] - small[0])


def test_boltzmann_weights():
    e = np.array([0.0, 1e-12, 0.5, 1.0])
    np.testing.assert_allclose(boltzmann_weights(e, 0.0), [0.5, 0.5, 0, 0])
    w = boltzmann_weights(e + 3.0, 300.0)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert w[2] / w[0] == pytest.approx(np.exp(-0.5 / (K_B_EV * 300)))
    assert boltzmann_weights(np.array([0.0, 1.0]), 0.0)[0] == 1.0
    with pytest.raises(ValueError):
        boltzmann_weights(e, -1.0)


def test_thermal_reconstruction():
    p = ModelParams(G=0.4, kappa=0.3, n_molecules=2, photon_cutoff=30)
    h = build_hamiltonian(p)
    temp = 3000.0
    rho = thermal_state(eigendecompose(h), temp).density_matrix()
    ref = expm(-h / (K_B_EV * temp))
    ref /= np.trace(ref)
    assert np.abs(np.linalg.eigvalsh(rho - ref)).sum() < 1e-10


def test_two_state_occupation_and_purity():
    p = ModelParams(G=0.3, n_molecules=3, photon_cutoff=40)
    eig = eigendecompose(build_hamiltonian(p))
    temp = 2000.0  # warm enough that the first gap matters, cold enough for two states
    w = boltzmann_weights(eig.energies, temp)
    xi = two_state_xi(eig.energies[1] - eig.energies[0], temp)
    two = w[:2] / w[:2].sum()
    assert two[0] == pytest.approx((1 + xi) / 2, rel=1e-12)
    state = MixedState(two, eig.vectors[:, :2])
    assert purity(state) == pytest.approx((1 + xi ** 2) / 2, rel=1e-12)


def test_purity_limits():
    v = np.eye(4)
    assert purity(MixedState.pure(v[:, 0])) == 1.0
    assert purity(MixedState(np.array([0.5, 0.5]), v[:, :2])) == 0.5


def test_mixed_state_validation():
    v = np.eye(2)
    with pytest.raises(ValueError):
        MixedState(np.array([0.6, 0.6]), v)
    with pytest.raises(ValueError):
        MixedState(np.array([1.1, -0.1]), v)


def test_partial_trace_product_and_correlated():
    p = ModelParams(n_molecules=2, photon_cutoff=3)
    nd = p.n_dicke_states
    psi_b = np.array([0.6, 0.0, 0.8])
    prod = np.kron(np.eye(4)[2], psi_b)
    red = partial_trace_photon(MixedState.pure(prod), p)
    np.testing.assert_allclose(red, np.outer(psi_b, psi_b), atol=1e-14)

    corr = np.zeros(p.dim)
    corr[0 * nd + 0] = corr[1 * nd + 2] = 1 / np.sqrt(2)
    red = partial_trace_photon(MixedState.pure(corr), p)
    np.testing.assert_allclose(red, np.diag([0.5, 0, 0.5]), atol=1e-14)


def test_partial_trace_random_linear_positive():
    rng = np.random.default_rng(11)
    p = ModelParams(n_molecules=3, photon_cutoff=4)
    for _ in range(20):
        states = []
        for _ in range(2):
            rho = random_hermitian(p.dim, rng)
            rho = rho @ rho.conj().T
            rho /= np.trace(rho).real
            states.append(rho)
        red = [partial_trace_photon(MixedState.from_density_matrix(r), p) for r in states]
        assert np.trace(red[0]).real == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.eigvalsh(red[0]).min() > -1e-12
        mix = partial_trace_photon(MixedState.from_density_matrix(0.3 * states[0] + 0.7 * states[1]), p)
        assert np.max(np.abs(mix - 0.3 * red[0] - 0.7 * red[1])) < 1e-10


def test_partial_trace_dimension_mismatch():
    p = ModelParams(n_molecules=2, photon_cutoff=3)
    with pytest.raises(ValueError):
        partial_trace_photon(MixedState.pure(np.ones(5)), p)


def test_photon_distribution_normalized():
    p = ModelParams(G=0.8, n_molecules=3, photon_cutoff=40)
    eig = eigendecompose(build_hamiltonian(p))
    d = photon_distribution(thermal_state(eig, 300.0), p)
    assert d.sum() == pytest.approx(1.0, abs=1e-12)
    assert photon_distribution(eigenstate(eig, 0), p)[-1] < 1e-12

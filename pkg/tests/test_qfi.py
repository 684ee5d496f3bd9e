import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import solve_sylvester

from dicke_qfi.hilbert import ModelParams, build_collective_spins, build_hamiltonian, embedded_spins
from dicke_qfi.qfi import (
    WitnessSpec,
    entanglement_depth_bound,
    producibility_oracle,
    qfi,
    qfi_matrix,
    qfi_max,
    set_partitions,
    thresholds,
    variance_qfi,
    witness_threshold,
)
from dicke_qfi.spectral import MixedState, eigendecompose, eigenstate, thermal_state


def random_hermitian(n, rng):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def random_full_rank_state(n, rng):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T + 0.05 * np.eye(n)
    return rho / np.trace(rho).real


def sld_qfi(rho, op):
    """Reference QFI from the symmetric logarithmic derivative: rho L + L rho = 2 d rho."""
    drho = -1j * (op @ rho - rho @ op)
    sld = solve_sylvester(rho, rho, 2 * drho)
    return float(np.trace(rho @ sld @ sld).real)


def test_matches_sld_reference():
    rng = np.random.default_rng(5)
    for n in (2, 3, 5, 8):
        for _ in range(10):
            rho = random_full_rank_state(n, rng)
            op = random_hermitian(n, rng)
            assert qfi(MixedState.from_density_matrix(rho), op) == pytest.approx(sld_qfi(rho, op), rel=1e-8)


def test_pure_state_reduces_to_variance():
    rng = np.random.default_rng(6)
    for n in (2, 4, 9):
        for _ in range(20):
            psi = rng.normal(size=n) + 1j * rng.normal(size=n)
            op = random_hermitian(n, rng)
            assert abs(qfi(MixedState.pure(psi), op) - variance_qfi(psi, op)) < 1e-9


def test_ghz3():
    sz = build_collective_spins(3)[2]
    ghz = np.zeros(4)
    ghz[0] = ghz[3] = 1 / np.sqrt(2)
    assert qfi(MixedState.pure(ghz), sz) == pytest.approx(9.0, abs=1e-12)


def test_maximally_mixed_is_zero():
    rng = np.random.default_rng(7)
    op = random_hermitian(6, rng)
    assert abs(qfi(MixedState(np.full(6, 1 / 6), np.eye(6)), op)) < 1e-12


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        qfi(MixedState.pure(np.ones(3)), np.eye(4))


def test_ground_state_fisher_matrix():
    p = ModelParams(G=0.0, n_molecules=3, photon_cutoff=5)
    eig = eigendecompose(build_hamiltonian(p))
    res = qfi_max(eigenstate(eig, 0), embedded_spins(p))
    np.testing.assert_allclose(res.per_direction, np.diag([3.0, 3.0, 0.0]), atol=1e-12)
    assert res.value == pytest.approx(3.0)
    assert abs(res.direction[2]) < 1e-12


@pytest.mark.parametrize("G,kappa,temp", [(0.3, 0.0, 0.0), (1.2, 0.0, 300.0), (0.9, 1.0, 300.0)])
def test_parity_kills_off_diagonal(G, kappa, temp):
    p = ModelParams(G=G, kappa=kappa, n_molecules=3, photon_cutoff=50)
    eig = eigendecompose(build_hamiltonian(p))
    for state in (eigenstate(eig, 0), eigenstate(eig, 1), thermal_state(eig, temp)):
        f = qfi_matrix(state, embedded_spins(p))
        off = f - np.diag(np.diag(f))
        assert np.max(np.abs(off)) < 1e-10
        res = qfi_max(state, embedded_spins(p))
        assert res.value >= np.max(np.diag(f)) - 1e-12
        assert np.linalg.eigvalsh(f).min() > -1e-10


def test_thresholds_examples():
    assert thresholds(WitnessSpec.uniform(3)) == [3.0, 5.0, 9.0]
    assert witness_threshold(WitnessSpec.uniform(5), 2) == 9.0
    assert witness_threshold(WitnessSpec((1, 3, 2)), 2) == 26.0
    with pytest.raises(ValueError):
        witness_threshold(WitnessSpec.uniform(3), 4)
    with pytest.raises(ValueError):
        witness_threshold(WitnessSpec.uniform(3), 0)


def test_widths_sorted_and_validated():
    spec = WitnessSpec((0.5, 2.0, 1.0), n_total=5)
    assert spec.widths == (2.0, 1.0, 0.5)
    assert spec.n_perturbed == 3
    with pytest.raises(ValueError):
        WitnessSpec((1.0, -0.1))
    with pytest.raises(ValueError):
        WitnessSpec((1.0, 1.0), n_total=1)


def test_depth_bound_examples():
    spec = WitnessSpec.uniform(3)
    assert entanglement_depth_bound(3.5, spec) == 2
    assert entanglement_depth_bound(5.1, spec) == 3
    assert entanglement_depth_bound(2.9, spec) == 1
    assert entanglement_depth_bound(3.0, spec) == 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.0, 10.0), min_size=1, max_size=9))
def test_thresholds_monotone_and_zero_padding(widths):
    spec = WitnessSpec(tuple(widths))
    ths = thresholds(spec)
    assert all(b >= a - 1e-12 for a, b in zip(ths, ths[1:]))
    padded = WitnessSpec(tuple(widths) + (0.0, 0.0))
    for k in range(1, spec.n_perturbed + 1):
        assert witness_threshold(padded, k) == pytest.approx(witness_threshold(spec, k), abs=1e-12)
    assert ths[-1] == pytest.approx(sum(widths) ** 2)


def test_set_partitions_counts():
    # Bell numbers and partitions restricted to pairs
    assert sum(1 for _ in set_partitions(range(5), 5)) == 52
    assert sum(1 for _ in set_partitions(range(4), 2)) == 10
    assert sum(1 for _ in set_partitions(range(4), 1)) == 1


def test_oracle_examples():
    assert producibility_oracle([1, 1, 1], 2) == pytest.approx(5.0)
    assert producibility_oracle([1, 1, 1, 1], 2) == pytest.approx(8.0)
    w = [0.3, 1.7, 0.9, 1.1]
    assert producibility_oracle(w, 4, seed=2) == pytest.approx(sum(w) ** 2)
    with pytest.raises(ValueError):
        producibility_oracle([1] * 9, 2)


def test_oracle_equivalence_small():
    rng = np.random.default_rng(21)
    for n in range(1, 6):
        w = rng.uniform(0.1, 2.0, n)
        for k in range(1, n + 1):
            assert producibility_oracle(w, k, seed=n) == pytest.approx(
                witness_threshold(WitnessSpec(tuple(w)), k), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2 ** 31))
def test_width_bound_hypothesis(n, seed):
    rng = np.random.default_rng(seed)
    rho = random_full_rank_state(n, rng)
    op = random_hermitian(n, rng)
    lam = np.linalg.eigvalsh(op)
    assert qfi(MixedState.from_density_matrix(rho), op) <= (lam[-1] - lam[0]) ** 2 + 1e-9

"""Unit tests for the truncated Fock-space core."""

import math

import numpy as np
import pytest

from gbsqrc import fock


def test_space_spec_dim_and_validation():
    assert fock.SpaceSpec(5, 4).dim == 1024
    assert fock.SpaceSpec(1, 2).dim == 2
    with pytest.raises(fock.FockSpaceError):
        fock.SpaceSpec(0, 4)
    with pytest.raises(fock.FockSpaceError):
        fock.SpaceSpec(3, 1)


def test_occupations_mode0_most_significant():
    space = fock.SpaceSpec(2, 3)
    occ = fock.occupations(space)
    assert occ.shape == (9, 2)
    # flat index i = 3*n0 + n1
    assert list(occ[0]) == [0, 0]
    assert list(occ[1]) == [0, 1]
    assert list(occ[3]) == [1, 0]
    assert fock.flat_index((2, 1), space) == 7


def test_vacuum_and_fock_state():
    v = fock.vacuum(fock.SpaceSpec(3, 4))
    assert v.amplitudes[0] == 1.0
    assert v.norm_sq == 1.0
    f2 = fock.fock_state(2, 4)
    assert fock.expect((0,), f2) == pytest.approx(2.0)
    with pytest.raises(fock.FockSpaceError):
        fock.fock_state(4, 4)


@pytest.mark.parametrize("r", [0.1, 0.25, 0.299])
def test_squeezed_vacuum_mean_photon(r):
    """<n> = sinh^2(r) at a padded cutoff."""
    d = 16
    col = fock.squeezer_matrix(r, d, r_max=0.5)[:, 0]
    state = fock.PureState(col, fock.SpaceSpec(1, d))
    assert fock.expect((0,), state) == pytest.approx(math.sinh(r) ** 2, abs=1e-5)


def test_squeezer_odd_components_vanish():
    col = fock.squeezer_matrix(0.25, 8, r_max=0.5)[:, 0]
    assert np.allclose(col[1::2], 0.0, atol=1e-14)


def test_squeezer_cap_enforced():
    with pytest.raises(fock.FockSpaceError):
        fock.squeezer_matrix(0.35, 4)
    # at the cap itself it works
    fock.squeezer_matrix(fock.DEFAULT_R_MAX, 4)


def test_squeezed_vacuum_leakage_at_cap():
    """Truncation loss of one squeezed mode at the 2.6 dB cap, d=4."""
    col = fock.squeezer_matrix(fock.DEFAULT_R_MAX, 4)[:, 0]
    state = fock.PureState(col, fock.SpaceSpec(1, 4))
    assert 0.0 < state.leakage < 3e-3


@pytest.mark.parametrize("alpha", [0.3, 0.7, 1.0])
def test_coherent_mean_photon(alpha):
    state = fock.coherent_state(alpha, 30)
    assert fock.expect((0,), state) == pytest.approx(alpha**2, abs=1e-6)


@pytest.mark.parametrize("nbar", [0.2, 0.5, 1.0])
def test_thermal_mean_photon(nbar):
    state = fock.thermal_state(nbar, 40)
    assert state.trace == pytest.approx(1.0, abs=1e-12)
    assert fock.expect((0,), state) == pytest.approx(nbar, abs=1e-4)


def test_even_cat_normalized_and_even():
    state = fock.even_cat_state(0.8, 20)
    assert state.norm_sq == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(state.amplitudes[1::2], 0.0, atol=1e-14)


def test_calibrate_mean_photon_round_trip():
    for family in ("coherent", "cat", "thermal"):
        target = 0.6
        param = fock.calibrate_mean_photon(family, target, 4)
        state = fock.single_mode_state(family, param, 4)
        assert fock.mean_photon(state) == pytest.approx(target, abs=1e-6)
    assert fock.calibrate_mean_photon("fock", 2.0, 4) == 2.0
    with pytest.raises(fock.FockSpaceError):
        fock.calibrate_mean_photon("fock", 1.5, 4)


def test_tensor_pure_and_mixed():
    f1 = fock.fock_state(1, 3)
    f0 = fock.fock_state(0, 3)
    pure = fock.tensor([f1, f0])
    assert isinstance(pure, fock.PureState)
    assert pure.amplitudes[fock.flat_index((1, 0), pure.space)] == 1.0
    mixed = fock.tensor([f1, fock.thermal_state(0.5, 3)])
    assert isinstance(mixed, fock.DensityOperator)
    assert mixed.trace == pytest.approx(1.0, abs=1e-12)


def test_tensor_cutoff_mismatch():
    with pytest.raises(fock.FockSpaceError):
        fock.tensor([fock.fock_state(0, 3), fock.fock_state(0, 4)])


def test_annihilation_and_number():
    a = fock.annihilation_matrix(4)
    n = fock.number_matrix(4)
    assert np.allclose(a.conj().T @ a, n)
    # [a, a_dag] = 1 away from the cutoff edge
    comm = a @ a.conj().T - a.conj().T @ a
    assert np.allclose(np.diag(comm)[:-1], 1.0)


def test_quadrature_vacuum_variance():
    """<x^2> = 1/2 on vacuum in the symmetric hbar=1 convention."""
    x = fock.quadrature_matrix(10)
    v = fock.vacuum(fock.SpaceSpec(1, 10))
    assert fock.expect_operator([x @ x], v) == pytest.approx(0.5, abs=1e-12)


def test_apply_single_mode_matches_kron():
    rng = np.random.default_rng(7)
    d = 3
    space = fock.SpaceSpec(2, d)
    psi = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    state = fock.PureState(psi, space)
    op = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    out = fock.apply_single_mode(op, 1, state)
    expected = np.kron(np.eye(d), op) @ psi
    assert np.allclose(out.amplitudes, expected, atol=1e-12)
    out0 = fock.apply_single_mode(op, 0, state)
    expected0 = np.kron(op, np.eye(d)) @ psi
    assert np.allclose(out0.amplitudes, expected0, atol=1e-12)


def test_apply_two_mode_matches_kron():
    rng = np.random.default_rng(8)
    d = 3
    space = fock.SpaceSpec(3, d)
    psi = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    state = fock.PureState(psi, space)
    op = rng.standard_normal((d * d, d * d)) + 1j * rng.standard_normal((d * d, d * d))
    out = fock.apply_two_mode(op, 0, 1, state)
    expected = np.kron(op, np.eye(d)) @ psi
    assert np.allclose(out.amplitudes, expected, atol=1e-12)


def test_apply_density_is_conjugation():
    rng = np.random.default_rng(9)
    d = 3
    space = fock.SpaceSpec(2, d)
    psi = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    psi /= np.linalg.norm(psi)
    rho = fock.to_density(fock.PureState(psi, space))
    op = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    out = fock.apply_single_mode(op, 0, rho)
    full = np.kron(op, np.eye(d))
    assert np.allclose(out.matrix, full @ rho.matrix @ full.conj().T, atol=1e-12)


def test_expect_divides_by_remaining_norm():
    space = fock.SpaceSpec(1, 4)
    amps = np.zeros(4, dtype=complex)
    amps[1] = 0.5  # norm^2 = 0.25, leaked state
    state = fock.PureState(amps, space)
    assert state.leakage == pytest.approx(0.75)
    assert fock.expect((0,), state) == pytest.approx(1.0)


def test_expect_operator_pure_vs_density():
    rng = np.random.default_rng(10)
    d = 4
    space = fock.SpaceSpec(2, d)
    psi = rng.standard_normal(space.dim) + 1j * rng.standard_normal(space.dim)
    psi /= np.linalg.norm(psi)
    pure = fock.PureState(psi, space)
    ops = [fock.quadrature_matrix(d) @ fock.quadrature_matrix(d),
           fock.number_matrix(d)]
    a = fock.expect_operator(ops, pure)
    b = fock.expect_operator(ops, fock.to_density(pure))
    assert a == pytest.approx(b, abs=1e-12)


def test_sample_fock_statistics_and_determinism():
    state = fock.tensor([fock.fock_state(1, 3), fock.even_cat_state(0.9, 3)])
    shots = fock.sample_fock(state, 4000, seed=3)
    assert shots.shape == (4000, 2)
    assert np.all(shots[:, 0] == 1)  # first mode is |1> exactly
    p = fock.fock_probabilities(state)
    occ = fock.occupations(state.space)
    mean2 = float(p @ occ[:, 1])
    assert shots[:, 1].mean() == pytest.approx(mean2, abs=0.05)
    assert np.array_equal(shots, fock.sample_fock(state, 4000, seed=3))


def test_reduced_density_partial_trace():
    f1 = fock.fock_state(1, 3)
    cat = fock.even_cat_state(0.8, 3)
    state = fock.tensor([f1, cat])
    red0 = fock.reduced_density(state, (0,))
    assert np.allclose(red0.matrix, fock.to_density(f1).matrix, atol=1e-12)
    red1 = fock.reduced_density(state, (1,))
    assert np.allclose(red1.matrix, fock.to_density(cat).matrix, atol=1e-12)


def test_size_limits_enforced():
    with pytest.raises(fock.FockSpaceError):
        fock.vacuum(fock.SpaceSpec(21, 2))  # 2^21 > pure limit
    with pytest.raises(fock.FockSpaceError):
        fock.to_density(fock.vacuum(fock.SpaceSpec(15, 2)))  # 2^15 > density side

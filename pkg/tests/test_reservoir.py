"""Unit tests for the reservoir: encoding, circuit output, feature extraction."""

import numpy as np
import pytest

from gbsqrc import fock
from gbsqrc.reservoir import (
    FeatureVector,
    LeakageError,
    Reservoir,
    ReservoirConfig,
    add_uniform_noise,
    encode_classical,
    feature_subsets,
)


@pytest.fixture(scope="module")
def reservoir():
    return Reservoir(ReservoirConfig())


def test_feature_subsets_order_and_count():
    subs = feature_subsets(5)
    assert len(subs) == 31
    assert subs[0] == (0,)
    assert subs[4] == (4,)
    assert subs[5] == (0, 1)
    assert subs[-1] == (0, 1, 2, 3, 4)
    sizes = [len(s) for s in subs]
    assert sizes == sorted(sizes)


def test_config_validation():
    with pytest.raises(ValueError):
        ReservoirConfig(n_features=32)
    with pytest.raises(ValueError):
        ReservoirConfig(n_features=0)
    with pytest.raises(ValueError):
        ReservoirConfig(r_max=0.0)
    round_trip = ReservoirConfig().to_dict()
    assert round_trip["modes"] == 5 and round_trip["n_features"] == 31


def test_encode_classical_bounds():
    cfg = ReservoirConfig()
    rs = encode_classical(np.array([0, 0.5, 1, 0.25, 0.75]), cfg)
    assert rs[2] == pytest.approx(cfg.r_max)
    assert rs[0] == 0.0
    with pytest.raises(ValueError):
        encode_classical(np.array([0, 0, 0, 0, 1.2]), cfg)
    with pytest.raises(ValueError):
        encode_classical(np.array([0, 0, 0, 0, -0.1]), cfg)
    with pytest.raises(ValueError):
        encode_classical(np.zeros(4), cfg)


def test_encode_classical_extended_cap():
    cfg = ReservoirConfig(r_cap=1.2 * ReservoirConfig().r_max)
    rs = encode_classical(np.array([1.2, 0, 0, 0, 0]), cfg)
    assert rs[0] == pytest.approx(1.2 * cfg.r_max)


def test_input_vector_is_squeezer_product(reservoir):
    x = np.array([0.2, 0.0, 1.0, 0.5, 0.0])
    vec = reservoir.input_vector(x)
    d = reservoir.config.cutoff
    expected = np.array([1.0 + 0j])
    for xi in x:
        col = fock.squeezer_matrix(xi * reservoir.config.r_max, d)[:, 0]
        expected = np.kron(expected, col)
    assert np.allclose(vec, expected, atol=1e-14)


def test_run_exact_matches_expectation_oracle(reservoir):
    """Features equal photon-number-product expectations of the output state."""
    from gbsqrc.interferometer import apply_interferometer
    x = np.array([0.8, 0.3, 0.6, 0.1, 0.9])
    fv = reservoir.run_exact(x=x)
    state = fock.PureState(reservoir.input_vector(x), reservoir.space)
    out = apply_interferometer(reservoir.plan, state, conservation_warn=False)
    oracle = np.array([fock.expect(s, out) for s in reservoir.subsets])
    assert np.max(np.abs(fv.values - oracle)) < 1e-12
    assert fv.provenance == "exact"


def test_output_probabilities_argument_validation(reservoir):
    with pytest.raises(ValueError):
        reservoir.output_probabilities()
    with pytest.raises(ValueError):
        reservoir.output_probabilities(x=np.zeros(5),
                                       state=fock.vacuum(reservoir.space))


def test_injected_state_and_mixture_paths_agree(reservoir):
    """A pure product state injected directly, as a density, and as a
    one-component mixture all give the same probabilities."""
    factors = [fock.fock_state(1, 4), fock.even_cat_state(0.7, 4),
               fock.fock_state(0, 4), fock.fock_state(0, 4), fock.fock_state(0, 4)]
    pure = fock.tensor(factors)
    p1, t1 = reservoir.output_probabilities(state=pure)
    p2, t2 = reservoir.output_probabilities(state=fock.to_density(pure))
    p3, t3 = reservoir.output_probabilities(
        pure_components=[(1.0, pure.amplitudes)])
    assert np.allclose(p1, p2, atol=1e-12) and np.allclose(p1, p3, atol=1e-12)
    assert t1 == pytest.approx(t2, abs=1e-12)


def test_batch_features_match_single_runs(reservoir):
    xs = np.array([[0.1, 0.9, 0.4, 0.0, 0.7],
                   [1.0, 1.0, 1.0, 1.0, 1.0],
                   [0.0, 0.0, 0.0, 0.0, 0.0]])
    batch = reservoir.batch_features(xs)
    for i, x in enumerate(xs):
        assert np.allclose(batch[i], reservoir.run_exact(x=x).values, atol=1e-13)


def test_run_sampled_converges_and_is_seeded(reservoir):
    x = np.array([0.7, 0.7, 0.7, 0.7, 0.7])
    exact = reservoir.run_exact(x=x).values
    fv = reservoir.run_sampled(x=x, n_shots=200_000, seed=1)
    assert fv.provenance == "sampled(200000)"
    assert np.max(np.abs(fv.values - exact)) < 0.05
    again = reservoir.run_sampled(x=x, n_shots=200_000, seed=1)
    assert np.array_equal(fv.values, again.values)
    other = reservoir.run_sampled(x=x, n_shots=200_000, seed=2)
    assert not np.array_equal(fv.values, other.values)


def test_n_features_truncation(reservoir):
    x = np.full(5, 0.5)
    full = reservoir.run_exact(x=x).values
    head = reservoir.run_exact(x=x, n_features=10).values
    assert np.allclose(head, full[:10], rtol=0, atol=1e-15)


def test_leakage_error_with_tight_threshold():
    res = Reservoir(ReservoirConfig(leakage_threshold=1e-6))
    with pytest.raises(LeakageError):
        res.output_probabilities(x=np.ones(5))


def test_add_uniform_noise():
    fv = FeatureVector(np.zeros(31), "exact")
    noisy = add_uniform_noise(fv, 0.1, seed=0)
    assert noisy.provenance == "noisy(0.1)"
    assert np.max(np.abs(noisy.values)) <= 0.1
    assert not np.array_equal(noisy.values, add_uniform_noise(fv, 0.1, seed=1).values)
    clean = add_uniform_noise(fv, 0.0, seed=0)
    assert np.array_equal(clean.values, fv.values)
    with pytest.raises(ValueError):
        add_uniform_noise(fv, -0.1, seed=0)

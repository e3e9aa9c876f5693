import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from rpms.model import (ChainState, ClusterParams, Dataset, Hyperparameters,
                        SamplerConfig, beta_variates, initial_state,
                        log_covariate_density, log_response_density,
                        sample_base_measure)


def test_response_density_zero_residual():
    assert log_response_density(0.0, [1.0, 0.0], [0.0, 0.0], 1.0) == \
        pytest.approx(-0.5 * math.log(2 * math.pi))


def test_response_density_unit_residual():
    assert log_response_density(1.0, [1.0], [0.0], 1.0) == \
        pytest.approx(-0.5 * math.log(2 * math.pi) - 0.5)


def test_response_density_matches_scipy_normal():
    x = np.array([1.0, 0.0, 1.0])
    beta = np.array([0.5, 9.0, -0.2])
    lam = 4.0
    # precision 4 means standard deviation 1/2
    expected = stats.norm(loc=0.3, scale=0.5).logpdf(2.3)
    assert log_response_density(2.3, x, beta, lam) == pytest.approx(expected,
                                                                    rel=1e-12)


@pytest.mark.parametrize("bad", [
    dict(y=np.nan), dict(lam=0.0), dict(lam=-1.0), dict(beta=[np.inf]),
])
def test_response_density_rejects_bad_input(bad):
    args = dict(y=1.0, x=[1.0], beta=[0.5], lam=1.0)
    args.update(bad)
    with pytest.raises(ValueError):
        log_response_density(**args)


def test_response_density_dimension_mismatch():
    with pytest.raises(ValueError):
        log_response_density(0.0, [1.0, 1.0], [1.0], 1.0)


@pytest.mark.parametrize("lam", [0.3, 1.0, 7.5])
def test_response_density_integrates_to_one(lam):
    x = np.array([1.0, 1.0, 0.0])
    beta = np.array([0.4, -1.3, 2.0])
    mean = x @ beta
    sd = 1 / math.sqrt(lam)
    total, _ = integrate.quad(
        lambda y: math.exp(log_response_density(y, x, beta, lam)),
        mean - 40 * sd, mean + 40 * sd, points=[mean], epsabs=1e-12)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_covariate_density_examples():
    assert log_covariate_density([1, 0, 1], [0.5, 0.5, 0.5]) == \
        pytest.approx(3 * math.log(0.5))
    assert log_covariate_density([1], [0.2]) == pytest.approx(math.log(0.2))


def test_covariate_density_term_by_term():
    x = [1, 1, 0, 0]
    zeta = [0.9, 0.1, 0.9, 0.1]
    by_hand = math.log(0.9) + math.log(0.1) + math.log(0.1) + math.log(0.9)
    assert log_covariate_density(x, zeta) == pytest.approx(by_hand, rel=1e-14)


@pytest.mark.parametrize("zeta", [[0.0], [1.0], [1.2], [np.nan]])
def test_covariate_density_rejects_boundary(zeta):
    with pytest.raises(ValueError):
        log_covariate_density([1], zeta)


@pytest.mark.parametrize("D", [1, 4, 10])
def test_covariate_density_sums_to_one(D):
    zeta = np.random.default_rng(D).uniform(0.05, 0.95, D)
    total = sum(math.exp(log_covariate_density(x, zeta))
                for x in itertools.product([0, 1], repeat=D))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_base_measure_pure_spike():
    # w_omega = 1 - 1e-12 and pi = 1 makes the spike certain in practice
    hyper = Hyperparameters(a_omega=1.0, b_omega=1e-12)
    rng = np.random.default_rng(0)
    for _ in range(200):
        c = sample_base_measure(hyper, np.ones(5), np.ones(5), rng)
        assert np.all(c.beta == 0)
        assert np.all((c.zeta > 0) & (c.zeta < 1))


def test_base_measure_pure_slab():
    rng = np.random.default_rng(1)
    draws = [sample_base_measure(Hyperparameters(), np.zeros(4), np.ones(4),
                                 rng).beta for _ in range(500)]
    assert np.all(np.array(draws) != 0)


def test_base_measure_spike_frequency():
    hyper = Hyperparameters(a_omega=3.0, b_omega=1.0)   # w_omega = 0.75
    pi = np.full(1, 0.4)                                # spike prob 0.3
    rng = np.random.default_rng(2)
    draws = np.array([sample_base_measure(hyper, pi, np.ones(1), rng).beta[0]
                      for _ in range(10_000)])
    freq = np.mean(draws == 0)
    sigma = math.sqrt(0.3 * 0.7 / 10_000)
    assert abs(freq - 0.3) < 3 * sigma


def test_base_measure_ssp_has_no_zeta():
    c = sample_base_measure(Hyperparameters(), [0.5], [1.0],
                            np.random.default_rng(0), mode="ssp")
    assert c.zeta is None


def test_base_measure_slab_moments():
    hyper = Hyperparameters(m=(2.0,))
    rng = np.random.default_rng(3)
    beta = np.array([sample_base_measure(hyper, [0.0], [4.0], rng).beta[0]
                     for _ in range(5000)])
    assert beta.mean() == pytest.approx(2.0, abs=4 * 0.5 / math.sqrt(5000))
    assert beta.std() == pytest.approx(0.5, rel=0.05)


@pytest.mark.parametrize("a,b", [(1.0, 1.0), (1.0, 3.0), (2.5, 1.0),
                                 (2.0, 5.0)])
def test_beta_variates_match_distribution(a, b):
    draws = beta_variates(a, b, np.random.default_rng(4), 20_000)
    assert stats.kstest(draws, stats.beta(a, b).cdf).statistic < 0.015


def test_densities_are_deterministic():
    args = (1.7, [1.0, 0.0], [0.3, 0.2], 2.0)
    assert log_response_density(*args) == log_response_density(*args)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=12),
       st.floats(1e-6, 1 - 1e-6))
def test_covariate_density_is_nonpositive(x, z):
    assert log_covariate_density(x, [z] * len(x)) <= 0.0


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset([1.0, 2.0], [[0, 1]])
    with pytest.raises(ValueError):
        Dataset([1.0], [[0, 2]])
    with pytest.raises(ValueError):
        Dataset([np.inf], [[0]])
    with pytest.raises(ValueError):
        Dataset([1.0], np.zeros((1, 0)))
    data = Dataset([1.0, 2.0], [[0, 1], [1, 1]])
    assert (data.n, data.D) == (2, 2)
    assert data.names == ("x1", "x2")


def test_dataset_checksum_tracks_content():
    a = Dataset([1.0, 2.0], [[0, 1], [1, 1]])
    b = Dataset([1.0, 2.0], [[0, 1], [1, 1]])
    c = Dataset([1.0, 2.5], [[0, 1], [1, 1]])
    assert a.checksum() == b.checksum() != c.checksum()


def test_hyperparameter_defaults_and_validation():
    h = Hyperparameters()
    assert (h.a_omega, h.b_omega, h.a_pi, h.b_pi) == (1.0, 0.15, 1.0, 0.15)
    assert h.M == 100
    assert 0 < h.w_omega < 1
    assert np.all(h.slab_means(3) == 0)
    with pytest.raises(ValueError):
        Hyperparameters(a_tau=0.0)
    with pytest.raises(ValueError):
        Hyperparameters(M=0)
    with pytest.raises(ValueError):
        Hyperparameters(m=(1.0,)).slab_means(2)


def test_sampler_config_validation():
    assert SamplerConfig().n_samples == 9000
    with pytest.raises(ValueError):
        SamplerConfig(iterations=10, burn_in=10)
    with pytest.raises(ValueError):
        SamplerConfig(grid_size=50)
    with pytest.raises(ValueError):
        SamplerConfig(mode="other")


def test_cluster_params_validation():
    with pytest.raises(ValueError):
        ClusterParams([0.0, 1.0], [0.5, 1.0])
    with pytest.raises(ValueError):
        ClusterParams([np.nan])


def test_initial_state():
    data = Dataset([0.1, 0.2, 0.3], [[0, 1], [1, 1], [0, 0]])
    hyper = Hyperparameters()
    st_ = initial_state(data, hyper)
    st_.validate(data.n, data.D)
    assert st_.k == 1 and np.all(st_.beta == 0) and np.all(st_.zeta == 0.5)
    assert st_.lam == 1.0 and st_.alpha == 1.0
    assert np.allclose(st_.pi, 1 / 1.15) and np.allclose(st_.tau, 1.0)
    assert initial_state(data, hyper, "ssp").zeta is None


def test_chain_state_validation_catches_empty_cluster():
    st_ = ChainState(np.array([0, 2]), np.zeros((3, 1)), None, 1.0, 1.0,
                     np.array([0.5]), np.array([1.0]))
    with pytest.raises(ValueError):
        st_.validate()

import itertools

import numpy as np
import pytest

from conftest import make_state, make_trace, random_trace
from rpms.model import Dataset, Hyperparameters, SamplerConfig
from rpms.sampler import run_conditional_chain
from rpms.summaries import (Partition, binder_loss, binder_partition,
                            coclustering, global_exclusion_probability,
                            inclusion_probabilities, posterior_k,
                            predict_coefficients_and_response, predict_cluster)


def _snap(s, D=1):
    s = np.asarray(s)
    k = s.max() + 1
    return make_state(s, np.zeros((k, D)), zeta=np.full((k, D), 0.5))


# -- co-clustering ----------------------------------------------------------------

def test_coclustering_single_cluster_is_all_ones():
    gamma = coclustering(make_trace([_snap([0, 0, 0])])).gamma
    assert np.array_equal(gamma, np.ones((3, 3)))


def test_coclustering_two_snapshots():
    gamma = coclustering(make_trace([_snap([0, 0]), _snap([0, 1])])).gamma
    assert gamma[0, 1] == 0.5 and gamma[0, 0] == 1.0


def test_coclustering_matches_pairwise_recount():
    trace = random_trace(5, 2, 40, seed=0)
    gamma = coclustering(trace).gamma
    for i, j in itertools.product(range(5), repeat=2):
        count = sum(st.s[i] == st.s[j] for st in trace)
        assert gamma[i, j] == pytest.approx(count / len(trace))


def test_coclustering_ignores_label_names():
    a = coclustering(make_trace([_snap([0, 1, 1, 2])])).gamma
    b = coclustering(make_trace([_snap([2, 0, 0, 1])])).gamma
    assert np.array_equal(a, b)


def test_summaries_reject_empty_trace():
    empty = make_trace([])
    for fn in (coclustering, binder_partition, posterior_k):
        with pytest.raises(ValueError):
            fn(empty)


# -- Binder -----------------------------------------------------------------------

def test_binder_identical_snapshots():
    trace = make_trace([_snap([0, 1, 1, 0])] * 4)
    part = binder_partition(trace)
    assert np.array_equal(part.labels, [0, 1, 1, 0])
    assert part.loss == 0.0


def _brute_force_loss(labels, gamma, l1, l2):
    total = 0.0
    n = len(labels)
    for i in range(n):
        for j in range(i + 1, n):
            if labels[i] == labels[j]:
                total += l2 * (1 - gamma[i, j])
            else:
                total += l1 * gamma[i, j]
    return total


@pytest.mark.parametrize("l1,l2", [(1.0, 1.0), (1.0, 3.0), (2.5, 0.5)])
def test_binder_choice_is_minimal_over_snapshots(l1, l2):
    trace = random_trace(6, 1, 25, seed=1)
    gamma = coclustering(trace).gamma
    part = binder_partition(trace, l1, l2)
    losses = [_brute_force_loss(st.s, gamma, l1, l2) for st in trace]
    assert part.loss == pytest.approx(min(losses))
    assert part.index == int(np.argmin(losses))
    assert binder_loss(part.labels, gamma, l1, l2) == pytest.approx(part.loss)


def test_binder_loss_weights():
    # gamma_01 = 0.8: splitting costs 0.8 * l1, joining costs 0.2 * l2
    gamma = np.array([[1.0, 0.8], [0.8, 1.0]])
    assert binder_loss([0, 1], gamma, l1=2.0) == pytest.approx(1.6)
    assert binder_loss([0, 0], gamma, l2=3.0) == pytest.approx(0.6)


def test_binder_labels_are_contiguous():
    trace = make_trace([_snap([2, 2, 0, 0])])
    part = binder_partition(trace)
    assert np.array_equal(part.labels, [1, 1, 0, 0]) and part.k == 2
    assert np.array_equal(part.sizes, [2, 2])


def test_posterior_k():
    trace = make_trace([_snap([0, 0]), _snap([0, 1]), _snap([0, 1])])
    assert posterior_k(trace) == pytest.approx({1: 1 / 3, 2: 2 / 3})


# -- inclusion --------------------------------------------------------------------

def test_inclusion_strong_effect_single_covariate():
    rng = np.random.default_rng(2)
    X = np.ones((100, 1))
    data = Dataset(3.0 * X[:, 0] + rng.standard_normal(100), X)
    inc = inclusion_probabilities(data, Hyperparameters(), np.zeros(100, int),
                                  SamplerConfig(iterations=600, burn_in=100))
    assert inc.shape == (1, 1) and inc[0, 0] > 0.95


def test_inclusion_absent_covariate_follows_prior():
    # Covariate 1 is never active, so at every step its coefficient is zero
    # with probability pi_1 * w_omega given that step's pi_1.
    rng = np.random.default_rng(3)
    X = np.column_stack([np.ones(60), np.zeros(60)])
    data = Dataset(X[:, 0] + 0.5 * rng.standard_normal(60), X)
    hyper = Hyperparameters()
    trace = run_conditional_chain(data, hyper,
                                  SamplerConfig(iterations=6000, burn_in=200,
                                                seed=4), np.zeros(60, int))
    included = np.mean([st.beta[0, 1] != 0 for st in trace])
    expected = 1 - hyper.w_omega * np.mean([st.pi[1] for st in trace])
    assert abs(included - expected) < 0.03


def test_inclusion_shape_and_bounds(small_data):
    labels = np.arange(small_data.n) % 2
    inc = inclusion_probabilities(small_data, Hyperparameters(M=5), labels,
                                  SamplerConfig(iterations=50, burn_in=10))
    assert inc.shape == (2, small_data.D)
    assert np.all((inc >= 0) & (inc <= 1))


def test_inclusion_rejects_wrong_size(small_data):
    with pytest.raises(ValueError):
        inclusion_probabilities(small_data, Hyperparameters(), np.zeros(3, int),
                                SamplerConfig(iterations=5, burn_in=0))


# -- prediction -------------------------------------------------------------------

def test_predict_cluster_hand_evaluation():
    hyper = Hyperparameters()
    state = make_state([0, 0, 0, 1], [[0.0, 0.0], [0.0, 0.0]],
                       zeta=[[0.8, 0.3], [0.2, 0.6]], alpha=0.5)
    x = [1, 0]
    w = np.array([3 * 0.8 * 0.7, 1 * 0.2 * 0.4, 0.5 * 0.5 * 0.5])
    assert np.allclose(predict_cluster(x, state, hyper), w / w.sum())


def test_predict_cluster_prior_predictive_factor():
    hyper = Hyperparameters(a_zeta=3.0, b_zeta=1.0)
    state = make_state([0], [[0.0]], zeta=[[0.5]], alpha=1.0)
    w1 = predict_cluster([1], state, hyper)
    w0 = predict_cluster([0], state, hyper)
    assert w1[1] / w1[0] == pytest.approx(0.75 / 0.5)
    assert w0[1] / w0[0] == pytest.approx(0.25 / 0.5)


def test_predict_cluster_ssp_uses_sizes_only():
    state = make_state([0, 0, 1], [[0.0], [1.0]], alpha=1.0)
    assert np.allclose(predict_cluster([1], state, Hyperparameters()),
                       [0.5, 0.25, 0.25])


def test_predict_cluster_relabeling_permutes_weights():
    state = make_state([0, 0, 1, 2, 2, 2], np.zeros((3, 2)),
                       zeta=[[0.9, 0.2], [0.4, 0.4], [0.1, 0.7]], alpha=0.7)
    perm = np.array([2, 0, 1])                 # old label j becomes perm[j]
    relabeled = make_state(perm[state.s], np.zeros((3, 2)),
                           zeta=state.zeta[np.argsort(perm)], alpha=0.7)
    w = predict_cluster([1, 0], state, Hyperparameters())
    w_r = predict_cluster([1, 0], relabeled, Hyperparameters())
    assert np.allclose(w_r[perm], w[:3]) and w_r[3] == pytest.approx(w[3])
    assert w.sum() == pytest.approx(1.0)


def test_predict_cluster_rejects_wrong_length():
    state = make_state([0], [[0.0, 0.0]], zeta=[[0.5, 0.5]])
    with pytest.raises(ValueError):
        predict_cluster([1], state, Hyperparameters())


def test_predictive_picks_matching_cluster_most_often():
    states = [make_state([0] * 5 + [1] * 5, [[2.0], [-2.0]],
                         zeta=[[0.95], [0.05]], alpha=0.1)] * 3000
    draws = predict_coefficients_and_response(
        [1], make_trace(states), Hyperparameters(), np.random.default_rng(5))
    counts = np.bincount(draws.cluster_label, minlength=3)
    assert counts.argmax() == 0


def test_predictive_degenerate_single_cluster():
    states = [make_state([0, 0], [[1.5, -0.5]], zeta=[[0.5, 0.5]], lam=4.0,
                         alpha=1e-300)] * 20_000
    draws = predict_coefficients_and_response(
        [1, 1], make_trace(states), Hyperparameters(), np.random.default_rng(6))
    assert np.all(draws.beta_tilde == [1.5, -0.5])
    assert not draws.new_cluster.any()
    n = draws.y_tilde.size
    assert abs(draws.y_tilde.mean() - 1.0) < 4 * 0.5 / np.sqrt(n)
    assert draws.y_tilde.std() == pytest.approx(0.5, rel=0.03)


def test_predictive_response_tracks_coefficients():
    trace = random_trace(8, 3, 4000, seed=7)
    x = np.array([1.0, 0.0, 1.0])
    draws = predict_coefficients_and_response(x, trace, Hyperparameters(),
                                              np.random.default_rng(8))
    diff = draws.y_tilde - draws.beta_tilde @ x
    assert abs(diff.mean()) < 4 * diff.std() / np.sqrt(diff.size)


# -- global exclusion -------------------------------------------------------------

def test_global_exclusion_counting():
    a = make_state([0, 1], [[0.0, 1.0], [0.0, 0.0]])
    b = make_state([0, 1], [[0.0, 0.0], [0.0, 2.0]])
    c = make_state([0, 0], [[0.0, 0.0]])
    trace = make_trace([a, c])
    assert global_exclusion_probability(trace, 0) == 1.0
    assert global_exclusion_probability(trace, 1) == 0.5
    assert global_exclusion_probability(make_trace([a, b, c]), 1) == \
        pytest.approx(1 / 3)


def test_global_exclusion_matches_recount():
    trace = random_trace(6, 4, 50, seed=9)
    for d in range(4):
        count = sum(all(st.beta[j, d] == 0 for j in range(st.k)) for st in trace)
        assert global_exclusion_probability(trace, d) == count / 50


def test_global_exclusion_index_out_of_range():
    trace = random_trace(4, 2, 3, seed=10)
    with pytest.raises(IndexError):
        global_exclusion_probability(trace, 2)


def test_partition_properties():
    p = Partition(np.array([0, 2, 1, 2]))
    assert p.k == 3 and list(p.sizes) == [1, 1, 2]

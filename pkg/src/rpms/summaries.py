"""Posterior summaries: co-clustering, Binder partition, inclusion and prediction.

Cluster-indexed quantities are only ever read within a single snapshot, so no
label matching across snapshots is attempted.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from .model import ChainState, Dataset, Hyperparameters, SamplerConfig
from .model import draw_base
from .sampler import Trace, run_conditional_chain

__all__ = [
    "CoClusteringMatrix", "Partition", "PredictiveDraws", "coclustering",
    "binder_loss", "binder_partition", "inclusion_probabilities",
    "predict_cluster", "predict_coefficients_and_response",
    "global_exclusion_probability", "posterior_k",
]


@dataclass(frozen=True)
class CoClusteringMatrix:
    """Posterior probability that observations i and i' share a cluster."""

    gamma: np.ndarray

    @property
    def n(self):
        return self.gamma.shape[0]


@dataclass(frozen=True)
class Partition:
    """A point-estimate partition with 0-based contiguous labels."""

    labels: np.ndarray
    loss: float = float("nan")
    index: int = -1

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


@dataclass(frozen=True)
class PredictiveDraws:
    """One predictive draw per retained snapshot for a new covariate profile.

    ``cluster_label[t] == k_t`` means the profile opened a new cluster.
    """

    cluster_label: np.ndarray
    beta_tilde: np.ndarray
    y_tilde: np.ndarray
    new_cluster: np.ndarray


def _require_samples(trace):
    if len(trace) == 0:
        raise ValueError("the trace holds no samples")


def _onehot(s, k):
    z = np.zeros((s.shape[0], k))
    z[np.arange(s.shape[0]), s] = 1.0
    return z


def coclustering(trace: Trace) -> CoClusteringMatrix:
    """Fraction of snapshots in which each pair of observations is together."""
    _require_samples(trace)
    n = trace.samples[0].s.shape[0]
    acc = np.zeros((n, n))
    for st in trace:
        z = _onehot(st.s, st.k)
        acc += z @ z.T
    return CoClusteringMatrix(acc / len(trace))


def binder_loss(labels, gamma, l1: float = 1.0, l2: float = 1.0) -> float:
    """Posterior expected Binder loss of ``labels`` given co-clustering ``gamma``.

    ``l1`` prices splitting a pair that belongs together and ``l2`` joining a
    pair that does not.
    """
    labels = np.asarray(labels)
    gamma = gamma.gamma if isinstance(gamma, CoClusteringMatrix) else gamma
    same = labels[:, None] == labels[None, :]
    iu = np.triu_indices(labels.shape[0], k=1)
    same, g = same[iu], gamma[iu]
    return float(l2 * np.sum((1.0 - g)[same]) + l1 * np.sum(g[~same]))


def binder_partition(trace: Trace, l1: float = 1.0, l2: float = 1.0,
                     gamma=None) -> Partition:
    """The visited partition with the smallest expected Binder loss.

    Candidates are the snapshot partitions; ties go to the earliest snapshot.
    """
    _require_samples(trace)
    if l1 <= 0 or l2 <= 0:
        raise ValueError("loss constants must be positive")
    if gamma is None:
        gamma = coclustering(trace)
    g = gamma.gamma if isinstance(gamma, CoClusteringMatrix) else gamma
    n = g.shape[0]
    iu = np.triu_indices(n, k=1)
    g_upper = g[iu]
    # loss = l1 * sum(g) + sum over joined pairs of (l2 - (l1 + l2) g)
    base = l1 * g_upper.sum()
    weight = np.zeros((n, n))
    weight[iu] = l2 - (l1 + l2) * g_upper
    weight = weight + weight.T
    best, best_loss = -1, np.inf
    for t, st in enumerate(trace):
        z = _onehot(st.s, st.k)
        joined = 0.5 * np.sum((weight @ z) * z)
        loss = base + joined
        if best < 0 or loss < best_loss - 1e-9 * max(1.0, abs(best_loss)):
            best, best_loss = t, loss
    _, labels = np.unique(trace.samples[best].s, return_inverse=True)
    return Partition(labels, best_loss, best)


def posterior_k(trace: Trace) -> dict:
    """Posterior frequency of the number of clusters, keyed by k."""
    _require_samples(trace)
    ks, counts = np.unique(trace.k_values(), return_counts=True)
    return {int(k): c / len(trace) for k, c in zip(ks, counts)}


def inclusion_probabilities(data: Dataset, hyper: Hyperparameters,
                            partition, config: SamplerConfig) -> np.ndarray:
    """Per-cluster, per-covariate posterior probability of a nonzero coefficient.

    A separate chain is run with memberships frozen at ``partition``; the
    result is the fraction of its retained samples with ``beta_jd != 0``,
    shaped ``(k, D)``.
    """
    labels = partition.labels if isinstance(partition, Partition) else partition
    labels = np.asarray(labels)
    if labels.shape != (data.n,):
        raise ValueError(
            f"partition covers {labels.shape[0]} observations, data has {data.n}")
    trace = run_conditional_chain(data, hyper, config, labels)
    nonzero = np.mean([st.beta != 0 for st in trace], axis=0)
    return nonzero


def _prior_predictive_bernoulli(x, hyper):
    # Beta-Bernoulli marginal: P(x=1) = a / (a + b)
    p1 = hyper.a_zeta / (hyper.a_zeta + hyper.b_zeta)
    return np.where(x == 1, p1, 1.0 - p1)


def predict_cluster(x_tilde, state: ChainState,
                    hyper: Hyperparameters) -> np.ndarray:
    """Allocation probabilities of a new profile: k existing clusters, then new.

    Existing clusters weigh ``n_j * prod_d g_jd(x_d)`` and the new cluster
    ``alpha * prod_d g_0d(x_d)``, with ``g_0d`` the Beta-Bernoulli prior
    predictive.  For SSP states the covariate factors are all one.
    """
    x = np.asarray(x_tilde, dtype=float)
    sizes = state.sizes
    logw = np.append(np.log(sizes), np.log(state.alpha))
    if state.zeta is not None and x.size:
        if x.shape != (state.zeta.shape[1],):
            raise ValueError(
                f"profile has length {x.size}, expected {state.zeta.shape[1]}")
        if not np.all((x == 0) | (x == 1)):
            raise ValueError("profile entries must be 0 or 1")
        z = state.zeta
        logw[:-1] += (x * np.log(z) + (1 - x) * np.log1p(-z)).sum(axis=1)
        logw[-1] += np.log(_prior_predictive_bernoulli(x, hyper)).sum()
    return np.exp(logw - logsumexp(logw))


def predict_coefficients_and_response(x_tilde, trace: Trace,
                                      hyper: Hyperparameters,
                                      rng) -> PredictiveDraws:
    """Draw (allocation, coefficients, response) for a new profile per snapshot.

    A new-cluster allocation draws its coefficients from the base measure
    given that snapshot's ``pi`` and ``tau``.
    """
    _require_samples(trace)
    x = np.asarray(x_tilde, dtype=float)
    D = trace.samples[0].beta.shape[1]
    if x.shape != (D,):
        raise ValueError(f"profile has length {x.size}, expected {D}")
    m = hyper.slab_means(D)
    T = len(trace)
    labels = np.empty(T, dtype=np.int64)
    betas = np.empty((T, D))
    ys = np.empty(T)
    new = np.zeros(T, dtype=bool)
    for t, st in enumerate(trace):
        w = predict_cluster(x, st, hyper)
        j = min(int(np.searchsorted(np.cumsum(w), rng.random() * w.sum(),
                                    side="right")), st.k)
        if j < st.k:
            b = st.beta[j]
        else:
            b = draw_base(hyper, m, st.pi, st.tau, rng, 1, with_zeta=False)[0][0]
            new[t] = True
        labels[t] = j
        betas[t] = b
        ys[t] = x @ b + rng.standard_normal() / np.sqrt(st.lam)
    return PredictiveDraws(labels, betas, ys, new)


def global_exclusion_probability(trace: Trace, d: int) -> float:
    """Fraction of snapshots in which coefficient ``d`` is zero in every cluster."""
    _require_samples(trace)
    D = trace.samples[0].beta.shape[1]
    if not 0 <= d < D:
        raise IndexError(f"covariate index {d} out of range for D={D}")
    return float(np.mean([np.all(st.beta[:, d] == 0) for st in trace]))


def conditional_config(config: SamplerConfig, seed_offset: int = 1) -> SamplerConfig:
    """Config for the frozen-partition chain: same settings, a fresh seed."""
    return replace(config, seed=config.seed + seed_offset)

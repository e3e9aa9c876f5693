"""Gibbs sampler for the RPMS model and its SSP competitor.

One sweep updates, in order: memberships (auxiliary-parameter scheme with
``M`` candidate components), the DP concentration, covariate probabilities
(RPMS only), spike-and-slab coefficients, spike weights, slab precisions and
the regression precision.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import betainc

from .model import (RPMS, SSP, ZETA_FLOOR, ChainState, Dataset,
                    Hyperparameters, ModeError, SamplerConfig, draw_base,
                    initial_state)

logger = logging.getLogger(__name__)

__all__ = [
    "Trace", "update_membership", "update_alpha", "update_zeta",
    "update_beta", "update_pi", "update_tau", "update_lambda",
    "spike_log_bayes_factor", "slab_conditional", "sweep", "run_chain",
    "run_conditional_chain",
]


@dataclass
class Trace:
    """Post burn-in, thinned chain states of one run."""

    samples: list
    config: SamplerConfig
    dataset_hash: str
    hyper: Optional[Hyperparameters] = None
    iterations: list = field(default_factory=list)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def mode(self) -> str:
        return self.config.mode

    def k_values(self) -> np.ndarray:
        return np.array([st.k for st in self.samples])

    def scalar_series(self, name: str) -> np.ndarray:
        """Per-sample series of a label-free quantity.

        ``name`` is one of ``lambda``, ``alpha``, ``k`` or ``mean_abs_beta``.
        """
        if name == "lambda":
            return np.array([st.lam for st in self.samples])
        if name == "alpha":
            return np.array([st.alpha for st in self.samples])
        if name == "k":
            return self.k_values().astype(float)
        if name == "mean_abs_beta":
            return np.array([np.abs(st.beta).mean() for st in self.samples])
        raise KeyError(name)


def _categorical(logw, rng) -> int:
    w = np.exp(logw - logw.max())
    c = np.cumsum(w)
    j = int(np.searchsorted(c, rng.random() * c[-1], side="right"))
    return min(j, len(w) - 1)


_AUX_BLOCK = 64
ALPHA_FLOOR = 1e-300


def _aux_block(hyper, m, pi, tau, rng, X, y, lam, rows, rpms):
    """Auxiliary components and their log-likelihoods for a block of rows."""
    B, M, D = len(rows), hyper.M, X.shape[1]
    beta, zeta = draw_base(hyper, m, pi, tau, rng, B * M, with_zeta=rpms)
    beta = beta.reshape(B, M, D)
    xb = X[rows]
    r = y[rows, None] - np.einsum("bmd,bd->bm", beta, xb)
    ll = -0.5 * lam * r * r
    if rpms:
        zeta = zeta.reshape(B, M, D)
        l1z = np.log1p(-zeta)
        ll += l1z.sum(axis=2) + np.einsum("bmd,bd->bm", np.log(zeta) - l1z, xb)
    return beta, zeta, ll


def update_membership(state: ChainState, data: Dataset,
                      hyper: Hyperparameters, rng, order=None) -> ChainState:
    """Resample every membership label in turn.

    For each observation the weights are ``n_j * p(y_i | beta_j) * p(x_i | zeta_j)``
    for the occupied clusters and ``alpha / M`` times the same likelihood for
    ``M`` fresh base-measure draws.  A singleton's own parameters are recycled
    as the first auxiliary component.  Covariate factors are dropped for SSP
    states.  ``order`` optionally fixes the scan order, or restricts the pass
    to a subset of observations.

    Since pi and tau stay fixed during the pass, the auxiliary draws are made
    in blocks ahead of use; the random stream is tied to scan position.
    """
    y, X = data.y, data.X
    n, D = X.shape
    M = hyper.M
    rpms = state.zeta is not None
    m = hyper.slab_means(D)
    lam = state.lam
    log_new = math.log(state.alpha / M)
    order = np.arange(n) if order is None else np.asarray(order, dtype=np.int64)
    if (order.ndim != 1 or np.unique(order).size != order.size
            or np.any((order < 0) | (order >= n))):
        raise ValueError("order must list distinct observation indices")

    k = state.k
    cap = k + n + 1
    beta = np.zeros((cap, D))
    beta[:k] = state.beta
    counts = np.zeros(cap, dtype=np.int64)
    counts[:k] = np.bincount(state.s, minlength=k)
    s = state.s.copy()
    if rpms:
        zeta = np.full((cap, D), 0.5)
        zeta[:k] = state.zeta
        # Bernoulli log-likelihood as x.(log z - log(1-z)) + sum log(1-z)
        ldiff = np.zeros((cap, D))
        lbase = np.zeros(cap)
        ldiff[:k] = np.log(zeta[:k]) - np.log1p(-zeta[:k])
        lbase[:k] = np.log1p(-zeta[:k]).sum(axis=1)

    logw = np.empty(cap + M)
    for pos, i in enumerate(order):
        b = pos % _AUX_BLOCK
        if b == 0:
            rows = order[pos:pos + _AUX_BLOCK]
            blk_beta, blk_zeta, blk_ll = _aux_block(
                hyper, m, state.pi, state.tau, rng, X, y, lam, rows, rpms)
        aux_beta = blk_beta[b]
        aux_zeta = blk_zeta[b] if rpms else None
        aux_ll = blk_ll[b]
        xi = X[i]
        yi = y[i]
        c = s[i]
        counts[c] -= 1
        if counts[c] == 0:
            # Recycle the singleton's parameters as auxiliary component 0.
            aux_beta[0] = beta[c]
            r0 = yi - beta[c] @ xi
            aux_ll[0] = -0.5 * lam * r0 * r0
            if rpms:
                aux_zeta[0] = zeta[c]
                aux_ll[0] += lbase[c] + ldiff[c] @ xi
            last = k - 1
            if c != last:
                beta[c] = beta[last]
                counts[c] = counts[last]
                s[s == last] = c
                if rpms:
                    zeta[c] = zeta[last]
                    ldiff[c] = ldiff[last]
                    lbase[c] = lbase[last]
            counts[last] = 0
            k -= 1

        r_old = yi - beta[:k] @ xi
        lw = logw[:k + M]
        lw[:k] = np.log(counts[:k]) - 0.5 * lam * r_old * r_old
        if rpms:
            lw[:k] += lbase[:k] + ldiff[:k] @ xi
        lw[k:] = log_new + aux_ll

        j = _categorical(lw, rng)
        if j >= k:
            a = j - k
            beta[k] = aux_beta[a]
            if rpms:
                zeta[k] = aux_zeta[a]
                ldiff[k] = np.log(aux_zeta[a]) - np.log1p(-aux_zeta[a])
                lbase[k] = np.log1p(-aux_zeta[a]).sum()
            j = k
            k += 1
        s[i] = j
        counts[j] += 1

    out = state.copy()
    out.s = s
    out.beta = beta[:k].copy()
    out.zeta = zeta[:k].copy() if rpms else None
    return out


def update_alpha(state: ChainState, n: int, hyper: Hyperparameters,
                 rng) -> float:
    """Concentration update through the auxiliary Beta variable ``u``.

    With ``u ~ Beta(alpha + 1, n)`` the new value comes from a two-part Gamma
    mixture sharing the rate ``b_alpha - log u``; the first part is chosen with
    odds ``(a_alpha + k - 1) / (n * (b_alpha - log u))``.
    """
    k = state.k
    a, b = hyper.a_alpha, hyper.b_alpha
    u = rng.beta(state.alpha + 1.0, n)
    rate = b - math.log(u)
    odds = (a + k - 1.0) / (n * rate)
    shape = a + k if rng.random() < odds / (1.0 + odds) else a + k - 1.0
    # tiny shapes can underflow to an exact zero, which has no logarithm
    return max(rng.gamma(shape, 1.0 / rate), ALPHA_FLOOR)


def _cluster_sums(s, X, k):
    onehot = np.zeros((X.shape[0], k))
    onehot[np.arange(X.shape[0]), s] = 1.0
    return onehot.T @ X, onehot.sum(axis=0)


def update_zeta(state: ChainState, data: Dataset, hyper: Hyperparameters,
                rng) -> np.ndarray:
    """Conjugate Beta draw for each cluster's covariate probabilities."""
    if state.zeta is None:
        raise ModeError("zeta is not part of the SSP model")
    ones, nj = _cluster_sums(state.s, data.X, state.k)
    zeta = rng.beta(hyper.a_zeta + ones,
                    hyper.b_zeta + nj[:, None] - ones)
    return np.clip(zeta, ZETA_FLOOR, 1 - ZETA_FLOOR)


def spike_log_bayes_factor(x_col, partial_resid, lam, tau_d, m_d) -> float:
    """Log of the slab-to-spike marginal likelihood ratio for one coefficient.

    ``partial_resid`` holds ``y_i - x_i(d) . beta_j(d)`` for the cluster members,
    i.e. the residual with coordinate ``d`` taken out.
    """
    x_col = np.asarray(x_col, dtype=float)
    P = lam * float(x_col @ x_col)
    B = lam * float(x_col @ np.asarray(partial_resid, dtype=float))
    prec = tau_d + P
    num = m_d * tau_d + B
    return (0.5 * (math.log(tau_d) - math.log(prec))
            - 0.5 * tau_d * m_d * m_d + 0.5 * num * num / prec)


def slab_conditional(x_col, partial_resid, lam, tau_d, m_d):
    """Mean and precision of the coefficient given it is in the slab."""
    x_col = np.asarray(x_col, dtype=float)
    prec = tau_d + lam * float(x_col @ x_col)
    mean = (m_d * tau_d + lam * float(x_col @ partial_resid)) / prec
    return mean, prec


def _spike_probability(r, log_c):
    # r / (r + (1 - r) C), evaluated on the logit scale
    if r <= 0.0:
        return 0.0
    z = math.log(r) - math.log1p(-r) - log_c
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def update_beta(state: ChainState, data: Dataset, hyper: Hyperparameters,
                rng) -> np.ndarray:
    """Coordinate-wise spike-and-slab update of every cluster's coefficients.

    Clusters are visited in label order and coordinates ``d = 0..D-1`` in turn,
    each conditioning on the latest values of the others.
    """
    y, X = data.y, data.X
    D = X.shape[1]
    k = state.k
    m = hyper.slab_means(D)
    w = hyper.w_omega
    lam = state.lam
    tau = state.tau
    r_spike = state.pi * w
    beta = state.beta.copy()

    order = np.argsort(state.s, kind="stable")
    bounds = np.concatenate([[0], np.cumsum(np.bincount(state.s, minlength=k))])
    for j in range(k):
        idx = order[bounds[j]:bounds[j + 1]]
        Xj = X[idx]
        b = beta[j]
        resid = y[idx] - Xj @ b
        for d in range(D):
            xd = Xj[:, d]
            A = resid + xd * b[d]
            log_c = spike_log_bayes_factor(xd, A, lam, tau[d], m[d])
            theta = _spike_probability(r_spike[d], log_c)
            if rng.random() < theta:
                b[d] = 0.0
            else:
                mean, prec = slab_conditional(xd, A, lam, tau[d], m[d])
                b[d] = mean + rng.standard_normal() / math.sqrt(prec)
            resid = A - xd * b[d]
    return beta


@functools.lru_cache(maxsize=16)
def _pi_grid_prior(a, b, grid_size):
    edges = np.linspace(0.0, 1.0, grid_size + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    lower = np.diff(betainc(a, b, edges))
    upper = -np.diff(betainc(b, a, 1.0 - edges))
    mass = np.where(mid < 0.5, lower, upper)
    with np.errstate(divide="ignore"):
        prior = np.log(np.maximum(mass, 0.0))
    mid.setflags(write=False)
    prior.setflags(write=False)
    return mid, prior


def pi_grid_log_density(zeros, nonzeros, hyper: Hyperparameters,
                        grid_size: int):
    """Unnormalised log-weights of ``r = pi * w_omega`` on a uniform grid.

    Cell ``g`` covers ``pi`` in ``[g/G, (g+1)/G)`` and is represented by its
    midpoint.  Its weight is the exact prior mass of the cell times the
    likelihood ``r^zeros (1 - r)^nonzeros`` at the midpoint; the exact mass
    keeps the grid accurate when the Beta prior is unbounded at an endpoint.
    Returns ``(grid, logp)`` with ``logp`` of shape ``(len(zeros), grid_size)``.
    """
    mid, prior = _pi_grid_prior(hyper.a_pi, hyper.b_pi, grid_size)
    grid = hyper.w_omega * mid
    zeros = np.asarray(zeros, dtype=float)[:, None]
    nonzeros = np.asarray(nonzeros, dtype=float)[:, None]
    logp = prior + zeros * np.log(grid) + nonzeros * np.log1p(-grid)
    return grid, logp


def update_pi(state: ChainState, hyper: Hyperparameters, grid_size: int,
              rng) -> np.ndarray:
    """Grid inverse-CDF draw of the spike weights.

    The returned ``pi_d`` is the grid point whose normalised cumulative mass is
    nearest to a uniform variate, divided by ``w_omega``.
    """
    if grid_size < 100:
        raise ValueError("grid_size must be at least 100")
    zeros = (state.beta == 0).sum(axis=0)
    nonzeros = state.k - zeros
    grid, logp = pi_grid_log_density(zeros, nonzeros, hyper, grid_size)
    p = np.exp(logp - logp.max(axis=1, keepdims=True))
    cdf = np.cumsum(p, axis=1)
    cdf /= cdf[:, -1:]
    u = rng.random(len(zeros))
    idx = np.abs(cdf - u[:, None]).argmin(axis=1)
    return grid[idx] / hyper.w_omega


def update_tau(state: ChainState, hyper: Hyperparameters, rng) -> np.ndarray:
    """Gamma draw of each slab precision from the nonzero coefficients only."""
    D = state.beta.shape[1]
    nz = state.beta != 0
    dev = np.where(nz, state.beta - hyper.slab_means(D), 0.0)
    shape = hyper.a_tau + 0.5 * nz.sum(axis=0)
    rate = hyper.b_tau + 0.5 * (dev * dev).sum(axis=0)
    return rng.gamma(shape, 1.0 / rate)


def update_lambda(state: ChainState, data: Dataset, hyper: Hyperparameters,
                  rng) -> float:
    resid = data.y - np.einsum("ij,ij->i", data.X, state.beta[state.s])
    shape = 0.5 * data.n + hyper.a_lambda
    rate = 0.5 * float(resid @ resid) + hyper.b_lambda
    return rng.gamma(shape, 1.0 / rate)


def sweep(state: ChainState, data: Dataset, hyper: Hyperparameters, rng,
          grid_size: int = 1000, frozen_partition: bool = False) -> ChainState:
    """One full Gibbs sweep; membership and alpha are skipped when frozen."""
    if not frozen_partition:
        state = update_membership(state, data, hyper, rng)
        state.alpha = update_alpha(state, data.n, hyper, rng)
    else:
        state = state.copy()
    if state.zeta is not None:
        state.zeta = update_zeta(state, data, hyper, rng)
    state.beta = update_beta(state, data, hyper, rng)
    state.pi = update_pi(state, hyper, grid_size, rng)
    state.tau = update_tau(state, hyper, rng)
    state.lam = update_lambda(state, data, hyper, rng)
    return state


def _check_dims(data, hyper, state=None):
    if not isinstance(data, Dataset):
        raise TypeError("data must be a Dataset")
    hyper.slab_means(data.D)
    if state is not None:
        state.validate(data.n, data.D)


def _run(data, hyper, config, state, frozen):
    rng = np.random.default_rng(config.seed)
    samples, kept_at = [], []
    log_every = max(1, config.iterations // 10)
    for t in range(1, config.iterations + 1):
        state = sweep(state, data, hyper, rng, config.grid_size, frozen)
        if t > config.burn_in and (t - config.burn_in) % config.thinning == 0:
            samples.append(state.copy())
            kept_at.append(t)
        if t % log_every == 0:
            logger.info("iteration %d/%d k=%d lambda=%.4g alpha=%.4g",
                        t, config.iterations, state.k, state.lam, state.alpha)
    return Trace(samples, config, data.checksum(), hyper, kept_at)


def run_chain(data: Dataset, hyper: Hyperparameters, config: SamplerConfig,
              initial: Optional[ChainState] = None) -> Trace:
    """Run a full chain and keep the post burn-in, thinned states.

    The same data, hyperparameters and config always give an identical trace.
    """
    state = initial.copy() if initial is not None else initial_state(
        data, hyper, config.mode)
    if (state.zeta is None) != (config.mode == SSP):
        raise ModeError("initial state does not match the sampler mode")
    _check_dims(data, hyper, state)
    return _run(data, hyper, config, state, frozen=False)


def run_conditional_chain(data: Dataset, hyper: Hyperparameters,
                          config: SamplerConfig, labels) -> Trace:
    """Run the sampler with memberships frozen at ``labels`` (0-based).

    Cluster coefficients start at zero and covariate probabilities at their
    empirical cluster frequencies shrunk towards 1/2.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (data.n,):
        raise ValueError(
            f"partition has {labels.shape[0]} labels for {data.n} observations")
    _, labels = np.unique(labels, return_inverse=True)
    k = int(labels.max()) + 1
    state = initial_state(data, hyper, config.mode)
    state.s = labels
    state.beta = np.zeros((k, data.D))
    if config.mode == RPMS:
        ones, nj = _cluster_sums(labels, data.X, k)
        state.zeta = (ones + 1.0) / (nj[:, None] + 2.0)
    _check_dims(data, hyper, state)
    return _run(data, hyper, config, state, frozen=True)

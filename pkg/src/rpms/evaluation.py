"""Quartile-threshold Brier statistic and the Gelman-Rubin diagnostic."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .model import Dataset
from .sampler import Trace

__all__ = ["BrierResult", "UndefinedStatisticError", "brier_score",
           "quartile_threshold", "brier_statistic", "gelman_rubin"]

QUARTILES = {"q1": 0.25, "q2": 0.5, "q3": 0.75}


class UndefinedStatisticError(ValueError):
    """Raised when a diagnostic has no defined value for the given input."""


@dataclass(frozen=True)
class BrierResult:
    threshold: float
    per_sample_scores: np.ndarray
    quartile: str = "q2"

    @property
    def mean(self) -> float:
        return float(self.per_sample_scores.mean())


def brier_score(forecast, outcome) -> float:
    """Mean squared difference between forecast probabilities and 0/1 outcomes."""
    f = np.asarray(forecast, dtype=float)
    o = np.asarray(outcome, dtype=float)
    if f.shape != o.shape:
        raise ValueError("forecast and outcome must have the same shape")
    return float(np.mean((f - o) ** 2))


def _quartile_key(quartile) -> str:
    key = str(quartile).lower()
    if key in ("1", "2", "3"):
        key = "q" + key
    if key not in QUARTILES:
        raise ValueError(f"quartile must be one of q1, q2, q3; got {quartile!r}")
    return key


def quartile_threshold(y, quartile) -> float:
    """Empirical quartile of ``y`` using linear interpolation between order statistics."""
    return float(np.quantile(np.asarray(y, dtype=float),
                             QUARTILES[_quartile_key(quartile)],
                             method="linear"))


def exceedance_probabilities(state, data: Dataset, threshold: float):
    """P(y_i > threshold) under each observation's own cluster in ``state``."""
    mean = np.einsum("ij,ij->i", data.X, state.beta[state.s])
    return 1.0 - ndtr(np.sqrt(state.lam) * (threshold - mean))


def brier_statistic(trace: Trace, data: Dataset, quartile="q2") -> BrierResult:
    """Posterior distribution of the Brier score at an observed-quartile threshold.

    Every retained snapshot yields one score, with forecasts taken from each
    observation's fitted cluster in that snapshot.
    """
    if len(trace) == 0:
        raise ValueError("the trace holds no samples")
    key = _quartile_key(quartile)
    threshold = quartile_threshold(data.y, key)
    outcome = (data.y > threshold).astype(float)
    scores = np.array([
        brier_score(exceedance_probabilities(st, data, threshold), outcome)
        for st in trace
    ])
    return BrierResult(threshold, scores, key)


def gelman_rubin(chains) -> float:
    """Potential scale reduction factor of two or more equal-length chains.

    Uses ``sqrt(((L - 1) / L * W + B / L) / W)`` with ``W`` the mean
    within-chain variance and ``B / L`` the variance of the chain means.
    """
    chains = [np.asarray(c, dtype=float) for c in chains]
    if len(chains) < 2:
        raise ValueError("need at least two chains")
    L = len(chains[0])
    if L < 2 or any(len(c) != L for c in chains):
        raise ValueError("chains must have equal length of at least 2")
    x = np.stack(chains)
    W = x.var(axis=1, ddof=1).mean()
    B = L * x.mean(axis=1).var(ddof=1)
    if W == 0:
        if B == 0:
            raise UndefinedStatisticError(
                "all chains are constant and identical")
        return float("inf")
    var_hat = (L - 1) / L * W + B / L
    return float(np.sqrt(var_hat / W))

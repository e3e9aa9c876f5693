"""Domain types, densities and base-measure draws shared by the samplers.

Both the regression precision ``lam`` and the slab precisions ``tau`` are
*precisions* (inverse variances) everywhere in this package.  All densities
are evaluated in log space.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

RPMS = "rpms"
SSP = "ssp"
MODES = (RPMS, SSP)

# Beta draws for zeta are clamped to this interval before any log is taken.
ZETA_FLOOR = 1e-12

_LOG_2PI = np.log(2.0 * np.pi)


class ModeError(ValueError):
    """Raised when an RPMS-only operation is applied to an SSP state."""


def _check_mode(mode):
    mode = str(mode).lower()
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return mode


@dataclass(frozen=True, eq=False)
class Dataset:
    """Continuous responses ``y`` (length n) with binary covariates ``X`` (n x D)."""

    y: np.ndarray
    X: np.ndarray
    names: Optional[tuple] = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X)
        if y.ndim != 1:
            raise ValueError("y must be one-dimensional")
        if X.ndim != 2:
            raise ValueError("X must be a two-dimensional matrix")
        if X.shape[0] != y.shape[0]:
            raise ValueError(
                f"y has {y.shape[0]} entries but X has {X.shape[0]} rows")
        if y.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("need n >= 1 observations and D >= 1 covariates")
        if not np.all(np.isfinite(y)):
            raise ValueError("all responses must be finite")
        if not np.all((X == 0) | (X == 1)):
            raise ValueError("covariates must be exactly 0 or 1")
        names = self.names
        if names is None:
            names = tuple(f"x{d + 1}" for d in range(X.shape[1]))
        elif len(names) != X.shape[1]:
            raise ValueError("one covariate name per column is required")
        y.setflags(write=False)
        X = X.astype(float)
        X.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "names", tuple(str(s) for s in names))

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def D(self) -> int:
        return self.X.shape[1]

    def checksum(self) -> str:
        """SHA-256 over shape, responses and covariates."""
        h = hashlib.sha256()
        h.update(np.array(self.X.shape, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(self.y, dtype="<f8").tobytes())
        h.update(np.ascontiguousarray(self.X, dtype=np.uint8).tobytes())
        return h.hexdigest()

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.names == other.names
                and np.array_equal(self.y, other.y)
                and np.array_equal(self.X, other.X))

    def take(self, rows) -> "Dataset":
        return Dataset(self.y[rows], self.X[rows], self.names)


@dataclass(frozen=True)
class Hyperparameters:
    """Fixed prior constants.

    Defaults are the settings used for the LUTS analysis.  ``m`` holds the slab
    means; ``None`` means zero for every covariate.  ``M`` is the number of
    auxiliary components proposed in each membership update.
    """

    a_omega: float = 1.0
    b_omega: float = 0.15
    a_pi: float = 1.0
    b_pi: float = 0.15
    a_tau: float = 1.0
    b_tau: float = 1.0
    a_zeta: float = 1.0
    b_zeta: float = 1.0
    a_lambda: float = 1.0
    b_lambda: float = 1.0
    a_alpha: float = 1.0
    b_alpha: float = 1.0
    m: Optional[tuple] = None
    M: int = 100

    SCALARS = ("a_omega", "b_omega", "a_pi", "b_pi", "a_tau", "b_tau",
               "a_zeta", "b_zeta", "a_lambda", "b_lambda", "a_alpha",
               "b_alpha")

    def __post_init__(self):
        for name in self.SCALARS:
            value = float(getattr(self, name))
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number")
            object.__setattr__(self, name, value)
        if int(self.M) != self.M or self.M < 1:
            raise ValueError("M must be a positive integer")
        object.__setattr__(self, "M", int(self.M))
        if self.m is not None:
            m = tuple(float(v) for v in np.ravel(self.m))
            if not all(np.isfinite(m)):
                raise ValueError("slab means must be finite")
            object.__setattr__(self, "m", m)

    @property
    def w_omega(self) -> float:
        return self.a_omega / (self.a_omega + self.b_omega)

    def slab_means(self, D: int) -> np.ndarray:
        if self.m is None:
            return np.zeros(D)
        if len(self.m) != D:
            raise ValueError(f"m has length {len(self.m)}, expected {D}")
        return np.array(self.m)

    def to_dict(self) -> dict:
        out = {name: getattr(self, name) for name in self.SCALARS}
        out["M"] = self.M
        out["m"] = None if self.m is None else list(self.m)
        return out


@dataclass(frozen=True)
class ClusterParams:
    """Unique parameters of one cluster; ``zeta`` is ``None`` under SSP."""

    beta: np.ndarray
    zeta: Optional[np.ndarray] = None

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        if not np.all(np.isfinite(beta)):
            raise ValueError("beta entries must be finite")
        object.__setattr__(self, "beta", beta)
        if self.zeta is not None:
            zeta = np.asarray(self.zeta, dtype=float)
            if zeta.shape != beta.shape:
                raise ValueError("beta and zeta must have the same length")
            if np.any((zeta <= 0) | (zeta >= 1)):
                raise ValueError("zeta entries must lie strictly in (0, 1)")
            object.__setattr__(self, "zeta", zeta)


@dataclass
class ChainState:
    """Full state of one Gibbs chain.

    Labels in ``s`` are 0-based and contiguous: cluster ``j`` owns row ``j`` of
    ``beta`` (and of ``zeta`` for RPMS).  ``zeta is None`` marks an SSP state.
    """

    s: np.ndarray
    beta: np.ndarray
    zeta: Optional[np.ndarray]
    lam: float
    alpha: float
    pi: np.ndarray
    tau: np.ndarray

    @property
    def k(self) -> int:
        return self.beta.shape[0]

    @property
    def mode(self) -> str:
        return SSP if self.zeta is None else RPMS

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.s, minlength=self.k)

    @property
    def clusters(self) -> list:
        if self.zeta is None:
            return [ClusterParams(b) for b in self.beta]
        return [ClusterParams(b, z) for b, z in zip(self.beta, self.zeta)]

    def copy(self) -> "ChainState":
        return replace(
            self, s=self.s.copy(), beta=self.beta.copy(),
            zeta=None if self.zeta is None else self.zeta.copy(),
            pi=self.pi.copy(), tau=self.tau.copy())

    def validate(self, n: Optional[int] = None, D: Optional[int] = None):
        """Raise ``ValueError`` if any chain-state invariant is violated."""
        k = self.k
        if n is not None and self.s.shape != (n,):
            raise ValueError("membership vector has the wrong length")
        if D is not None and self.beta.shape[1] != D:
            raise ValueError("coefficient matrix has the wrong width")
        if k < 1 or k > self.s.shape[0]:
            raise ValueError("need 1 <= k <= n")
        if np.any(np.bincount(self.s, minlength=k) == 0) or self.s.max() >= k:
            raise ValueError("labels must be contiguous with no empty cluster")
        if not np.all(np.isfinite(self.beta)):
            raise ValueError("non-finite coefficient")
        if self.zeta is not None:
            if self.zeta.shape != self.beta.shape:
                raise ValueError("zeta must match beta in shape")
            if np.any((self.zeta <= 0) | (self.zeta >= 1)):
                raise ValueError("zeta outside (0, 1)")
        if not (self.lam > 0 and self.alpha > 0 and np.all(self.tau > 0)):
            raise ValueError("precisions and concentration must be positive")
        if np.any((self.pi < 0) | (self.pi > 1)):
            raise ValueError("pi outside [0, 1]")


@dataclass(frozen=True)
class SamplerConfig:
    """MCMC run settings; ``grid_size`` is the resolution of the pi update."""

    iterations: int = 10_000
    burn_in: int = 1_000
    thinning: int = 1
    seed: int = 0
    mode: str = RPMS
    grid_size: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "mode", _check_mode(self.mode))
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("need 0 <= burn_in < iterations")
        if self.thinning < 1:
            raise ValueError("thinning must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.grid_size < 100:
            raise ValueError("grid_size must be at least 100")

    @property
    def n_samples(self) -> int:
        return (self.iterations - self.burn_in) // self.thinning


def log_response_density(y, x, beta, lam) -> float:
    """Normal log-density of ``y`` with mean ``x @ beta`` and precision ``lam``."""
    x = np.asarray(x, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if x.shape != beta.shape:
        raise ValueError("x and beta must have the same length")
    if not (np.isfinite(y) and np.all(np.isfinite(x))
            and np.all(np.isfinite(beta)) and np.isfinite(lam)):
        raise ValueError("non-finite argument")
    if lam <= 0:
        raise ValueError("precision must be positive")
    resid = y - x @ beta
    return 0.5 * np.log(lam) - 0.5 * _LOG_2PI - 0.5 * lam * resid * resid


def log_covariate_density(x, zeta) -> float:
    """Log-probability of a binary profile under independent Bernoullis."""
    x = np.asarray(x, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    if x.shape != zeta.shape:
        raise ValueError("x and zeta must have the same length")
    if np.any(~np.isfinite(zeta) | (zeta <= 0) | (zeta >= 1)):
        raise ValueError("zeta entries must lie strictly in (0, 1)")
    return float(np.sum(x * np.log(zeta) + (1 - x) * np.log1p(-zeta)))


def beta_variates(a, b, rng, size):
    """Beta(a, b) draws, using closed-form inversions when a or b is 1."""
    if a == 1.0 and b == 1.0:
        return rng.random(size)
    if a == 1.0:
        return -np.expm1(np.log1p(-rng.random(size)) / b)
    if b == 1.0:
        return np.exp(np.log(rng.random(size)) / a)
    return rng.beta(a, b, size)


def draw_base(hyper, m, pi, tau, rng, size, with_zeta=True):
    """Draw ``size`` cluster parameter sets from the base measure.

    Returns ``(beta, zeta)`` arrays of shape ``(size, D)``; ``zeta`` is None
    when ``with_zeta`` is false.  Each coefficient is exactly zero with
    probability ``pi_d * w_omega`` and otherwise Normal(m_d, precision tau_d).
    """
    D = pi.shape[0]
    spike = rng.random((size, D)) < pi * hyper.w_omega
    beta = rng.standard_normal((size, D))
    beta *= 1.0 / np.sqrt(tau)
    beta += m
    np.copyto(beta, 0.0, where=spike)
    zeta = None
    if with_zeta:
        zeta = beta_variates(hyper.a_zeta, hyper.b_zeta, rng, (size, D))
        np.clip(zeta, ZETA_FLOOR, 1 - ZETA_FLOOR, out=zeta)
    return beta, zeta


def sample_base_measure(hyper: Hyperparameters, pi, tau, rng,
                        mode: str = RPMS) -> ClusterParams:
    pi = np.asarray(pi, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any((pi < 0) | (pi > 1)) or np.any(tau <= 0):
        raise ValueError("need pi in [0, 1] and tau > 0")
    m = hyper.slab_means(pi.shape[0])
    beta, zeta = draw_base(hyper, m, pi, tau, rng, 1,
                           with_zeta=_check_mode(mode) == RPMS)
    return ClusterParams(beta[0], None if zeta is None else zeta[0])


def sample_prior(n: int, D: int, hyper: Hyperparameters, rng,
                 mode: str = RPMS) -> ChainState:
    """Draw a complete chain state from the prior (partition via the Polya urn)."""
    mode = _check_mode(mode)
    alpha = rng.gamma(hyper.a_alpha, 1.0 / hyper.b_alpha)
    s = np.empty(n, dtype=np.int64)
    counts = []
    for i in range(n):
        w = np.array(counts + [alpha], dtype=float)
        j = int(np.searchsorted(np.cumsum(w), rng.random() * w.sum(),
                                side="right"))
        j = min(j, len(counts))
        if j == len(counts):
            counts.append(1)
        else:
            counts[j] += 1
        s[i] = j
    pi = rng.beta(hyper.a_pi, hyper.b_pi, D)
    tau = rng.gamma(hyper.a_tau, 1.0 / hyper.b_tau, D)
    beta, zeta = draw_base(hyper, hyper.slab_means(D), pi, tau, rng,
                           len(counts), with_zeta=mode == RPMS)
    lam = rng.gamma(hyper.a_lambda, 1.0 / hyper.b_lambda)
    return ChainState(s, beta, zeta, lam, alpha, pi, tau)


def sample_data(state: ChainState, rng, X=None) -> Dataset:
    """Simulate a dataset from the likelihood given a chain state.

    Covariates are drawn from the cluster Bernoullis unless ``X`` is supplied
    (SSP states carry no covariate model, so ``X`` is required for them).
    """
    n = state.s.shape[0]
    if X is None:
        if state.zeta is None:
            raise ModeError("an SSP state needs the covariates to be given")
        X = (rng.random((n, state.beta.shape[1]))
             < state.zeta[state.s]).astype(float)
    mean = np.einsum("ij,ij->i", X, state.beta[state.s])
    y = mean + rng.standard_normal(n) / np.sqrt(state.lam)
    return Dataset(y, X)


def initial_state(data: Dataset, hyper: Hyperparameters,
                  mode: str = RPMS) -> ChainState:
    """One cluster, zero coefficients, zeta 1/2, unit precision and alpha."""
    D = data.D
    zeta = np.full((1, D), 0.5) if _check_mode(mode) == RPMS else None
    return ChainState(
        s=np.zeros(data.n, dtype=np.int64),
        beta=np.zeros((1, D)),
        zeta=zeta,
        lam=1.0,
        alpha=1.0,
        pi=np.full(D, hyper.a_pi / (hyper.a_pi + hyper.b_pi)),
        tau=np.full(D, hyper.a_tau / hyper.b_tau),
    )

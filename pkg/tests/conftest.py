import numpy as np
import pytest

from rpms.model import ChainState, Dataset


def make_state(s, beta, zeta=None, lam=1.0, alpha=1.0, pi=None, tau=None):
    beta = np.atleast_2d(np.asarray(beta, dtype=float))
    D = beta.shape[1]
    return ChainState(
        s=np.asarray(s, dtype=np.int64),
        beta=beta,
        zeta=None if zeta is None else np.atleast_2d(
            np.asarray(zeta, dtype=float)),
        lam=lam,
        alpha=alpha,
        pi=np.full(D, 0.5) if pi is None else np.asarray(pi, dtype=float),
        tau=np.ones(D) if tau is None else np.asarray(tau, dtype=float),
    )


@pytest.fixture
def small_data():
    rng = np.random.default_rng(11)
    X = (rng.random((12, 3)) < 0.5).astype(float)
    y = X @ np.array([1.0, 0.0, -1.0]) + 0.3 * rng.standard_normal(12)
    return Dataset(y, X)


def moment_check(draws, mean, var, n_se=4.0):
    """Sample mean and variance agree with the analytic moments within n_se SEs."""
    draws = np.asarray(draws, dtype=float)
    N = draws.size
    se_mean = np.sqrt(var / N)
    # SE of the sample variance, using the empirical fourth central moment
    m4 = np.mean((draws - draws.mean()) ** 4)
    se_var = np.sqrt(max(m4 - var ** 2, 1e-300) / N)
    assert abs(draws.mean() - mean) < n_se * se_mean, (draws.mean(), mean)
    assert abs(draws.var() - var) < n_se * se_var, (draws.var(), var)


def make_trace(states, mode="rpms"):
    """Wrap hand-built states in a Trace with a matching config."""
    from rpms.model import SamplerConfig
    from rpms.sampler import Trace
    config = SamplerConfig(iterations=max(len(states), 1), burn_in=0, mode=mode)
    return Trace(list(states), config, "", None, list(range(1, len(states) + 1)))


def random_trace(n, D, T, seed, mode="rpms"):
    """Snapshots with random partitions and sparse coefficients."""
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(T):
        k = int(rng.integers(1, 4))
        s = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
        rng.shuffle(s)
        beta = rng.standard_normal((k, D)) * (rng.random((k, D)) < 0.5)
        zeta = None if mode == "ssp" else rng.uniform(0.1, 0.9, (k, D))
        states.append(make_state(s, beta, zeta=zeta, lam=rng.uniform(0.5, 2),
                                 alpha=rng.uniform(0.2, 2)))
    return make_trace(states, mode)


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance criterion, echoed at the end."""
    def _report(label, passed, detail=""):
        line = f"{label}: {'PASS' if passed else 'FAIL'}  {detail}".rstrip()
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

"""
The model pieces and what the prior says
========================================

Each cluster carries regression coefficients ``beta`` and covariate
probabilities ``zeta``.  Coefficients are exactly zero with probability
``pi * w_omega``, otherwise Normal.  Partitions come from the Polya urn.
"""

import numpy as np

from rpms import Hyperparameters, log_covariate_density, log_response_density
from rpms.model import sample_base_measure, sample_prior

# %%
# Densities for one observation.  The response is Normal with precision
# ``lam`` around ``x @ beta``; each covariate is Bernoulli(zeta_d).

x = np.array([1.0, 0.0, 1.0])
print("log f(y | x, beta, lam) =",
      log_response_density(2.3, x, [0.5, 9.0, -0.2], lam=4.0))
print("log f(x | zeta)         =",
      log_covariate_density(x, [0.8, 0.3, 0.6]))

# %%
# Base-measure draws.  With the default hyperparameters w_omega = 1/1.15,
# so with pi = 0.5 about 43% of coefficients are exactly zero.

hyper = Hyperparameters()
rng = np.random.default_rng(1)
draws = np.array([sample_base_measure(hyper, np.full(4, 0.5), np.ones(4),
                                      rng).beta for _ in range(5000)])
print("zero fraction", np.mean(draws == 0), "expected", 0.5 * hyper.w_omega)

# %%
# Number of clusters under the prior for 100 observations.  alpha itself is
# random (Gamma(1, 1) by default), which makes the spread wide.

ks = [sample_prior(100, 3, hyper, rng).k for _ in range(2000)]
values, counts = np.unique(ks, return_counts=True)
for k, c in zip(values[:10], counts[:10]):
    print(f"k={k:2d} {'#' * (c // 10)}")

"""
Recovering clusters and sparse effects from simulated data
==========================================================

Three clusters on eight binary covariates.  Each cluster has four zero
coefficients and the last two covariates do nothing anywhere.
"""

import numpy as np

from rpms import (Hyperparameters, SamplerConfig, binder_partition,
                  generate_synthetic, global_exclusion_probability,
                  inclusion_probabilities, posterior_k, run_chain)
from rpms.cli import default_generator

spec = default_generator(300, seed=0)
data, truth = generate_synthetic(spec)
print("true beta\n", spec.beta_true)

# %%
# A short run keeps this demo quick.  The acceptance suite uses 10,000
# iterations on the same data.

hyper = Hyperparameters()
trace = run_chain(data, hyper, SamplerConfig(iterations=1500, burn_in=300,
                                             seed=0))
print("posterior of k:", {k: round(p, 3) for k, p in posterior_k(trace).items()})

# %%
# The Binder point estimate, compared with the truth as a contingency table.

part = binder_partition(trace)
table = np.zeros((part.k, spec.k_true), dtype=int)
np.add.at(table, (part.labels, truth), 1)
print("Binder cluster x true cluster\n", table)

# %%
# Inclusion probabilities come from a second chain with the memberships
# frozen at the Binder partition.

inc = inclusion_probabilities(data, hyper, part,
                              SamplerConfig(iterations=2000, burn_in=200,
                                            seed=1))
np.set_printoptions(precision=2, suppress=True)
print("P(beta_jd != 0)\n", inc)

# %%
# How often each covariate is switched off in every cluster at once.

for d in range(data.D):
    print(f"x{d + 1}: {global_exclusion_probability(trace, d):.2f}")

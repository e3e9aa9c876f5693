"""
Predicting for a new covariate profile
======================================

A new patient joins an existing cluster with weight proportional to its size
times how well the cluster's covariate probabilities match the profile, or
opens a new cluster with weight ``alpha`` times the prior predictive.
"""

import numpy as np

from rpms import (Hyperparameters, SamplerConfig, generate_synthetic,
                  predict_cluster, predict_coefficients_and_response,
                  run_chain)
from rpms.cli import default_generator

spec = default_generator(200, seed=2)
data, truth = generate_synthetic(spec)
hyper = Hyperparameters()
trace = run_chain(data, hyper, SamplerConfig(iterations=800, burn_in=200,
                                             seed=3))

# %%
# Allocation weights in the last snapshot for a profile typical of the first
# true cluster (x1, x2, x3 present).

profile = np.array([1, 1, 1, 0, 0, 0, 1, 0], dtype=float)
last = trace.samples[-1]
print("cluster sizes", last.sizes)
print("weights (last entry = new cluster)",
      np.round(predict_cluster(profile, last, hyper), 3))

# %%
# Posterior predictive coefficients and response over all snapshots.

rng = np.random.default_rng(4)
draws = predict_coefficients_and_response(profile, trace, hyper, rng)
print("mean predicted beta ", np.round(draws.beta_tilde.mean(axis=0), 2))
print("true beta of cluster", spec.beta_true[0])
print("predicted y: mean %.2f, 90%% interval %s" % (
    draws.y_tilde.mean(), np.round(np.quantile(draws.y_tilde, [0.05, 0.95]), 2)))
print("new-cluster draws:", int(draws.new_cluster.sum()), "of", len(trace))

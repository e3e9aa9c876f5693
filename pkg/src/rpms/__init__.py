"""Random partition model with covariate selection (RPMS).

A Dirichlet-process mixture of Normal linear regressions in which clusters
are informed by binary covariate profiles and each cluster selects its own
covariates through a spike-and-slab base measure.  The SSP competitor drops
the covariate model and clusters on the response alone.
"""

from .data import (LUTS_SYMPTOMS, GeneratorSpec, generate_luts_mimic, generate_synthetic,
                   load_dataset, save_dataset)
from .evaluation import BrierResult, brier_statistic, gelman_rubin
from .model import (RPMS, SSP, ChainState, ClusterParams, Dataset,
                    Hyperparameters, ModeError, SamplerConfig,
                    log_covariate_density, log_response_density,
                    sample_base_measure)
from .sampler import Trace, run_chain, run_conditional_chain
from .summaries import (Partition, binder_partition, coclustering,
                        global_exclusion_probability, inclusion_probabilities,
                        posterior_k,
                        predict_cluster, predict_coefficients_and_response)

__version__ = "0.1.0"

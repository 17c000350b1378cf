"""Entrywise membership leakage of noisy-argmax aggregation (PATE) and of
finite channels, measured as pointwise conditional maximal leakage in nats."""

from .accountant import BudgetLedger, calibrate_gamma, worst_case_plan
from .channels import ConditionalChannel, maximal_leakage, pcml
from .errors import (AccuracyError, ConsistencyError, InvalidInputError,
                     NoSolutionError, ResourceError)
from .laplace import (h_series, leakage_at_vmax, per_query_bound, total_bound,
                      win_prob_uniform_closed)
from .majorization import compare, enumerate_histograms, extremal_histograms
from .noise import (NoiseModel, custom_model, gaussian_model, laplace_model,
                    log_concavity_probe, noise_from_config)
from .rnm import LeakageReport, entrywise_leakage, noisy_argmax_sample, win_probability

__version__ = "0.1.0"

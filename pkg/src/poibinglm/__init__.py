"""Individual-level logistic and neural models fit to aggregate vote counts.

Each precinct's count of votes for one candidate is treated as a Poisson
binomial draw over its registered voters; models are trained on the normal
approximation to that likelihood.
"""
from .dataset import (Dataset, Precinct, SyntheticSpec, binarize_and_join, generate_synthetic,
                      load_feature_spec, load_precinct_results, load_voter_file, split)
from .evaluation import (export_predictions, landslide_report, precinct_predictions,
                         primary_voter_report, r2_weighted)
from .glm import LogisticParams, NeuralParams, grad, precinct_probs
from .poibin import cdf_dft, lyapunov_ratio, moments, pmf_dft, pmf_dft_all, pmf_enumerate
from .trainer import FitConfig, FitReport, dataset_loss, fit

__version__ = "0.1.0"

__all__ = [
    "Dataset", "Precinct", "SyntheticSpec", "binarize_and_join", "generate_synthetic",
    "load_feature_spec", "load_precinct_results", "load_voter_file", "split",
    "export_predictions", "landslide_report", "precinct_predictions", "primary_voter_report",
    "r2_weighted", "LogisticParams", "NeuralParams", "grad", "precinct_probs",
    "cdf_dft", "lyapunov_ratio", "moments", "pmf_dft", "pmf_dft_all", "pmf_enumerate",
    "FitConfig", "FitReport", "dataset_loss", "fit",
]

"""Transformed sufficient dimension reduction: SIR and MAVE on monotone
transforms of the predictors, with dimension selection and subspace metrics."""
from .errors import TsdrError
from .mave import MaveFit, MaveOptions, mave_fit, rss_dimension, tmave_fit
from .metrics import tcc, vcc
from .simulate import SCENARIOS, ScenarioSpec, generate
from .sir import SirFit, bic_dimension, sequential_test, sir_fit, transform_predictors
from .transforms import MonotoneTransform, SplineBasis, normal_scores, yeo_johnson_fit

__all__ = [
    "MaveFit",
    "MaveOptions",
    "MonotoneTransform",
    "SCENARIOS",
    "ScenarioSpec",
    "SirFit",
    "SplineBasis",
    "TsdrError",
    "bic_dimension",
    "generate",
    "mave_fit",
    "normal_scores",
    "rss_dimension",
    "sequential_test",
    "sir_fit",
    "tcc",
    "tmave_fit",
    "transform_predictors",
    "vcc",
    "yeo_johnson_fit",
]
__version__ = "0.1.0"

"""Depth-weighted jackknife empirical likelihood for U-structure estimating equations."""

from .depth import WeightVector, depth_weights, sample_depths, spatial_depth, uniform_weights
from .errors import (ConfigError, DataError, DegenerateDepths, DepthJelError, HullViolation,
                     NumericalError)
from .estimating import (EstimatingEquation, get_equation, gini_correlation_equation,
                         gini_index_equation)
from .inference import (ConfidenceInterval, Method, chi2_quantile, confidence_interval,
                        gini_correlations, gini_index, vj_interval, wjel_point_estimate)
from .simlab import SimDesign, run_coverage_experiment
from .ustat import PseudoValueFunction, jackknife_pseudo_values, u_statistic
from .wjel import profile_ratio, self_normalized_statistic, solve_lambda, wjel_ratio

__version__ = "0.1.0"

__all__ = [
    "ConfidenceInterval", "ConfigError", "DataError", "DegenerateDepths", "DepthJelError",
    "EstimatingEquation", "HullViolation", "Method", "NumericalError", "PseudoValueFunction",
    "SimDesign", "WeightVector", "chi2_quantile", "confidence_interval", "depth_weights",
    "get_equation", "gini_correlation_equation", "gini_correlations", "gini_index",
    "gini_index_equation", "jackknife_pseudo_values", "profile_ratio", "run_coverage_experiment",
    "sample_depths", "self_normalized_statistic", "solve_lambda", "spatial_depth",
    "u_statistic", "uniform_weights", "vj_interval", "wjel_point_estimate", "wjel_ratio",
]

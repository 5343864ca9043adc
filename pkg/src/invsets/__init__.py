"""Simultaneous confidence bands and inverse-set confidence sets.

The package estimates inverse sets mu^{-1}(U) of an unknown function
(excursion sets {mu >= c}, {mu <= c} and interval sets {a <= mu <= b})
with simultaneous inner/outer confidence sets obtained by inverting a
simultaneous confidence band over the whole family of levels at once.
"""

from .bootstrap import (BootstrapConfig, MaxStatDistribution, multiplier_scb,
                        regression_scb)
from .datagen import (GenSpec, gen_coefficients, gen_dense_1d, gen_dense_2d,
                      gen_regression)
from .domain import Band, Domain, Field, IndexSet, is_subset, threshold_set
from .errors import (BootstrapDegenerateError, DegenerateSEError, InvsetsError,
                     NotConvergedError, NumericError, RankDeficientError,
                     SeparationError, ValidationError)
from .inversion import (ExcursionCS, IntervalCS, breakpoint_levels,
                        containment_event_interval,
                        containment_event_interval_grid,
                        containment_event_lower, containment_event_upper,
                        interval_cs, lower_excursion_cs, sci_event,
                        upper_excursion_cs)
from .regression import (CoefFit, DesignMatrix, PredictionField, logistic_fit,
                         ols_fit, pairwise_prediction_correlations,
                         predict_with_sd)
from .simharness import (CoverageReport, ExperimentConfig, correlation_density,
                         mc_stderr, run_coverage, run_grid_proximity_study,
                         run_levels_sweep)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Band",
    "BootstrapConfig",
    "BootstrapDegenerateError",
    "CoefFit",
    "CoverageReport",
    "DegenerateSEError",
    "DesignMatrix",
    "Domain",
    "ExcursionCS",
    "ExperimentConfig",
    "Field",
    "GenSpec",
    "IndexSet",
    "IntervalCS",
    "InvsetsError",
    "MaxStatDistribution",
    "NotConvergedError",
    "NumericError",
    "PredictionField",
    "RankDeficientError",
    "SeparationError",
    "ValidationError",
    "breakpoint_levels",
    "containment_event_interval",
    "containment_event_interval_grid",
    "containment_event_lower",
    "containment_event_upper",
    "correlation_density",
    "gen_coefficients",
    "gen_dense_1d",
    "gen_dense_2d",
    "gen_regression",
    "interval_cs",
    "is_subset",
    "lower_excursion_cs",
    "mc_stderr",
    "multiplier_scb",
    "ols_fit",
    "logistic_fit",
    "pairwise_prediction_correlations",
    "predict_with_sd",
    "regression_scb",
    "run_coverage",
    "run_grid_proximity_study",
    "run_levels_sweep",
    "sci_event",
    "threshold_set",
    "upper_excursion_cs",
]

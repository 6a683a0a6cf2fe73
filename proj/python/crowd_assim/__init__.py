"""Station crowd model with particle filter data assimilation."""

from ._core import (
    CollisionStudy,
    ConfigError,
    DegeneracyError,
    DimensionError,
    ExperimentResult,
    FilterConfig,
    ModelConfig,
    PolyFit,
    Roughening,
    TruthRun,
    Weighting,
    WindowRecord,
    aggregate_error,
    collision_study,
    fit_polynomial,
    particle_error,
    run_filter_experiment,
    run_truth,
    systematic_indices,
)

__version__ = "0.1.0"

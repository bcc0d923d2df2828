"""Estimator selection among piecewise-constant candidates for exponential-family data."""

from ._core import (
    ComputationError,
    ExpFamily,
    FamilyKind,
    ParseError,
    PenaltyConfig,
    SelectionResult,
    StepFn,
    ValidationError,
    __version__,
    builtin_signal_names,
    delta_weight,
    generate_candidates,
    hellinger_sq,
    k_segment_dp,
    log_density,
    log_density_ratio,
    mad_sigma,
    mle,
    pelt,
    penalty,
    pseudo_hellinger_risk,
    run_experiment,
    sample_signal,
    select,
    t_statistic,
    vst_transform,
)

__all__ = [
    "ComputationError",
    "ExpFamily",
    "FamilyKind",
    "ParseError",
    "PenaltyConfig",
    "SelectionResult",
    "StepFn",
    "ValidationError",
    "__version__",
    "builtin_signal_names",
    "delta_weight",
    "generate_candidates",
    "hellinger_sq",
    "k_segment_dp",
    "log_density",
    "log_density_ratio",
    "mad_sigma",
    "mle",
    "pelt",
    "penalty",
    "pseudo_hellinger_risk",
    "run_experiment",
    "sample_signal",
    "select",
    "t_statistic",
    "vst_transform",
]

"""Numerical classification of positive functions by their behaviour at infinity."""

from .catalog import (
    GroundTruth,
    MRepresentation,
    ORVRepresentation,
    StepFunction,
    build_M,
    build_orv,
    example,
    heavy_tail_expected,
    random_orv,
    recommended_config,
)
from .classes import CLASSES, M, M_INF, M_MINUS_INF, ORV, RV, SV, Membership
from .classifier import (
    ClassificationReport,
    ClassifierConfig,
    classify_M,
    classify_M_extremes,
    classify_ORV,
    classify_RV,
    full_report,
    index_function_probe,
    orders,
    ratio_extrema,
    ratio_scaled_limit,
    theorem1_threshold,
    uct_envelope,
)
from .limits import Kind, LimitVerdict, Tolerances, limit_verdict, tail_extrema
from .logfn import (
    Y_CAP,
    DomainError,
    EvaluationError,
    GridSpec,
    LogFunction,
    empirical_tail,
    finite_support_adapter,
    load_samples,
    load_table,
)

__version__ = "0.1.0"

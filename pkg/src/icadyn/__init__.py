"""Online recovery of a planted feature from non-Gaussian streams.

The package simulates a projected cubic-update algorithm in high
dimension, integrates its deterministic overlap flow, and maps the
(step size, source shape) phase structure: recovery thresholds,
informative plateaus, and critical step sizes.
"""

from .sources import (
    SourceParams,
    SourceMoments,
    analytic_moments,
    sampler_sixth_moment,
    sample_source,
    empirical_moments,
    moment_argmax,
    peak_moments,
)
from .stream import Observation, random_feature, sample_observation
from .learner import (
    AlgoConfig,
    EstimateState,
    Trajectory,
    EnsembleResult,
    initial_estimate,
    step,
    run_trial,
    run_ensemble,
    overlap_chain_ensemble,
    squared_overlap,
    steps_for,
)
from .dynamics import (
    DriftParams,
    drift,
    stability,
    fixed_points,
    FixedPointSet,
    integrate,
    OdeSolution,
    settle_time,
)
from .phase import (
    PhaseTable,
    threshold_table,
    critical_rate,
    critical_rate_curve,
    CriticalRateCurve,
    classify_run,
    Classification,
    compare_with_ode,
    ComparisonReport,
    auto_horizon,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "SourceParams",
    "SourceMoments",
    "analytic_moments",
    "sampler_sixth_moment",
    "sample_source",
    "empirical_moments",
    "moment_argmax",
    "peak_moments",
    "Observation",
    "random_feature",
    "sample_observation",
    "AlgoConfig",
    "EstimateState",
    "Trajectory",
    "EnsembleResult",
    "initial_estimate",
    "step",
    "run_trial",
    "run_ensemble",
    "overlap_chain_ensemble",
    "squared_overlap",
    "steps_for",
    "DriftParams",
    "drift",
    "stability",
    "fixed_points",
    "FixedPointSet",
    "integrate",
    "OdeSolution",
    "settle_time",
    "PhaseTable",
    "threshold_table",
    "critical_rate",
    "critical_rate_curve",
    "CriticalRateCurve",
    "classify_run",
    "Classification",
    "compare_with_ode",
    "ComparisonReport",
    "auto_horizon",
]

"""Local linear relative-error regression for right-censored data.

The package estimates the relative-error regression curve from censored
observations via Kaplan-Meier synthetic responses and local linear
smoothing, ships the classical competitors (local linear and
Nadaraya-Watson on the same synthetic responses), leave-one-out bandwidth
selection, and a seeded Monte Carlo harness with a CLI.
"""

__version__ = "0.1.0"

from .bandwidth import (
    DEFAULT_BANDWIDTH_GRID,
    BandwidthGrid,
    BandwidthSelection,
    CVPoint,
    cv_score,
    select_bandwidth,
    write_cv_trace_csv,
)
from .errors import CalibrationError, ConfigError, DataError, LLRERError
from .kernels import KernelKind, kernel_eval, scaled_kernel
from .loclin import (
    Estimator,
    EstimatorConfig,
    FittedCurve,
    MomentStatistics,
    PointEstimate,
    cr_point,
    fit_curve,
    llcr_point,
    llcr_point_naive,
    llrer_point,
    llrer_point_naive,
    moment_statistics,
    read_curve_csv,
    required_orders,
    write_curve_csv,
)
from .simulate import (
    ErrorMetrics,
    GeneratedSample,
    ReplicationResult,
    SimulationConfig,
    SimulationReport,
    calibrate_censoring,
    error_metrics,
    generate_sample,
    inject_outliers,
    load_simulation_config,
    monte_carlo_run,
    parse_grid_spec,
    ratio_second_order,
    theoretical_curve,
    write_curves_csv,
    write_summary_csv,
)
from .survival import (
    CensoredSample,
    NonPositiveResponseWarning,
    SurvivalStep,
    SyntheticResponses,
    km_censoring_survival,
    read_sample_csv,
    survival_eval,
    synthetic_transform,
    synthetic_values,
)

__all__ = [
    "__version__",
    "BandwidthGrid",
    "BandwidthSelection",
    "CVPoint",
    "CalibrationError",
    "CensoredSample",
    "ConfigError",
    "DEFAULT_BANDWIDTH_GRID",
    "DataError",
    "ErrorMetrics",
    "Estimator",
    "EstimatorConfig",
    "FittedCurve",
    "GeneratedSample",
    "KernelKind",
    "LLRERError",
    "MomentStatistics",
    "NonPositiveResponseWarning",
    "PointEstimate",
    "ReplicationResult",
    "SimulationConfig",
    "SimulationReport",
    "SurvivalStep",
    "SyntheticResponses",
    "calibrate_censoring",
    "cr_point",
    "cv_score",
    "error_metrics",
    "fit_curve",
    "generate_sample",
    "inject_outliers",
    "kernel_eval",
    "km_censoring_survival",
    "llcr_point",
    "llcr_point_naive",
    "llrer_point",
    "llrer_point_naive",
    "load_simulation_config",
    "moment_statistics",
    "monte_carlo_run",
    "parse_grid_spec",
    "ratio_second_order",
    "read_curve_csv",
    "read_sample_csv",
    "required_orders",
    "scaled_kernel",
    "select_bandwidth",
    "survival_eval",
    "synthetic_transform",
    "synthetic_values",
    "theoretical_curve",
    "write_curve_csv",
    "write_curves_csv",
    "write_cv_trace_csv",
    "write_summary_csv",
]

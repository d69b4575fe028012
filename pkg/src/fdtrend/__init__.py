"""Nonparametric trend estimation and simultaneous confidence bands for functional data."""

__version__ = "0.1.0"

from .bands import (
    ConfidenceBand,
    normal_quantile,
    pointwise_band,
    pointwise_radius,
    simultaneous_band,
    simultaneous_radius,
    tail_bound,
)
from .covariance import VarianceEstimate, estimate_noise_variance, estimate_pointwise_variance
from .design import (
    DesignGrid,
    FunctionalSample,
    MeshReport,
    cross_sectional_means,
    interpolant_eval,
    validate_grid,
)
from .errors import (
    DegenerateWindowError,
    DomainError,
    FdtrendError,
    GridMismatchError,
    InsufficientDataError,
    InvalidBandwidthError,
    InvalidGridError,
    InvalidLevelError,
    NotPSDError,
    NumericalError,
    ParseError,
    ReplicationError,
    ValidationError,
)
from .estimators import (
    EstimatorConfig,
    TrendEstimate,
    clark_estimate,
    default_bandwidth,
    default_eval_grid,
    effective_weights,
    estimate_trend,
    local_linear_estimate,
    weight_matrix,
)
from .kernels import BIWEIGHT, EPANECHNIKOV, TRIANGULAR, Kernel, boundary_norm, eval_kernel, get_kernel, kernel_cdf
from .simulation import (
    CovarianceFunction,
    CoverageReport,
    GPModel,
    MeanFunction,
    NoiseModel,
    add_noise,
    coverage_experiment,
    make_model,
    normality_diagnostic,
    rate_check,
    replication_rng,
    sample_gp,
    simulate_sample,
)

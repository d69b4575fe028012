"""Plug-in estimates of the noise variance and of the pointwise variance R(t, t)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import FunctionalSample
from .errors import InsufficientDataError
from .estimators import EstimatorConfig, _check_eval_grid, default_eval_grid, weight_matrix


@dataclass(frozen=True, eq=False)
class VarianceEstimate:
    eval_grid: np.ndarray
    values: np.ndarray
    noise_variance: float = float("nan")
    method: str = "smoothed-curves"
    bandwidth: float | None = None

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.eval_grid, dtype=float))
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        if t.shape != v.shape:
            raise ValueError("eval_grid and values must have the same length")
        v = np.maximum(v, 0.0)
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "eval_grid", t)
        object.__setattr__(self, "values", v)


def estimate_noise_variance(sample: FunctionalSample) -> float:
    """Rice-type first-difference estimate of the measurement-error variance.

    Averages half the squared increments along each curve. The estimate is
    biased upward by the increments of the mean and of the process itself;
    for smooth paths this vanishes as the grid refines.
    """
    if sample.p < 3:
        raise InsufficientDataError(f"noise variance needs p >= 3 grid points, got {sample.p}")
    diffs = np.diff(sample.data, axis=1)
    s2 = float(np.sum(diffs * diffs)) / (2.0 * sample.n * (sample.p - 1))
    return max(s2, 0.0)


def estimate_pointwise_variance(
    sample: FunctionalSample, smoother: EstimatorConfig, eval_grid=None
) -> VarianceEstimate:
    """Cross-curve sample variance of the individually smoothed curves.

    Each row is smoothed with the configured estimator (bandwidth resolved
    with the full sample size, so it matches the trend estimate) and the
    unbiased sample variance is taken across curves at every eval point.
    Smoothing averages out the measurement error, so no noise correction is
    subtracted. The noise variance is still reported for diagnostics.
    """
    if sample.n < 2:
        raise InsufficientDataError(f"pointwise variance needs n >= 2 curves, got {sample.n}")
    grid = sample.grid
    t = _check_eval_grid(default_eval_grid(grid.horizon) if eval_grid is None else eval_grid, grid.horizon)
    cfg = smoother.resolve(sample.n, grid.horizon)
    W = weight_matrix(cfg, grid, t, sample.n)
    smoothed = sample.data @ W.T
    centered = smoothed - smoothed.mean(axis=0)
    values = np.sum(centered * centered, axis=0) / (sample.n - 1)
    sigma2 = estimate_noise_variance(sample) if sample.p >= 3 else float("nan")
    return VarianceEstimate(t, values, sigma2, f"smoothed-curves/{cfg.method}", cfg.bandwidth)

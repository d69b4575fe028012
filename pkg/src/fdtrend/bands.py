"""Simultaneous and pointwise confidence bands for the trend."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .covariance import VarianceEstimate
from .errors import GridMismatchError, InvalidLevelError, ValidationError
from .estimators import TrendEstimate

SIMULTANEOUS = "simultaneous"
POINTWISE = "pointwise"


@dataclass(frozen=True, eq=False)
class ConfidenceBand:
    eval_grid: np.ndarray
    center: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    gamma: float
    n: int
    kind: str = SIMULTANEOUS
    radius: float = float("nan")

    @property
    def level(self) -> float:
        return 1.0 - self.gamma

    @property
    def half_width(self) -> np.ndarray:
        return self.upper - self.center

    def contains(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        return (values >= self.lower) & (values <= self.upper)


def _check_gamma(gamma):
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise InvalidLevelError(f"gamma must lie in (0, 1), got {gamma}")
    return gamma


def normal_quantile(prob):
    """Standard normal quantile (inverse CDF)."""
    return ndtri(prob)


def tail_bound(lam: float) -> float:
    """Approximate ``P(sup |Z| > lam)`` for a unit-variance Gaussian process: ``2 exp(-lam^2 / 2)``."""
    lam = float(lam)
    if not lam > 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    return 2.0 * math.exp(-0.5 * lam * lam)


def simultaneous_radius(gamma: float) -> float:
    """The ``lam`` solving ``tail_bound(lam) = gamma``."""
    gamma = _check_gamma(gamma)
    return math.sqrt(-2.0 * math.log(gamma / 2.0))


def pointwise_radius(gamma: float) -> float:
    gamma = _check_gamma(gamma)
    return float(normal_quantile(1.0 - gamma / 2.0))


def _build(trend: TrendEstimate, variance: VarianceEstimate, gamma, radius, kind):
    if trend.eval_grid.shape != variance.eval_grid.shape or not np.array_equal(
        trend.eval_grid, variance.eval_grid
    ):
        raise GridMismatchError("trend and variance estimates use different eval grids")
    if trend.n < 1:
        raise ValidationError("trend estimate must record n >= 1")
    half = radius * np.sqrt(variance.values / trend.n)
    center = np.array(trend.values, dtype=float)
    lower, upper = center - half, center + half
    for a in (center, lower, upper):
        a.setflags(write=False)
    return ConfidenceBand(trend.eval_grid, center, lower, upper, gamma, trend.n, kind, radius)


def simultaneous_band(trend: TrendEstimate, variance: VarianceEstimate, gamma: float) -> ConfidenceBand:
    """``center +/- sqrt(-2 log(gamma/2) * R(t,t) / n)``.

    The radius inverts the Gaussian sup-tail approximation of
    :func:`tail_bound`. Where the variance estimate is zero the band
    collapses to the point estimate. Simultaneity is only enforced on the
    eval grid.
    """
    gamma = _check_gamma(gamma)
    return _build(trend, variance, gamma, simultaneous_radius(gamma), SIMULTANEOUS)


def pointwise_band(trend: TrendEstimate, variance: VarianceEstimate, gamma: float) -> ConfidenceBand:
    """Gaussian pointwise interval ``center +/- z_{1-gamma/2} sqrt(R(t,t)/n)``."""
    gamma = _check_gamma(gamma)
    return _build(trend, variance, gamma, pointwise_radius(gamma), POINTWISE)

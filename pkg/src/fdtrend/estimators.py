"""Trend estimators: boundary-corrected Clark convolution and local linear.

Both estimators are linear in the cross-sectional means, so each one also
exposes its weight matrix ``W`` with ``estimate = W @ means``. The
covariance and simulation modules smooth many curves at once through it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .design import DesignGrid, FunctionalSample, cross_sectional_means
from .errors import (
    DegenerateWindowError,
    DomainError,
    InvalidBandwidthError,
    ValidationError,
)
from .kernels import EPANECHNIKOV, Kernel, boundary_norm, get_kernel

CLARK = "clark"
LOCAL_LINEAR = "local_linear"
_METHOD_ALIASES = {
    "clark": CLARK,
    "local_linear": LOCAL_LINEAR,
    "loclin": LOCAL_LINEAR,
    "local-linear": LOCAL_LINEAR,
}

DEFAULT_EVAL_POINTS = 401
DEGENERACY_RTOL = 1e-12


def default_bandwidth(n: int, horizon: float) -> float:
    """``T * n**(-1/4) / sqrt(log(max(n, 3)))``.

    Shrinks slightly faster than ``n**(-1/4)`` so that ``n h^4 -> 0``.
    """
    return horizon * n ** -0.25 / math.sqrt(math.log(max(n, 3)))


def default_eval_grid(horizon: float, points: int = DEFAULT_EVAL_POINTS) -> np.ndarray:
    return np.linspace(0.0, horizon, points)


@dataclass(frozen=True)
class EstimatorConfig:
    """Estimator choice, kernel and bandwidth (a positive float or ``"auto"``)."""

    method: str = LOCAL_LINEAR
    kernel: Kernel = EPANECHNIKOV
    bandwidth: float | str = "auto"

    def __post_init__(self):
        try:
            method = _METHOD_ALIASES[str(self.method).lower()]
        except KeyError:
            raise ValidationError(f"unknown estimator method {self.method!r}") from None
        object.__setattr__(self, "method", method)
        object.__setattr__(self, "kernel", get_kernel(self.kernel))
        bw = self.bandwidth
        if isinstance(bw, str):
            if bw.lower() != "auto":
                try:
                    bw = float(bw)
                except ValueError:
                    raise InvalidBandwidthError(f"invalid bandwidth {bw!r}") from None
            else:
                bw = "auto"
        if bw != "auto":
            bw = float(bw)
            if not (bw > 0 and math.isfinite(bw)):
                raise InvalidBandwidthError(f"bandwidth must be positive, got {bw}")
        object.__setattr__(self, "bandwidth", bw)

    @property
    def is_auto(self) -> bool:
        return self.bandwidth == "auto"

    def resolve(self, n: int, horizon: float) -> "EstimatorConfig":
        """Copy with a numeric bandwidth (the default rule when ``auto``)."""
        if self.is_auto:
            return replace(self, bandwidth=default_bandwidth(n, horizon))
        return self

    def as_dict(self):
        return {"method": self.method, "kernel": self.kernel.name, "bandwidth": self.bandwidth}


@dataclass(frozen=True, eq=False)
class TrendEstimate:
    eval_grid: np.ndarray
    values: np.ndarray
    config: EstimatorConfig
    n: int
    provenance: str = ""

    @property
    def bandwidth(self) -> float:
        return self.config.bandwidth

    def as_dict(self):
        return {
            "eval_grid": self.eval_grid.tolist(),
            "values": self.values.tolist(),
            "config": self.config.as_dict(),
            "n": self.n,
            "provenance": self.provenance,
        }


def _check_eval_grid(eval_grid, horizon):
    t = np.atleast_1d(np.asarray(eval_grid, dtype=float))
    if t.ndim != 1 or t.size == 0:
        raise ValidationError("eval_grid must be a non-empty 1-d sequence of times")
    if not np.all(np.isfinite(t)) or np.any(t < 0) or np.any(t > horizon):
        raise DomainError(f"eval_grid must lie in [0, {horizon}]")
    return t


def _resolved(config: EstimatorConfig, n: int, grid: DesignGrid, method: str | None = None):
    if method is not None and config.method != method:
        raise ValidationError(f"config.method is {config.method!r}, expected {method!r}")
    cfg = config.resolve(n, grid.horizon)
    if cfg.method == CLARK and cfg.bandwidth > grid.horizon:
        raise InvalidBandwidthError(
            f"bandwidth {cfg.bandwidth} exceeds the horizon {grid.horizon}"
        )
    return cfg


# ---------------------------------------------------------------------------
# Clark estimator


@lru_cache(maxsize=64)
def _clark_rule_cached(kernel_name, h, horizon, knots_bytes, eval_bytes):
    kernel = get_kernel(kernel_name)
    knots = np.frombuffer(knots_bytes, dtype=float)
    ts = np.frombuffer(eval_bytes, dtype=float)
    xg, wg = np.polynomial.legendre.leggauss(kernel.quadrature_order)
    kbreaks = np.asarray(kernel.breakpoints, dtype=float)
    norms = np.atleast_1d(boundary_norm(kernel, ts, h, horizon))

    rows, nodes, weights = [], [], []
    for i, t in enumerate(ts):
        a, b = max(0.0, t - h), min(horizon, t + h)
        inner = knots[(knots > a) & (knots < b)]
        kb = t - h * kbreaks
        kb = kb[(kb > a) & (kb < b)]
        cuts = np.unique(np.concatenate(([a, b], inner, kb)))
        lo, hi = cuts[:-1], cuts[1:]
        half = 0.5 * (hi - lo)
        u = (0.5 * (hi + lo))[:, None] + half[:, None] * xg[None, :]
        q = half[:, None] * wg[None, :] * kernel.scaled(t - u, h)
        rows.append(np.full(u.size, i))
        nodes.append(u.ravel())
        weights.append(q.ravel() / norms[i])
    out = (np.concatenate(rows), np.concatenate(nodes), np.concatenate(weights))
    for a in out:
        a.setflags(write=False)
    return out


def _clark_rule(kernel: Kernel, h: float, grid: DesignGrid, eval_grid: np.ndarray):
    """Quadrature rule for the normalized convolution at every eval point.

    Returns ``(rows, nodes, weights)`` such that the estimate at
    ``eval_grid[i]`` is the sum of ``weights * Ybar(nodes)`` over entries
    with ``rows == i``. The integration window is split at the knots and at
    the kernel's polynomial breakpoints, and each piece gets a Gauss-Legendre
    rule exact for (kernel piece) x (linear piece).
    """
    return _clark_rule_cached(
        kernel.name,
        float(h),
        float(grid.horizon),
        np.ascontiguousarray(grid.points, dtype=float).tobytes(),
        np.ascontiguousarray(eval_grid, dtype=float).tobytes(),
    )


def _clark_weight_matrix(kernel, h, grid, eval_grid):
    rows, nodes, q = _clark_rule(kernel, h, grid, eval_grid)
    pts = grid.points
    j = np.clip(np.searchsorted(pts, nodes, side="right") - 1, 0, grid.p - 2)
    lam = np.clip((nodes - pts[j]) / (pts[j + 1] - pts[j]), 0.0, 1.0)
    W = np.zeros((eval_grid.size, grid.p))
    np.add.at(W, (rows, j), q * (1.0 - lam))
    np.add.at(W, (rows, j + 1), q * lam)
    return W


def clark_estimate(sample: FunctionalSample, config: EstimatorConfig, eval_grid=None) -> TrendEstimate:
    """Kernel convolution of the interpolated cross-sectional means, renormalized at the edges.

    The interpolant is piecewise linear between knots and constant beyond
    the end knots; the integral is evaluated exactly by piecewise
    Gauss-Legendre quadrature.
    """
    grid = sample.grid
    cfg = _resolved(config, sample.n, grid, CLARK)
    t = _check_eval_grid(default_eval_grid(grid.horizon) if eval_grid is None else eval_grid, grid.horizon)
    means = cross_sectional_means(sample)
    rows, nodes, q = _clark_rule(cfg.kernel, cfg.bandwidth, grid, t)
    vals = np.bincount(rows, weights=q * np.interp(nodes, grid.points, means), minlength=t.size)
    return _make_estimate(t, vals, cfg, sample)


# ---------------------------------------------------------------------------
# Local linear estimator


def _local_moments(kernel, h, grid, t):
    d = grid.points[None, :] - t[:, None]
    k = kernel.scaled(d, h)
    s0 = k.sum(axis=1)
    s1 = (k * d).sum(axis=1)
    s2 = (k * d * d).sum(axis=1)
    den = s0 * s2 - s1 * s1
    npos = np.count_nonzero(k > 0, axis=1)
    bad = (npos < 2) | (den <= DEGENERACY_RTOL * (s0 * s2 + s1 * s1))
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DegenerateWindowError(
            f"local linear window at t={t[i]!r} is degenerate "
            f"({npos[i]} positively weighted grid points); increase the bandwidth",
            t=float(t[i]),
        )
    return d, k, s0, s1, s2, den


def local_linear_estimate(sample: FunctionalSample, config: EstimatorConfig, eval_grid=None) -> TrendEstimate:
    """Intercept of the kernel-weighted least-squares line through the means around each t."""
    grid = sample.grid
    cfg = _resolved(config, sample.n, grid, LOCAL_LINEAR)
    t = _check_eval_grid(default_eval_grid(grid.horizon) if eval_grid is None else eval_grid, grid.horizon)
    means = cross_sectional_means(sample)
    d, k, s0, s1, s2, den = _local_moments(cfg.kernel, cfg.bandwidth, grid, t)
    t0 = (k * means).sum(axis=1)
    t1 = (k * d * means).sum(axis=1)
    vals = (s2 * t0 - s1 * t1) / den
    return _make_estimate(t, vals, cfg, sample)


def _local_linear_weight_matrix(kernel, h, grid, t):
    d, k, s0, s1, s2, den = _local_moments(kernel, h, grid, t)
    return k * (s2[:, None] - s1[:, None] * d) / den[:, None]


# ---------------------------------------------------------------------------


def _make_estimate(t, vals, cfg, sample):
    t = np.array(t, dtype=float)
    vals = np.asarray(vals, dtype=float)
    t.setflags(write=False)
    vals.setflags(write=False)
    return TrendEstimate(t, vals, cfg, sample.n, sample.fingerprint())


def estimate_trend(sample: FunctionalSample, config: EstimatorConfig, eval_grid=None) -> TrendEstimate:
    """Dispatch on ``config.method``."""
    if config.method == CLARK:
        return clark_estimate(sample, config, eval_grid)
    return local_linear_estimate(sample, config, eval_grid)


def weight_matrix(config: EstimatorConfig, grid: DesignGrid, eval_grid, n: int = 1) -> np.ndarray:
    """Matrix ``W`` (eval points x grid points) with ``estimate = W @ means``.

    ``n`` is only used to resolve an ``auto`` bandwidth.
    """
    cfg = _resolved(config, n, grid)
    t = _check_eval_grid(eval_grid, grid.horizon)
    if cfg.method == CLARK:
        return _clark_weight_matrix(cfg.kernel, cfg.bandwidth, grid, t)
    return _local_linear_weight_matrix(cfg.kernel, cfg.bandwidth, grid, t)


def effective_weights(config: EstimatorConfig, grid: DesignGrid, t: float, n: int = 1) -> np.ndarray:
    """Weights ``w`` with ``estimate(t) = sum_j w_j * means_j``."""
    return weight_matrix(config, grid, [float(t)], n)[0]

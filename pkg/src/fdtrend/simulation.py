"""Gaussian-process data generator and Monte Carlo checks of the estimators.

Replication ``r`` of an experiment seeded with ``seed`` draws all of its
randomness from ``numpy.random.Generator(Philox(key=seed + r))``, so serial,
threaded and reordered runs give identical reports.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .bands import pointwise_radius, pointwise_band, simultaneous_band, simultaneous_radius
from .covariance import estimate_pointwise_variance
from .design import DesignGrid, FunctionalSample
from .errors import FdtrendError, NotPSDError, ReplicationError, ValidationError
from .estimators import (
    EstimatorConfig,
    default_eval_grid,
    effective_weights,
    estimate_trend,
    weight_matrix,
)

JITTER_LADDER = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8)

# ---------------------------------------------------------------------------
# Model description


@dataclass(frozen=True)
class MeanFunction:
    """Preset trend: ``zero``, ``sin`` (one period over the horizon) or ``quadratic``."""

    name: str = "sin"
    coefficients: tuple[float, float, float] = (0.0, 1.0, 1.0)

    def __post_init__(self):
        if self.name not in ("zero", "sin", "quadratic"):
            raise ValidationError(f"unknown mean preset {self.name!r}")

    def __call__(self, t, horizon: float = 1.0):
        t = np.asarray(t, dtype=float)
        if self.name == "zero":
            return np.zeros_like(t)
        if self.name == "sin":
            return np.sin(2.0 * np.pi * t / horizon)
        a, b, c = self.coefficients
        return a + b * t + c * t * t


COVARIANCE_KINDS = ("brownian", "brownian_bridge", "ornstein_uhlenbeck", "squared_exponential", "zero")
_COV_ALIASES = {
    "bm": "brownian",
    "brownian": "brownian",
    "bridge": "brownian_bridge",
    "brownian_bridge": "brownian_bridge",
    "ou": "ornstein_uhlenbeck",
    "ornstein_uhlenbeck": "ornstein_uhlenbeck",
    "se": "squared_exponential",
    "squared_exponential": "squared_exponential",
    "zero": "zero",
}


@dataclass(frozen=True)
class CovarianceFunction:
    kind: str = "ornstein_uhlenbeck"
    scale: float = 1.0
    range: float = 0.5

    def __post_init__(self):
        kind = _COV_ALIASES.get(str(self.kind).lower())
        if kind is None:
            raise ValidationError(f"unknown covariance {self.kind!r}; expected one of {COVARIANCE_KINDS}")
        object.__setattr__(self, "kind", kind)
        if kind != "zero" and not self.scale > 0:
            raise ValidationError(f"covariance scale must be positive, got {self.scale}")
        if kind in ("ornstein_uhlenbeck", "squared_exponential") and not self.range > 0:
            raise ValidationError(f"covariance range must be positive, got {self.range}")

    def __call__(self, s, t, horizon: float = 1.0):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        if self.kind == "brownian":
            return self.scale * np.minimum(s, t)
        if self.kind == "brownian_bridge":
            return self.scale * (np.minimum(s, t) - s * t / horizon)
        if self.kind == "ornstein_uhlenbeck":
            return self.scale * np.exp(-np.abs(s - t) / self.range)
        if self.kind == "squared_exponential":
            return self.scale * np.exp(-0.5 * ((s - t) / self.range) ** 2)
        return np.zeros(np.broadcast(s, t).shape)

    def matrix(self, points, horizon: float = 1.0) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return self(pts[:, None], pts[None, :], horizon)

    @property
    def path_regularity(self) -> str:
        return {
            "brownian": "holder(beta<1/2)",
            "brownian_bridge": "holder(beta<1/2)",
            "ornstein_uhlenbeck": "holder(beta<1/2)",
            "squared_exponential": "holder(1)",
            "zero": "variation_bounded",
        }[self.kind]


@dataclass(frozen=True)
class GPModel:
    mean: MeanFunction = field(default_factory=MeanFunction)
    covariance: CovarianceFunction = field(default_factory=CovarianceFunction)
    horizon: float = 1.0

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValidationError(f"horizon must be positive, got {self.horizon}")

    @property
    def path_regularity(self) -> str:
        return self.covariance.path_regularity

    @property
    def is_degenerate(self) -> bool:
        return self.covariance.kind == "zero"

    def mean_at(self, t):
        return self.mean(t, self.horizon)

    def variance_at(self, t):
        t = np.asarray(t, dtype=float)
        return self.covariance(t, t, self.horizon)

    def as_dict(self):
        return {
            "mean": self.mean.name,
            "mean_coefficients": list(self.mean.coefficients) if self.mean.name == "quadratic" else None,
            "covariance": self.covariance.kind,
            "scale": self.covariance.scale,
            "range": self.covariance.range,
            "horizon": self.horizon,
            "path_regularity": self.path_regularity,
        }


def make_model(covariance="ou", mean="sin", scale=1.0, range_=0.5, horizon=1.0, coefficients=(0.0, 1.0, 1.0)):
    """Convenience constructor for preset models."""
    return GPModel(
        MeanFunction(mean, tuple(coefficients)),
        CovarianceFunction(covariance, scale, range_),
        horizon,
    )


@dataclass(frozen=True)
class NoiseModel:
    """Additive measurement error with marginal variance ``sigma**2``.

    ``kind`` is ``"iid"`` or ``"ar1"`` (stationary autoregression along the
    grid with lag-one correlation ``rho``).
    """

    sigma: float = 0.0
    kind: str = "iid"
    rho: float = 0.0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValidationError(f"sigma must be nonnegative, got {self.sigma}")
        if self.kind not in ("iid", "ar1"):
            raise ValidationError(f"unknown noise kind {self.kind!r}")
        if self.kind == "ar1" and not -1.0 < self.rho < 1.0:
            raise ValidationError(f"AR(1) correlation must lie in (-1, 1), got {self.rho}")

    @classmethod
    def parse(cls, spec: str, sigma: float) -> "NoiseModel":
        """Parse ``"iid"`` or ``"ar1:RHO"``."""
        spec = spec.strip().lower()
        if spec == "iid":
            return cls(sigma, "iid")
        if spec.startswith("ar1:"):
            try:
                rho = float(spec[4:])
            except ValueError:
                raise ValidationError(f"invalid AR(1) coefficient in {spec!r}") from None
            return cls(sigma, "ar1", rho)
        raise ValidationError(f"invalid noise spec {spec!r}; expected 'iid' or 'ar1:RHO'")

    def covariance_matrix(self, p: int) -> np.ndarray:
        if self.kind == "iid":
            return self.sigma**2 * np.eye(p)
        lag = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
        return self.sigma**2 * self.rho**lag

    def as_dict(self):
        return asdict(self)


# ---------------------------------------------------------------------------
# Random draws


def replication_rng(seed: int, replication: int = 0) -> np.random.Generator:
    """Counter-based generator for replication ``replication`` of a run seeded ``seed``."""
    key = int(seed) + int(replication)
    if key < 0:
        raise ValidationError(f"seeds must be nonnegative, got {seed}")
    return np.random.Generator(np.random.Philox(key=key))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return replication_rng(seed, 0)


def gp_factor(model: GPModel, grid: DesignGrid):
    """Mean vector and lower Cholesky factor of the model on ``grid``.

    Diagonal jitter escalates through :data:`JITTER_LADDER` before giving up.
    """
    pts = grid.points
    mean = np.asarray(model.mean_at(pts), dtype=float)
    if model.is_degenerate:
        return mean, np.zeros((pts.size, pts.size))
    cov = model.covariance.matrix(pts, model.horizon)
    cov = 0.5 * (cov + cov.T)
    eye = np.eye(pts.size)
    for delta in JITTER_LADDER:
        try:
            return mean, np.linalg.cholesky(cov + delta * eye)
        except np.linalg.LinAlgError:
            continue
    raise NotPSDError(
        f"covariance matrix of {model.covariance.kind} on {pts.size} points is not "
        f"positive definite even with jitter {JITTER_LADDER[-1]}"
    )


def _draw_paths(mean, chol, n, rng):
    z = rng.standard_normal((n, mean.size))
    return mean[None, :] + z @ chol.T


def sample_gp(model: GPModel, grid: DesignGrid, n: int, seed) -> np.ndarray:
    """``n`` independent paths of the model evaluated on ``grid`` (an n x p matrix)."""
    if n < 1:
        raise ValidationError(f"n must be at least 1, got {n}")
    mean, chol = gp_factor(model, grid)
    return _draw_paths(mean, chol, n, _as_rng(seed))


def add_noise(paths, noise: NoiseModel, seed) -> np.ndarray:
    """Add measurement error to every entry; ``sigma == 0`` returns an unchanged copy."""
    paths = np.asarray(paths, dtype=float)
    out = np.array(paths, copy=True)
    if noise.sigma == 0:
        return out
    rng = _as_rng(seed)
    z = rng.standard_normal(paths.shape)
    if noise.kind == "iid":
        return out + noise.sigma * z
    rho = noise.rho
    innov = math.sqrt(1.0 - rho * rho)
    eps = np.empty_like(z)
    eps[..., 0] = z[..., 0]
    for j in range(1, z.shape[-1]):
        eps[..., j] = rho * eps[..., j - 1] + innov * z[..., j]
    return out + noise.sigma * eps


def simulate_sample(model: GPModel, noise: NoiseModel, grid: DesignGrid, n: int, seed) -> FunctionalSample:
    rng = _as_rng(seed)
    paths = sample_gp(model, grid, n, rng)
    return FunctionalSample(add_noise(paths, noise, rng), grid)


def _run(fn, M, n_jobs=1, order=None):
    indices = list(range(M)) if order is None else list(order)
    if sorted(indices) != list(range(M)):
        raise ValidationError("replication order must be a permutation of range(M)")

    def wrapped(r):
        try:
            return r, fn(r)
        except FdtrendError as exc:
            raise ReplicationError(r, exc) from exc

    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            pairs = list(pool.map(wrapped, indices))
    else:
        pairs = [wrapped(r) for r in indices]
    results = dict(pairs)
    return [results[r] for r in range(M)]


def _check_counts(n, p, M):
    if n < 1 or p < 2 or M < 1:
        raise ValidationError(f"need n >= 1, p >= 2 and M >= 1 (got n={n}, p={p}, M={M})")


# ---------------------------------------------------------------------------
# Coverage


@dataclass
class CoverageReport:
    replications: int
    seed: int
    config: dict
    status: str = "ok"
    diagnostic: str | None = None
    simultaneous_coverage: float | None = None
    pointwise_band_simultaneous_coverage: float | None = None
    pointwise_coverage: float | None = None
    pointwise_band_pointwise_coverage: float | None = None
    mean_half_width: float | None = None
    mean_pointwise_half_width: float | None = None
    radius: float | None = None
    pointwise_radius: float | None = None
    max_abs_bias: float | None = None
    sup_deviation: dict | None = None
    sup_deviations: list = field(default_factory=list)

    def as_dict(self):
        return asdict(self)


def coverage_experiment(
    gp: GPModel,
    noise: NoiseModel,
    n: int,
    p: int,
    est: EstimatorConfig,
    gamma: float,
    M: int,
    seed: int,
    eval_points: int = 401,
    n_jobs: int = 1,
    order=None,
) -> CoverageReport:
    """Empirical coverage of the simultaneous band for the true trend.

    Each replication simulates a sample on the regular grid ``j T / p``,
    estimates trend and pointwise variance, and checks whether the true mean
    lies inside the band at every eval point. The pointwise band is built
    from the same replication as a comparison arm. ``sup_deviations`` holds
    ``max_t |estimate - mu| / sqrt(R(t,t)/n)`` for each replication.
    """
    _check_counts(n, p, M)
    lam = simultaneous_radius(gamma)
    z = pointwise_radius(gamma)
    grid = DesignGrid.regular(p, gp.horizon)
    t_eval = default_eval_grid(gp.horizon, eval_points)
    cfg = est.resolve(n, gp.horizon)
    config = {
        "model": gp.as_dict(),
        "noise": noise.as_dict(),
        "n": n,
        "p": p,
        "grid": "regular",
        "estimator": cfg.as_dict(),
        "bandwidth_rule": "auto" if est.is_auto else "manual",
        "gamma": gamma,
        "eval_points": eval_points,
    }
    report = CoverageReport(M, seed, config, radius=lam, pointwise_radius=z)
    if gp.is_degenerate:
        report.status = "skipped"
        report.diagnostic = "degenerate model: covariance is identically zero, bands are undefined"
        return report

    mean_vec, chol = gp_factor(gp, grid)
    mu_true = gp.mean_at(t_eval)
    # Deterministic smoothing bias of the linear estimator on the true mean.
    W = weight_matrix(cfg, grid, t_eval, n)
    report.max_abs_bias = float(np.max(np.abs(W @ mean_vec - mu_true)))

    def one(r):
        rng = replication_rng(seed, r)
        paths = _draw_paths(mean_vec, chol, n, rng)
        sample = FunctionalSample(add_noise(paths, noise, rng), grid)
        trend = estimate_trend(sample, cfg, t_eval)
        var = estimate_pointwise_variance(sample, cfg, t_eval)
        sim = simultaneous_band(trend, var, gamma)
        pw = pointwise_band(trend, var, gamma)
        in_sim = sim.contains(mu_true)
        in_pw = pw.contains(mu_true)
        scale = np.sqrt(var.values / n)
        dev = np.abs(trend.values - mu_true)
        with np.errstate(divide="ignore", invalid="ignore"):
            std = np.where(scale > 0, dev / scale, np.where(dev > 0, np.inf, 0.0))
        return (
            bool(in_sim.all()),
            bool(in_pw.all()),
            float(in_sim.mean()),
            float(in_pw.mean()),
            float(sim.half_width.mean()),
            float(pw.half_width.mean()),
            float(std.max()),
        )

    rows = np.array(_run(one, M, n_jobs, order), dtype=float)
    sups = rows[:, 6]
    report.simultaneous_coverage = float(rows[:, 0].mean())
    report.pointwise_band_simultaneous_coverage = float(rows[:, 1].mean())
    report.pointwise_coverage = float(rows[:, 2].mean())
    report.pointwise_band_pointwise_coverage = float(rows[:, 3].mean())
    report.mean_half_width = float(rows[:, 4].mean())
    report.mean_pointwise_half_width = float(rows[:, 5].mean())
    report.sup_deviation = {
        "mean": float(np.mean(sups)),
        "median": float(np.median(sups)),
        "q90": float(np.quantile(sups, 0.90)),
        "q95": float(np.quantile(sups, 0.95)),
        "max": float(np.max(sups)),
        "exceeds_radius": float(np.mean(sups > lam)),
    }
    report.sup_deviations = sups.tolist()
    return report


# ---------------------------------------------------------------------------
# Normality


@dataclass
class NormalityReport:
    t0: float
    n: int
    p: int
    replications: int
    seed: int
    config: dict
    status: str = "ok"
    diagnostic: str | None = None
    mean: float | None = None
    empirical_variance: float | None = None
    model_variance: float | None = None
    variance_ratio: float | None = None
    finite_sample_variance: float | None = None
    finite_sample_ratio: float | None = None
    skewness: float | None = None
    excess_kurtosis: float | None = None
    ks_distance: float | None = None
    ks_pvalue: float | None = None

    def as_dict(self):
        return asdict(self)


def normality_diagnostic(
    gp: GPModel,
    noise: NoiseModel,
    n: int,
    p: int,
    est: EstimatorConfig,
    t0: float,
    M: int,
    seed: int,
    n_jobs: int = 1,
) -> NormalityReport:
    """Distribution of ``sqrt(n) * (estimate(t0) - mu(t0))`` over ``M`` replications.

    ``model_variance`` is the process variance R(t0, t0), the limit variance.
    ``finite_sample_variance`` is the exact variance of the scaled estimator
    at this (n, p, h), which includes kernel attenuation and residual noise.
    The KS distance is measured against N(0, R(t0, t0)).
    """
    _check_counts(n, p, M)
    if M < 100:
        raise ValidationError(f"normality diagnostic needs M >= 100, got {M}")
    if not 0 <= t0 <= gp.horizon:
        raise ValidationError(f"t0 must lie in [0, {gp.horizon}]")
    grid = DesignGrid.regular(p, gp.horizon)
    cfg = est.resolve(n, gp.horizon)
    config = {
        "model": gp.as_dict(),
        "noise": noise.as_dict(),
        "estimator": cfg.as_dict(),
        "grid": "regular",
    }
    report = NormalityReport(float(t0), n, p, M, seed, config)
    R00 = float(gp.variance_at(t0))
    if gp.is_degenerate or R00 <= 0:
        report.status = "skipped"
        report.diagnostic = f"degenerate model: R(t0, t0) = {R00}"
        return report

    mean_vec, chol = gp_factor(gp, grid)
    mu0 = float(gp.mean_at(t0))
    t_eval = np.array([float(t0)])

    def one(r):
        rng = replication_rng(seed, r)
        paths = _draw_paths(mean_vec, chol, n, rng)
        sample = FunctionalSample(add_noise(paths, noise, rng), grid)
        return math.sqrt(n) * (float(estimate_trend(sample, cfg, t_eval).values[0]) - mu0)

    x = np.array(_run(one, M, n_jobs), dtype=float)
    w = effective_weights(cfg, grid, t0, n)
    cov = gp.covariance.matrix(grid.points, gp.horizon) + noise.covariance_matrix(p)
    exact = float(w @ cov @ w)

    ks = stats.kstest(x, "norm", args=(0.0, math.sqrt(R00)))
    report.mean = float(x.mean())
    report.empirical_variance = float(x.var(ddof=1))
    report.model_variance = R00
    report.variance_ratio = report.empirical_variance / R00
    report.finite_sample_variance = exact
    report.finite_sample_ratio = report.empirical_variance / exact
    report.skewness = float(stats.skew(x, bias=False))
    report.excess_kurtosis = float(stats.kurtosis(x, fisher=True, bias=False))
    report.ks_distance = float(ks.statistic)
    report.ks_pvalue = float(ks.pvalue)
    return report


# ---------------------------------------------------------------------------
# Rate check


@dataclass
class RateReport:
    n: int
    p_list: list
    t0: float
    replications: int
    seed: int
    config: dict
    common_paths: bool
    variances: list
    scaled_variances: list
    variance_ratio: float
    nph_predicted_ratio: float
    doubled_n_variance: float | None = None
    n_doubling_ratio: float | None = None
    n_doubling_p: int | None = None

    def as_dict(self):
        return asdict(self)


def rate_check(
    gp: GPModel,
    noise: NoiseModel,
    n: int,
    p_list,
    est: EstimatorConfig,
    t0: float,
    M: int,
    seed: int,
    n_doubling: bool = True,
    n_jobs: int = 1,
) -> RateReport:
    """Variance of ``estimate(t0)`` at fixed n across grid sizes.

    With an ``n**-1`` variance rate the variance barely moves as p grows;
    a ``(n p h)**-1`` rate would shrink it by ``max(p) / min(p)``. The
    bandwidth is resolved once from ``n`` and held fixed across all arms.

    When every p divides the largest one, the regular grids are nested and
    all arms observe the same simulated paths (common random numbers);
    noise is drawn independently per arm. The optional n-doubling arm adds
    ``n`` fresh paths on the largest grid and reports ``var(n) / var(2n)``.
    """
    p_list = [int(p) for p in p_list]
    if not p_list or any(b <= a for a, b in zip(p_list, p_list[1:])):
        raise ValidationError("p_list must be a non-empty increasing sequence")
    for p in p_list:
        _check_counts(n, p, M)
    if not 0 <= t0 <= gp.horizon:
        raise ValidationError(f"t0 must lie in [0, {gp.horizon}]")
    cfg = est.resolve(n, gp.horizon)
    p_max = p_list[-1]
    common = all(p_max % p == 0 for p in p_list)
    grids = {p: DesignGrid.regular(p, gp.horizon) for p in p_list}
    factors = {p: gp_factor(gp, grids[p]) for p in ([p_max] if common else p_list)}
    t_eval = np.array([float(t0)])

    def estimate(data, grid):
        return float(estimate_trend(FunctionalSample(data, grid), cfg, t_eval).values[0])

    def one(r):
        rng = replication_rng(seed, r)
        out = []
        if common:
            mean_vec, chol = factors[p_max]
            paths = _draw_paths(mean_vec, chol, n, rng)
        for p in p_list:
            if common:
                stride = p_max // p
                sub = paths[:, stride - 1 :: stride]
            else:
                sub = _draw_paths(*factors[p], n, rng)
            out.append(estimate(add_noise(sub, noise, rng), grids[p]))
        if n_doubling:
            if not common:
                paths = sub
            extra = _draw_paths(*factors[p_max], n, rng)
            both = np.vstack([paths, extra])
            out.append(estimate(add_noise(both, noise, rng), grids[p_max]))
        return out

    vals = np.array(_run(one, M, n_jobs), dtype=float)
    variances = vals[:, : len(p_list)].var(axis=0, ddof=1)
    report = RateReport(
        n=n,
        p_list=p_list,
        t0=float(t0),
        replications=M,
        seed=seed,
        config={"model": gp.as_dict(), "noise": noise.as_dict(), "estimator": cfg.as_dict(), "grid": "regular"},
        common_paths=common,
        variances=variances.tolist(),
        scaled_variances=(n * variances).tolist(),
        variance_ratio=float(variances.max() / variances.min()),
        nph_predicted_ratio=p_max / p_list[0],
    )
    if n_doubling:
        v2 = float(vals[:, -1].var(ddof=1))
        report.doubled_n_variance = v2
        report.n_doubling_ratio = float(variances[-1] / v2)
        report.n_doubling_p = p_max
    return report

import numpy as np
import pytest
from scipy import stats

from fdtrend import (
    DesignGrid,
    EstimatorConfig,
    FunctionalSample,
    InsufficientDataError,
    NoiseModel,
    effective_weights,
    estimate_noise_variance,
    estimate_pointwise_variance,
    make_model,
    replication_rng,
    simulate_sample,
)

LL = EstimatorConfig("local_linear", bandwidth=0.1)


def test_noise_variance_examples():
    g5 = DesignGrid(np.linspace(0.1, 0.9, 5), 1.0)
    assert estimate_noise_variance(FunctionalSample([[0.0, 1.0, 0.0, 1.0, 0.0]], g5)) == 0.5
    assert estimate_noise_variance(FunctionalSample(np.full((4, 5), 3.0), g5)) == 0.0
    with pytest.raises(InsufficientDataError):
        estimate_noise_variance(FunctionalSample(np.ones((3, 2)), DesignGrid([0.2, 0.4], 1.0)))


def test_noise_variance_monte_carlo():
    g = DesignGrid.regular(200)
    est = [
        estimate_noise_variance(FunctionalSample(replication_rng(77, r).normal(0, 0.2, (50, 200)), g))
        for r in range(200)
    ]
    assert abs(np.mean(est) / 0.04 - 1) <= 0.05


def test_identical_curves_zero_variance(sample):
    s = FunctionalSample(np.tile(sample.data[0], (5, 1)), sample.grid)
    v = estimate_pointwise_variance(s, LL)
    np.testing.assert_allclose(v.values, 0.0, atol=1e-20)


def test_random_constants(rng):
    g = DesignGrid(np.linspace(0, 1, 50))
    a = rng.normal(size=12)
    s = FunctionalSample(np.repeat(a[:, None], 50, axis=1), g)
    v = estimate_pointwise_variance(s, LL)
    np.testing.assert_allclose(v.values, np.var(a, ddof=1), rtol=0, atol=1e-10)


def test_brownian_smoothed_variance():
    # Smoothed curves are Gaussian, so (n-1) R_hat / v is chi-square(n-1) with v = w' C w.
    model = make_model("brownian", "zero")
    g = DesignGrid.regular(200)
    n = 400
    cfg = EstimatorConfig("local_linear")
    w = effective_weights(cfg, g, 0.5, n)
    v = w @ model.covariance.matrix(g.points) @ w
    assert 0.45 < v < 0.5  # kernel smoothing attenuates R(0.5, 0.5) = 0.5
    p_exact = stats.chi2.cdf((n - 1) * 1.15, n - 1) - stats.chi2.cdf((n - 1) * 0.85, n - 1)
    assert p_exact >= 0.95

    vals = np.array([
        estimate_pointwise_variance(simulate_sample(model, NoiseModel(0), g, n, replication_rng(5000, r)), cfg, [0.5]).values[0]
        for r in range(100)
    ])
    assert np.mean(np.abs(vals / v - 1) <= 0.15) >= 0.95
    assert abs(vals.mean() / v - 1) < 0.02


def test_scaling_and_shift(sample, rng):
    c = -3.0
    base = estimate_pointwise_variance(sample, LL)
    scaled = estimate_pointwise_variance(FunctionalSample(c * sample.data, sample.grid), LL)
    np.testing.assert_allclose(scaled.values, c**2 * base.values, rtol=1e-10)
    assert scaled.noise_variance == pytest.approx(c**2 * base.noise_variance, rel=1e-10)

    shift = rng.normal(size=sample.p) * 5
    shifted = FunctionalSample(sample.data + shift, sample.grid)
    moved = estimate_pointwise_variance(shifted, LL)
    np.testing.assert_allclose(moved.values, base.values, rtol=1e-10, atol=1e-12)
    d = np.diff(sample.data, axis=1)
    ds = np.diff(shift)
    expected = base.noise_variance + (2 * np.sum(d @ ds) + sample.n * ds @ ds) / (2 * sample.n * (sample.p - 1))
    assert moved.noise_variance == pytest.approx(expected, rel=1e-10)


def test_nonnegative_and_requires_two_curves(sample, rng):
    for method in ("clark", "local_linear"):
        v = estimate_pointwise_variance(sample, EstimatorConfig(method, bandwidth=0.08))
        assert np.all(v.values >= 0)
    with pytest.raises(InsufficientDataError):
        estimate_pointwise_variance(FunctionalSample(sample.data[:1], sample.grid), LL)


def test_matches_per_curve_smoothing(sample):
    from fdtrend import estimate_trend

    for method in ("clark", "local_linear"):
        cfg = EstimatorConfig(method, bandwidth=0.1)
        t = np.linspace(0, 1, 33)
        rows = np.array([estimate_trend(FunctionalSample(r, sample.grid), cfg, t).values for r in sample.data])
        v = estimate_pointwise_variance(sample, cfg, t)
        np.testing.assert_allclose(v.values, rows.var(axis=0, ddof=1), rtol=1e-10, atol=1e-14)

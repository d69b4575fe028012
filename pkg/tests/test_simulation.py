import numpy as np
import pytest

from fdtrend import (
    CovarianceFunction,
    DesignGrid,
    EstimatorConfig,
    GPModel,
    MeanFunction,
    NoiseModel,
    NotPSDError,
    ValidationError,
    add_noise,
    coverage_experiment,
    make_model,
    normality_diagnostic,
    rate_check,
    replication_rng,
    sample_gp,
)
from fdtrend.simulation import gp_factor

LL = EstimatorConfig("local_linear")


def test_brownian_variance():
    g = DesignGrid.regular(50)
    x = sample_gp(make_model("brownian", "zero"), g, 10_000, seed=3)
    var = x.var(axis=0, ddof=1)
    sel = g.points >= 0.2
    np.testing.assert_allclose(var[sel], g.points[sel], rtol=0.05)


def test_zero_mean_clt():
    model = make_model("ou", "zero")
    g = DesignGrid.regular(40)
    n = 2000
    x = sample_gp(model, g, n, seed=4)
    assert np.all(np.abs(x.mean(axis=0)) <= 4 * np.sqrt(model.variance_at(g.points) / n))


def test_bridge_pinned():
    g = DesignGrid(np.linspace(0, 1, 41))
    x = sample_gp(make_model("brownian_bridge", "zero"), g, 4000, seed=5)
    v = x.var(axis=0)
    assert v[0] <= v[20] and v[-1] <= v[20]
    assert v[0] < 1e-6 and v[-1] < 1e-6


def test_sample_gp_deterministic():
    g = DesignGrid.regular(30)
    m = make_model("squared_exponential", "quadratic", 0.5, 0.1)
    assert np.array_equal(sample_gp(m, g, 7, 99), sample_gp(m, g, 7, 99))
    assert not np.array_equal(sample_gp(m, g, 7, 99), sample_gp(m, g, 7, 100))


def test_mean_presets():
    t = np.array([0.0, 0.25, 0.5])
    np.testing.assert_allclose(MeanFunction("sin")(t), [0, 1, 0], atol=1e-15)
    np.testing.assert_allclose(MeanFunction("quadratic", (1.0, 2.0, 3.0))(t), 1 + 2 * t + 3 * t * t)
    assert np.all(MeanFunction("zero")(t) == 0)
    with pytest.raises(ValidationError):
        MeanFunction("cubic")


def test_model_validation():
    with pytest.raises(ValidationError):
        CovarianceFunction("ou", scale=0.0)
    with pytest.raises(ValidationError):
        CovarianceFunction("se", range=-1.0)
    with pytest.raises(ValidationError):
        CovarianceFunction("matern")
    assert GPModel().path_regularity.startswith("holder")


def test_not_psd():
    class Bad(CovarianceFunction):
        def matrix(self, points, horizon=1.0):
            return -np.eye(len(points))

    with pytest.raises(NotPSDError):
        gp_factor(GPModel(covariance=Bad()), DesignGrid.regular(5))


def test_noise_zero_sigma_identity(rng):
    x = rng.normal(size=(4, 9))
    assert np.array_equal(add_noise(x, NoiseModel(0.0), 1), x)
    assert np.array_equal(add_noise(x, NoiseModel(0.0, "ar1", 0.4), 1), x)


def test_iid_noise_moments(rng):
    x = rng.normal(size=(200, 600))
    e = add_noise(x, NoiseModel(0.5), 8) - x
    assert abs(e.var() / 0.25 - 1) <= 0.03


def test_ar1_noise_moments():
    x = np.zeros((400, 300))
    e = add_noise(x, NoiseModel(1.0, "ar1", 0.6), 9)
    lag1 = np.mean(e[:, 1:] * e[:, :-1]) / e.var()
    assert abs(lag1 - 0.6) <= 0.03
    assert abs(e[:, 0].var() - 1) < 0.2 and abs(e.var() - 1) < 0.05


def test_noise_parse():
    assert NoiseModel.parse("ar1:0.5", 0.2) == NoiseModel(0.2, "ar1", 0.5)
    assert NoiseModel.parse("iid", 0.3).kind == "iid"
    for bad in ("ar1:1.0", "ar1:x", "garch"):
        with pytest.raises(ValidationError):
            NoiseModel.parse(bad, 0.1)
    with pytest.raises(ValidationError):
        NoiseModel(-1.0)


def test_replication_rng_counter_scheme():
    a = replication_rng(10, 3).standard_normal(5)
    b = replication_rng(13, 0).standard_normal(5)
    assert np.array_equal(a, b)
    with pytest.raises(ValidationError):
        replication_rng(-5)


def _small_coverage(**kw):
    args = dict(gp=make_model("ou"), noise=NoiseModel(0.25), n=40, p=30, est=LL, gamma=0.1, M=30, seed=11, eval_points=51)
    args.update(kw)
    return coverage_experiment(**args)


def test_coverage_deterministic_and_order_free():
    a = _small_coverage().as_dict()
    b = _small_coverage().as_dict()
    c = _small_coverage(order=list(reversed(range(30)))).as_dict()
    d = _small_coverage(n_jobs=4).as_dict()
    assert a == b == c == d
    assert 0 <= a["simultaneous_coverage"] <= 1 and len(a["sup_deviations"]) == 30
    assert a["config"]["gamma"] == 0.1 and a["seed"] == 11


def test_coverage_monotone_in_gamma():
    hi = _small_coverage(gamma=0.05, M=60)
    lo = _small_coverage(gamma=0.20, M=60)
    assert hi.simultaneous_coverage >= lo.simultaneous_coverage
    assert hi.simultaneous_coverage >= hi.pointwise_band_simultaneous_coverage


def test_coverage_degenerate_model():
    r = _small_coverage(gp=make_model("zero"), noise=NoiseModel(0.0))
    assert r.status == "skipped" and "degenerate" in r.diagnostic
    assert r.simultaneous_coverage is None


def test_normality_small():
    r = normality_diagnostic(make_model("ou"), NoiseModel(0.25), 50, 50, LL, 0.5, 200, 3)
    assert r.model_variance == 1.0
    assert 0.6 < r.variance_ratio < 1.4
    assert 0.7 < r.finite_sample_ratio < 1.3
    with pytest.raises(ValidationError):
        normality_diagnostic(make_model("ou"), NoiseModel(0.25), 50, 50, LL, 0.5, 50, 3)


def test_rate_check_small():
    r = rate_check(make_model("ou"), NoiseModel(0.25), 30, [20, 40, 80], LL, 0.5, 80, 6)
    assert r.common_paths and r.nph_predicted_ratio == 4.0
    assert len(r.variances) == 3 and r.variance_ratio >= 1
    r2 = rate_check(make_model("ou"), NoiseModel(0.25), 30, [20, 30], LL, 0.5, 80, 6, n_doubling=False)
    assert not r2.common_paths and r2.n_doubling_ratio is None
    assert rate_check(make_model("ou"), NoiseModel(0.25), 30, [20, 40, 80], LL, 0.5, 80, 6).as_dict() == r.as_dict()
    with pytest.raises(ValidationError):
        rate_check(make_model("ou"), NoiseModel(0.25), 30, [40, 20], LL, 0.5, 80, 6)

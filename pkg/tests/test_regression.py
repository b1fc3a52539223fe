import math

import numpy as np
import pytest

from gpcover.errors import InvalidArgumentError
from gpcover.gp.linalg import jitter_cholesky
from gpcover.gp.regression import fit_gp, fit_methods, log_marginal, predict, simulate_regression
from gpcover.gp.types import GpBounds, GpFit, Method, RegressionData
from gpcover.optimize import Boundary
from gpcover.signals.construct import make_f2
from gpcover.signals.synthesize import evaluate


@pytest.fixture(scope="module")
def data():
    return simulate_regression(make_f2(), 200, 50, 0.5, seed=4, stream=(0, 0))


def test_noiseless_data_lie_on_the_truth():
    truth = make_f2()
    d = simulate_regression(truth, 200, 40, 0.0, seed=1)
    assert np.array_equal(d.y, evaluate(truth, d.x, 200))
    assert np.all((d.x >= 0) & (d.x <= 1))


def test_noise_variance():
    truth = make_f2()
    d = simulate_regression(truth, 200, 20_000, 0.5, seed=2)
    assert np.var(d.y - evaluate(truth, d.x, 200)) == pytest.approx(0.5, rel=0.03)


def test_simulation_is_deterministic():
    a = simulate_regression(make_f2(), 200, 30, 0.5, seed=3, stream=(1, 7))
    b = simulate_regression(make_f2(), 200, 30, 0.5, seed=3, stream=(1, 7))
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    with pytest.raises(InvalidArgumentError):
        simulate_regression(make_f2(), 200, 1, 0.5)


def test_two_point_marginal_likelihood():
    d = RegressionData(np.array([0.0, 0.5]), np.array([1.0, -1.0]), 0.1)
    a, s2 = 2.0, 0.1
    C = np.array([[1 + s2, math.exp(-a / 4)], [math.exp(-a / 4), 1 + s2]])
    _, logdet = np.linalg.slogdet(C)
    expected = -0.5 * d.y @ np.linalg.solve(C, d.y) - 0.5 * logdet - math.log(2 * math.pi)
    assert log_marginal(d, a, s2) == pytest.approx(expected, rel=1e-12)


def test_fit_beats_random_hyperparameters(data):
    fit = fit_gp(data)
    rng = np.random.default_rng(0)
    for _ in range(100):
        a = 10 ** rng.uniform(-2, 6)
        s2 = 10 ** rng.uniform(-6, 2)
        assert fit.log_marginal >= log_marginal(data, a, s2) - 1e-6


def test_zero_responses_hit_the_lower_bounds():
    d = RegressionData(np.linspace(0, 1, 20), np.zeros(20), 0.0)
    fit = fit_gp(d, GpBounds(a_grid=20, sigma2_grid=10))
    assert fit.sigma2_boundary == Boundary.AT_LOWER
    assert fit.sigma2_hat == pytest.approx(1e-6)


def test_marginal_likelihood_is_permutation_invariant(data):
    perm = np.random.default_rng(3).permutation(data.n)
    shuffled = RegressionData(data.x[perm], data.y[perm], data.sigma2_true)
    expected = log_marginal(data, 7.0, 0.4)
    assert log_marginal(shuffled, 7.0, 0.4) == pytest.approx(expected, rel=1e-10)
    assert fit_gp(shuffled).log_marginal == pytest.approx(fit_gp(data).log_marginal, rel=1e-6)


def test_prediction_interpolates_smooth_data():
    x = np.linspace(0, 1, 30)
    d = RegressionData(x, np.cos(x), 0.0)
    fit = GpFit(
        a_hat=10.0, a_eff=10.0, sigma2_hat=1e-6, log_marginal=0.0, method=Method.STANDARD, n=30
    )
    pred = predict(fit, d, x)
    assert np.max(np.abs(pred.mean - d.y)) < 1e-2
    assert np.all(pred.var < 1e-3)

    far = predict(fit, d, np.array([50.0]))
    assert abs(far.mean[0]) < 1e-12
    assert far.var[0] == pytest.approx(1.0)


def test_predictive_variance_in_unit_interval(data):
    fit = fit_gp(data)
    pred = predict(fit, data, np.linspace(0, 1, 101))
    assert np.all(pred.var > 0) and np.all(pred.var <= 1)
    assert np.all(pred.lower <= pred.mean) and np.all(pred.mean <= pred.upper)


def test_methods(data):
    fits = fit_methods(data)
    std, infl, mod = fits[Method.STANDARD], fits[Method.INFLATED], fits[Method.MODIFIED]
    assert mod.a_eff == pytest.approx(std.a_hat * math.log(data.n), rel=1e-14)
    assert mod.sigma2_hat == std.sigma2_hat
    assert infl.a_eff == std.a_eff

    x = np.linspace(0, 1, 50)
    p1, p2, p3 = (predict(fits[m], data, x) for m in Method)
    assert p2.half_width == pytest.approx(p1.half_width * math.log(data.n), rel=1e-14)
    assert p1.half_width.mean() <= p3.half_width.mean()
    assert Method.MODIFIED.title == "Method 3"


def test_jitter_rescues_a_singular_kernel():
    K = np.ones((3, 3))
    L, jitter = jitter_cholesky(K)
    assert jitter > 0
    assert np.allclose(L @ L.T, K + jitter * np.eye(3))

    L, jitter = jitter_cholesky(np.eye(3) * 2)
    assert jitter == 0.0
    assert np.allclose(L, np.eye(3) * math.sqrt(2))


def test_data_validation():
    with pytest.raises(InvalidArgumentError):
        RegressionData(np.zeros(3), np.zeros(2), 0.1)
    with pytest.raises(ValueError):
        GpBounds(a_min=10.0, a_max=1.0)

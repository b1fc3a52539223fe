"""
Gaussian-process regression on [0, 1] with kernel exp(-a(s - t)²) and
Gaussian noise of variance σ², both hyper-parameters set by maximising the
marginal likelihood.

The search profiles σ² out for each a: one eigendecomposition K_a = QΛQᵀ gives
the likelihood for every σ² in O(n), so the σ² grid and its golden-section
polishing come at no extra factorisation cost.
"""

import logging
import math
from dataclasses import replace

import numpy as np
from scipy import linalg

from gpcover.errors import InvalidArgumentError
from gpcover.gp.kernel import se_kernel
from gpcover.gp.linalg import cho_solve, jitter_cholesky, log_det
from gpcover.gp.types import GpBounds, GpFit, Method, Prediction, Q_975, RegressionData
from gpcover.optimize import GridMaximum, maximize_on_log_grid
from gpcover.rng import derive_rng
from gpcover.signals.synthesize import evaluate
from gpcover.signals.types import SequenceSignal

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2 * math.pi)


def simulate_regression(
    truth: SequenceSignal,
    K: int,
    n: int,
    sigma2: float,
    seed: int = 0,
    stream: tuple[int, ...] = (),
) -> RegressionData:
    if n < 2:
        raise InvalidArgumentError(f"Regression needs n >= 2, got {n}", n)
    if sigma2 < 0:
        raise InvalidArgumentError(f"Noise variance must be >= 0, got {sigma2}", sigma2)
    rng = derive_rng(seed, *stream)
    x = rng.uniform(0.0, 1.0, n)
    noise = rng.standard_normal(n) * math.sqrt(sigma2)
    return RegressionData(x, evaluate(truth, x, K) + noise, sigma2, seed)


def log_marginal(data: RegressionData, a: float, sigma2: float) -> float:
    """-½yᵀ(K_a+σ²I)⁻¹y - ½log det(K_a+σ²I) - (n/2)log 2π."""
    C = se_kernel(data.x, data.x, a) + sigma2 * np.eye(data.n)
    L, _ = jitter_cholesky(C)
    alpha = cho_solve(L, data.y)
    return -0.5 * float(data.y @ alpha) - 0.5 * log_det(L) - 0.5 * data.n * LOG_2PI


def _spectrum(data: RegressionData, a: float) -> tuple[np.ndarray, np.ndarray]:
    lam, Q = linalg.eigh(se_kernel(data.x, data.x, a))
    return np.clip(lam, 0.0, None), (Q.T @ data.y) ** 2


def _spectral_log_marginal(lam: np.ndarray, r2: np.ndarray, sigma2: float) -> float:
    d = lam + sigma2
    return -0.5 * float(np.sum(r2 / d) + np.sum(np.log(d)) + lam.size * LOG_2PI)


def _profile(data: RegressionData, a: float, bounds: GpBounds) -> GridMaximum:
    lam, r2 = _spectrum(data, a)
    return maximize_on_log_grid(
        lambda s2: _spectral_log_marginal(lam, r2, s2),
        bounds.sigma2_min,
        bounds.sigma2_max,
        bounds.sigma2_grid,
        bounds.refine_tol,
        name="sigma2",
    )


def fit_gp(data: RegressionData, bounds: GpBounds = GpBounds()) -> GpFit:
    best_a = maximize_on_log_grid(
        lambda a: _profile(data, a, bounds).maximum,
        bounds.a_min,
        bounds.a_max,
        bounds.a_grid,
        bounds.refine_tol,
        name="a",
    )
    best_s2 = _profile(data, best_a.argmax, bounds)
    fit = GpFit(
        a_hat=best_a.argmax,
        a_eff=best_a.argmax,
        sigma2_hat=best_s2.argmax,
        log_marginal=log_marginal(data, best_a.argmax, best_s2.argmax),
        method=Method.STANDARD,
        n=data.n,
        a_boundary=best_a.boundary,
        sigma2_boundary=best_s2.boundary,
    )
    logger.debug(
        "GP fit n=%d: a=%.4g (%s), sigma2=%.4g (%s)",
        data.n,
        fit.a_hat,
        fit.a_boundary,
        fit.sigma2_hat,
        fit.sigma2_boundary,
    )
    return fit


def fit_methods(data: RegressionData, bounds: GpBounds = GpBounds()) -> dict[Method, GpFit]:
    """Standard fit, its log-n inflated twin, and the refit with a multiplied by log n."""
    standard = fit_gp(data, bounds)
    a_mod = standard.a_hat * math.log(data.n)
    return {
        Method.STANDARD: standard,
        Method.INFLATED: replace(standard, method=Method.INFLATED),
        Method.MODIFIED: replace(
            standard,
            method=Method.MODIFIED,
            a_eff=a_mod,
            log_marginal=log_marginal(data, a_mod, standard.sigma2_hat),
        ),
    }


def predict(fit: GpFit, data: RegressionData, x: np.ndarray) -> Prediction:
    x = np.asarray(x, dtype=float)
    C = se_kernel(data.x, data.x, fit.a_eff) + fit.sigma2_hat * np.eye(data.n)
    L, _ = jitter_cholesky(C)
    alpha = cho_solve(L, data.y)
    Ks = se_kernel(x, data.x, fit.a_eff)
    mean = Ks @ alpha
    v = linalg.solve_triangular(L, Ks.T, lower=True)
    var = np.maximum(1.0 - np.sum(v**2, axis=0), np.finfo(float).tiny)
    half = Q_975 * np.sqrt(var)
    if fit.method == Method.INFLATED:
        half = half * math.log(data.n)
    return Prediction(x, mean, var, half, fit.method)

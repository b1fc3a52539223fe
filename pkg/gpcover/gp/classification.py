"""
Binary GP classification with the logistic link and a Laplace approximation.

The mode is found by Newton's method in the stable parameterisation
B = I + W^½ K W^½, which never inverts K; a step that lowers the objective
is halved until it does not.
"""

import logging
import math

import numpy as np
from scipy import linalg
from scipy.special import expit, log_expit

from gpcover.errors import InvalidArgumentError, NumericalFailureError
from gpcover.gp.kernel import se_kernel
from gpcover.gp.linalg import cho_solve, jitter_cholesky
from gpcover.gp.types import (
    ClassificationData,
    ClassifierFit,
    GpBounds,
    LaplaceFit,
    Method,
    Prediction,
    Q_975,
)
from gpcover.optimize import maximize_on_log_grid
from gpcover.rng import derive_rng
from gpcover.signals.synthesize import evaluate
from gpcover.signals.types import SequenceSignal

logger = logging.getLogger(__name__)

MAX_NEWTON = 100
GRAD_TOL = 1e-8
MIN_STEP = 2.0**-30


def draw_labels(latent: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Bernoulli(ψ(f)) labels."""
    return (rng.uniform(size=np.shape(latent)) < expit(latent)).astype(int)


def simulate_classification(
    truth: SequenceSignal, K: int, n: int, seed: int = 0, stream: tuple[int, ...] = ()
) -> ClassificationData:
    if n < 1:
        raise InvalidArgumentError(f"Classification needs n >= 1, got {n}", n)
    rng = derive_rng(seed, *stream)
    x = rng.uniform(0.0, 1.0, n)
    return ClassificationData(x, draw_labels(evaluate(truth, x, K), rng), seed)


def log_likelihood(y: np.ndarray, f: np.ndarray) -> float:
    """Σ log p(y_i | f_i) for the logistic link."""
    return float(np.sum(log_expit(np.where(y == 1, f, -f))))


def _objective(y: np.ndarray, f: np.ndarray, a_vec: np.ndarray) -> float:
    # f = K·a_vec, so fᵀK⁻¹f = a_vecᵀf
    return log_likelihood(y, f) - 0.5 * float(a_vec @ f)


def _factor_B(K: np.ndarray, sqrt_w: np.ndarray) -> np.ndarray:
    B = np.eye(K.shape[0]) + sqrt_w[:, None] * K * sqrt_w[None, :]
    return jitter_cholesky(B)[0]


def laplace_fit(data: ClassificationData, a: float, max_iter: int = MAX_NEWTON) -> LaplaceFit:
    """
    Posterior mode of the latent values and the Laplace approximation of
    log p(y | a).
    """
    y = data.y
    n = data.n
    K = se_kernel(data.x, data.x, a)
    a_vec = np.zeros(n)
    f = np.zeros(n)
    obj = _objective(y, f, a_vec)
    trace = [obj]
    tol = GRAD_TOL * math.sqrt(n)
    converged = False

    iters = 0
    for iters in range(1, max_iter + 1):
        pi = expit(f)
        grad_lik = y - pi
        if np.linalg.norm(grad_lik - a_vec) <= tol:
            converged = True
            break

        sqrt_w = np.sqrt(pi * (1 - pi))
        L = _factor_B(K, sqrt_w)
        b = sqrt_w**2 * f + grad_lik
        target = b - sqrt_w * cho_solve(L, sqrt_w * (K @ b))
        step_dir = target - a_vec

        step = 1.0
        while step >= MIN_STEP:
            cand_a = a_vec + step * step_dir
            cand_f = K @ cand_a
            cand_obj = _objective(y, cand_f, cand_a)
            if cand_obj >= obj:
                break
            step /= 2
        else:
            # no ascent left in the Newton direction
            grad_norm = float(np.linalg.norm(grad_lik - a_vec))
            converged = grad_norm <= tol
            if converged:
                break
            raise NumericalFailureError(
                f"Newton step halving stalled at a={a:.6g}",
                value=a,
                diagnostics={"iterations": iters, "grad_norm": grad_norm, "objective": obj},
            )
        if step < 1:
            logger.debug("Newton step halved to %.3g at iteration %d", step, iters)
        a_vec, f, obj = cand_a, cand_f, cand_obj
        trace.append(obj)

    if not converged:
        raise NumericalFailureError(
            f"Newton iteration did not converge in {max_iter} steps at a={a:.6g}",
            value=a,
            diagnostics={
                "iterations": max_iter,
                "grad_norm": float(np.linalg.norm(y - expit(f) - a_vec)),
                "objective": obj,
            },
        )

    pi = expit(f)
    sqrt_w = np.sqrt(pi * (1 - pi))
    L = _factor_B(K, sqrt_w)
    approx = obj - float(np.sum(np.log(np.diag(L))))
    return LaplaceFit(
        a=a,
        mode=f,
        grad_loglik=y - pi,
        approx_log_marginal=approx,
        newton_iters=iters,
        converged=True,
        objective_trace=trace,
        chol_B=L,
        sqrt_W=sqrt_w,
    )


def fit_classifier(data: ClassificationData, bounds: GpBounds = GpBounds()) -> ClassifierFit:
    if data.degenerate:
        raise InvalidArgumentError("Both classes must be present to fit a classifier")
    best = maximize_on_log_grid(
        lambda a: laplace_fit(data, a).approx_log_marginal,
        bounds.a_min,
        bounds.a_max,
        bounds.a_grid,
        bounds.refine_tol,
        name="a",
    )
    standard = laplace_fit(data, best.argmax)
    modified = laplace_fit(data, best.argmax * math.log(data.n))
    logger.debug("Classifier fit n=%d: a=%.4g (%s)", data.n, best.argmax, best.boundary)
    return ClassifierFit(
        a_hat=best.argmax,
        boundary=best.boundary,
        fits={
            Method.STANDARD: standard,
            Method.INFLATED: standard,
            Method.MODIFIED: modified,
        },
    )


def predict_latent(
    fit: LaplaceFit, data: ClassificationData, x: np.ndarray, method: Method = Method.STANDARD
) -> Prediction:
    x = np.asarray(x, dtype=float)
    Ks = se_kernel(x, data.x, fit.a)
    mean = Ks @ fit.grad_loglik
    v = linalg.solve_triangular(fit.chol_B, fit.sqrt_W[:, None] * Ks.T, lower=True)
    var = np.maximum(1.0 - np.sum(v**2, axis=0), np.finfo(float).tiny)
    half = Q_975 * np.sqrt(var)
    if method == Method.INFLATED:
        half = half * math.log(data.n)
    return Prediction(x, mean, var, half, method)

import logging

import numpy as np
from scipy import linalg

from gpcover.errors import NumericalFailureError

logger = logging.getLogger(__name__)

JITTER_START = 1e-10
JITTER_MAX = 1e-6


def jitter_cholesky(A: np.ndarray) -> tuple[np.ndarray, float]:
    """
    Lower Cholesky factor of a symmetric positive-definite matrix.

    When the plain factorisation fails, jitter·mean(diag A) is added to the
    diagonal, starting at 1e-10 and growing tenfold up to 1e-6.
    """
    A = np.ascontiguousarray(A)
    L, info = linalg.lapack.dpotrf(A, lower=1, clean=1)
    if info == 0:
        return L, 0.0

    scale = float(np.mean(np.diag(A)))
    if not scale > 0:
        raise NumericalFailureError("Matrix has a non-positive diagonal", value=scale)
    jitter = JITTER_START
    while jitter <= JITTER_MAX * (1 + 1e-9):
        try:
            L = linalg.cholesky(A + np.eye(A.shape[0]) * jitter * scale, lower=True)
            logger.debug("Added jitter %.1e x %.3g to the diagonal", jitter, scale)
            return L, jitter * scale
        except linalg.LinAlgError:
            jitter *= 10
    raise NumericalFailureError(
        "Matrix is not positive definite, even with jitter",
        value=JITTER_MAX,
        diagnostics={"diag_scale": scale, "size": A.shape[0]},
    )


def cho_solve(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    return linalg.cho_solve((L, True), b)


def log_det(L: np.ndarray) -> float:
    return 2.0 * float(np.sum(np.log(np.diag(L))))

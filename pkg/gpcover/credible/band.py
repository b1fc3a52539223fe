import math

import numpy as np

from gpcover.errors import InvalidArgumentError
from gpcover.signals.synthesize import cosine_basis
from gpcover.signals.types import BasisGrid


def credible_band(
    draws: np.ndarray,
    center: np.ndarray,
    grid: BasisGrid,
    keep: float = 0.95,
    inflation: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Pointwise envelope of the posterior draws closest to the center in L₂.

    The ⌈keep·count⌉ closest draws, together with the center itself, are
    stretched about the center by `inflation` and synthesised on the grid.
    Returns (lower, upper, center curve).
    """
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    if not 0 < keep <= 1:
        raise InvalidArgumentError(f"keep must lie in (0, 1], got {keep}", keep)
    if inflation < 1:
        raise InvalidArgumentError(f"Inflation must be >= 1, got {inflation}", inflation)
    K = grid.basis_size
    if K > center.size:
        raise InvalidArgumentError(f"Basis size {K} exceeds the {center.size} coefficients", K)

    dist = np.linalg.norm(draws - center, axis=1)
    order = np.argsort(dist, kind="stable")[: math.ceil(keep * draws.shape[0])]
    kept = center + inflation * (draws[order] - center)

    basis = cosine_basis(grid.points, K)
    curves = kept[:, :K] @ basis.T
    mean_curve = basis @ center[:K]
    lower = np.minimum(curves.min(axis=0), mean_curve)
    upper = np.maximum(curves.max(axis=0), mean_curve)
    return lower, upper, mean_curve

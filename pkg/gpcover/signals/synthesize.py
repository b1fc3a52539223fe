import numpy as np

from gpcover.errors import InvalidArgumentError
from gpcover.signals.types import BasisGrid, SequenceSignal


def cosine_basis(x: np.ndarray, K: int) -> np.ndarray:
    """Matrix ψ_i(x_j) = √2·cos(π(i-1/2)x_j), shape (len(x), K)."""
    i = np.arange(1, K + 1) - 0.5
    return np.sqrt(2.0) * np.cos(np.pi * np.outer(np.asarray(x, dtype=float), i))


def _check_basis(f: SequenceSignal, K: int) -> None:
    if K > f.N:
        raise InvalidArgumentError(f"Basis size {K} exceeds the {f.N} stored coefficients", K)


def synthesize(f: SequenceSignal, grid: BasisGrid) -> np.ndarray:
    _check_basis(f, grid.basis_size)
    return cosine_basis(grid.points, grid.basis_size) @ f.coeffs[: grid.basis_size]


def evaluate(f: SequenceSignal, x: np.ndarray, K: int) -> np.ndarray:
    """Synthesised values at arbitrary (unsorted) design points."""
    _check_basis(f, K)
    return cosine_basis(x, K) @ f.coeffs[:K]

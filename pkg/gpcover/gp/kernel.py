import numpy as np


def se_kernel(s: np.ndarray, t: np.ndarray, a: float) -> np.ndarray:
    """Squared-exponential covariance exp(-a(s - t)²) with unit amplitude."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.exp(-a * np.subtract.outer(s, t) ** 2)

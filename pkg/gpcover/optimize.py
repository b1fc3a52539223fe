"""
One-dimensional maximisation used by every marginal-likelihood fit: a global
scan over a log-spaced grid followed by golden-section polishing of the
bracketing cell, done in log coordinates so tolerances are relative.
"""

import logging
from dataclasses import dataclass
from enum import StrEnum
from math import isfinite, sqrt
from typing import Callable

import numpy as np

from gpcover.errors import NumericalFailureError

logger = logging.getLogger(__name__)

PHI_RATIO = 2 / (1 + sqrt(5))


class Boundary(StrEnum):
    INTERIOR = "interior"
    AT_LOWER = "at_lower"
    AT_UPPER = "at_upper"


@dataclass(frozen=True)
class GoldenResult:
    argmax: float
    maximum: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class GridMaximum:
    argmax: float
    maximum: float
    boundary: Boundary
    grid: np.ndarray
    values: np.ndarray


def golden_section_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> GoldenResult:
    f_lo, f_hi = f(lo), f(hi)
    x1 = hi - PHI_RATIO * (hi - lo)
    x2 = lo + PHI_RATIO * (hi - lo)
    f1, f2 = f(x1), f(x2)
    a, b = lo, hi
    iteration = 0
    while iteration < max_iter and (b - a) > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + PHI_RATIO * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - PHI_RATIO * (b - a)
            f1 = f(x1)
        iteration += 1

    x_best, f_best = (x1, f1) if f1 >= f2 else (x2, f2)
    # the unimodality assumption can fail at the ends of the bracket
    if f_lo > f_best:
        x_best, f_best = lo, f_lo
    if f_hi > f_best:
        x_best, f_best = hi, f_hi
    return GoldenResult(
        argmax=x_best,
        maximum=f_best,
        iterations=iteration,
        converged=isfinite(f_best) and iteration < max_iter,
    )


def maximize_on_log_grid(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    grid_size: int,
    rel_tol: float = 1e-6,
    name: str = "x",
) -> GridMaximum:
    """
    Global maximiser of `f` on [lo, hi].

    `f` is scanned on `grid_size` log-spaced points; the best grid cell and its
    neighbours are refined by golden section in log(x). Raises
    NumericalFailureError when `f` is not finite at a grid point.
    """
    grid = np.geomspace(lo, hi, grid_size) if hi > lo else np.array([lo])
    values = np.empty(grid.size)
    for j, x in enumerate(grid):
        values[j] = f(float(x))
        if not isfinite(values[j]):
            raise NumericalFailureError(
                f"Objective is not finite at {name}={x:.6g}", value=float(x)
            )

    j = int(np.argmax(values))
    if grid.size == 1:
        return GridMaximum(float(grid[0]), float(values[0]), Boundary.AT_LOWER, grid, values)

    boundary = Boundary.INTERIOR
    if j == 0:
        boundary = Boundary.AT_LOWER
    elif j == grid.size - 1:
        boundary = Boundary.AT_UPPER

    left = np.log(grid[max(j - 1, 0)])
    right = np.log(grid[min(j + 1, grid.size - 1)])
    res = golden_section_max(lambda t: f(float(np.exp(t))), left, right, tol=rel_tol)
    if not res.converged:
        logger.debug("Golden section on %s stopped after %d steps", name, res.iterations)

    if res.maximum >= values[j]:
        x_best, f_best = float(np.clip(np.exp(res.argmax), lo, hi)), res.maximum
    else:
        x_best, f_best = float(grid[j]), float(values[j])
    return GridMaximum(x_best, float(f_best), boundary, grid, values)

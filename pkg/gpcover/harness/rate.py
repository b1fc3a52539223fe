import logging
from typing import Sequence

import numpy as np
from scipy import stats

from gpcover.errors import InvalidArgumentError
from gpcover.harness.gwn import L2_TARGET, run_gwn_coverage
from gpcover.harness.types import ExperimentPlan, MethodSlopes, SlopeFit, SlopeReport

logger = logging.getLogger(__name__)

MIN_POINTS = 3


def fit_log_slope(n_values: Sequence[float], values: Sequence[float]) -> SlopeFit:
    """Least-squares slope of log(value) against log(n)."""
    n_values = np.asarray(n_values, dtype=float)
    values = np.asarray(values, dtype=float)
    if n_values.size < MIN_POINTS or n_values.size != values.size:
        raise InvalidArgumentError(
            f"A slope needs at least {MIN_POINTS} matching (n, value) pairs, got {n_values.size}"
        )
    if np.any(values <= 0) or np.any(n_values <= 0):
        raise InvalidArgumentError("Slopes need positive n and values")
    result = stats.linregress(np.log(n_values), np.log(values))
    return SlopeFit(
        slope=float(result.slope),
        stderr=float(result.stderr),
        intercept=float(result.intercept),
    )


def run_rate_slope(plan: ExperimentPlan, threads: int = 1) -> SlopeReport:
    if len(set(plan.n_values)) < MIN_POINTS:
        raise InvalidArgumentError(
            f"Rate slopes need at least {MIN_POINTS} distinct n values, got {plan.n_values}"
        )
    report = run_gwn_coverage(plan, threads)
    slopes = []
    for method in plan.methods:
        cells = sorted(report.select(method=method, target=L2_TARGET), key=lambda c: c.n)
        ns = [c.n for c in cells]
        slopes.append(
            MethodSlopes(
                method=method,
                diameter=fit_log_slope(ns, [c.median_diameter for c in cells]),
                error=fit_log_slope(ns, [c.median_error for c in cells]),
            )
        )
        logger.info("%s: diameter slope %.3f", method, slopes[-1].diameter.slope)
    return SlopeReport(slopes=slopes, coverage=report)

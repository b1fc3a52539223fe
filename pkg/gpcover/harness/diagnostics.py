"""
Sweeps of the marginal likelihood, its derivative and the bracketing
functionals h_n and g_n, plus the deterministic bounds around each
replication's MMLE.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from gpcover.eb.mmle import (
    deterministic_bounds,
    fit,
    g_fn,
    h_fn,
    log_marginal_likelihood,
    score,
)
from gpcover.harness.gwn import DATA
from gpcover.harness.types import ExperimentPlan
from gpcover.sequence.model import simulate

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ["n", "a", "loglik", "score", "h", "g"]
BOUND_COLUMNS = [
    "n",
    "replication",
    "a_lower",
    "a_hat",
    "a_upper",
    "lower_empty",
    "upper_empty",
    "sandwiched",
]


@dataclass(frozen=True)
class Diagnostics:
    sweep: list[list]
    bounds: list[list]

    @property
    def sandwich_rate(self) -> float:
        return float(np.mean([row[-1] for row in self.bounds])) if self.bounds else math.nan


def run_diagnostics(plan: ExperimentPlan, a_points: int = 200) -> Diagnostics:
    """
    For every n: the functionals on a log grid of [1, A_n] using the first
    replication's data, and (a_lower, a_hat, a_upper) for every replication.
    Data come from the same streams as the coverage runs.
    """
    truth = plan.truth.build()
    sweep, bounds = [], []
    for n_index, n in enumerate(plan.n_values):
        upper = plan.mmle.upper(n)
        margin = plan.mmle.truncation_margin
        y0 = simulate(truth, n, plan.n_obs, plan.master_seed, (n_index, 0, DATA))
        for a in np.geomspace(1.0, upper, a_points):
            a = float(a)
            sweep.append(
                [
                    n,
                    a,
                    log_marginal_likelihood(y0, a, plan.mmle),
                    score(y0, a, plan.mmle),
                    h_fn(a, truth, n, margin) if a < n else math.nan,
                    g_fn(a, truth, n, margin) if a < n else math.nan,
                ]
            )

        det = deterministic_bounds(truth, n, plan.bounds, plan.mmle)
        for rep in range(plan.replications):
            y = simulate(truth, n, plan.n_obs, plan.master_seed, (n_index, rep, DATA))
            a_hat = fit(y, plan.mmle).a_hat
            bounds.append(
                [
                    n,
                    rep,
                    det.a_lower,
                    a_hat,
                    det.a_upper,
                    det.lower_empty,
                    det.upper_empty,
                    det.contains(a_hat),
                ]
            )
        logger.info("Diagnostics n=%g: bounds [%.4g, %.4g]", n, det.a_lower, det.a_upper)
    return Diagnostics(sweep, bounds)

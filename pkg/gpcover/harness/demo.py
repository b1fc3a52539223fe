import logging
from pathlib import Path

import numpy as np
from pydantic import BaseModel
from scipy.special import expit

from gpcover.credible.band import credible_band
from gpcover.eb.mmle import fit, fit_polynomial
from gpcover.harness.io import provenance, write_artifact
from gpcover.harness.gwn import log_n_inflation
from gpcover.harness.pointwise import fit_predictions
from gpcover.harness.types import ExperimentPlan
from gpcover.sequence.model import simulate
from gpcover.sequence.posterior import posterior, sample
from gpcover.sequence.types import PriorSpec
from gpcover.signals.construct import make_f1
from gpcover.signals.synthesize import evaluate, synthesize
from gpcover.signals.types import BasisGrid

logger = logging.getLogger(__name__)

DEMO_METHODS = ("eb", "eb-llogn", "eb-modified", "poly-eb")
BAND_COLUMNS = ["x", "truth", "mean", "lower", "upper"]
GP_BAND_COLUMNS = ["x", "mean", "lower", "upper"]


class DemoSettings(BaseModel):
    seed: int = 0
    n_values: list[float] = [100, 500, 1000, 5000]
    draws: int = 2000
    keep: float = 0.95
    x_lo: float = 0.25
    x_hi: float = 0.4
    grid_points: int = 301
    basis_size: int = 200


def run_gwn_demo(out: Path, settings: DemoSettings = DemoSettings()) -> list[Path]:
    """
    Band data for the truth f1 at each n under the four priors: plain and
    log-n inflated empirical Bayes, the log-n modified scale and the
    polynomial prior.
    """
    truth = make_f1()
    grid = BasisGrid.uniform(
        settings.x_lo, settings.x_hi, settings.grid_points, settings.basis_size
    )
    truth_curve = synthesize(truth, grid)
    prov = provenance(settings, settings.seed)
    paths = []
    for n_index, n in enumerate(settings.n_values):
        y = simulate(truth, n, truth.N, settings.seed, (n_index,))
        mfit = fit(y)
        priors = {
            "eb": (PriorSpec(a=mfit.a_hat), 1.0),
            "eb-llogn": (PriorSpec(a=mfit.a_hat), log_n_inflation(n)),
            "eb-modified": (PriorSpec(a=mfit.modified_scale), 1.0),
            "poly-eb": (PriorSpec(variant="polynomial", alpha=fit_polynomial(y).alpha_hat), 1.0),
        }
        for m_index, method in enumerate(DEMO_METHODS):
            prior, inflation = priors[method]
            post = posterior(y, prior)
            draws = sample(post, settings.draws, settings.seed, (n_index, m_index + 1))
            lower, upper, mean = credible_band(draws, post.means, grid, settings.keep, inflation)
            rows = zip(grid.points, truth_curve, mean, lower, upper)
            path = out / f"gwn_demo_n{n:g}_{method}.csv"
            paths.append(write_artifact(path, BAND_COLUMNS, rows, prov))
        logger.info("Demo bands written for n=%g", n)
    return paths


def run_gp_demo(
    out: Path,
    plan: ExperimentPlan,
    x_lo: float = 0.2,
    x_hi: float = 0.5,
    grid_points: int = 301,
) -> list[Path]:
    """
    Posterior mean and pointwise 95% intervals of every plan method on a grid,
    from one data set per n. Classification files add the class probability
    ψ(mean) of the latent mean.
    """
    if plan.model not in ("regression", "classification"):
        raise ValueError(f"Plan {plan.name!r} is for the {plan.model} model")
    xs = np.linspace(x_lo, x_hi, grid_points)
    prov = provenance(plan, plan.master_seed)
    stem = f"gp_{plan.model}"
    truth_curve = evaluate(plan.truth.build(), xs, plan.basis_size)
    paths = [write_artifact(out / f"{stem}_truth.csv", ["x", "truth"], zip(xs, truth_curve), prov)]

    header = GP_BAND_COLUMNS
    if plan.model == "classification":
        header = GP_BAND_COLUMNS + ["psi_mean"]
    for n_index, n in enumerate(plan.n_values):
        for method, (pred, _) in fit_predictions(plan, n_index, 0, xs).items():
            columns = [pred.x, pred.mean, pred.lower, pred.upper]
            if plan.model == "classification":
                columns.append(expit(pred.mean))
            path = out / f"{stem}_n{n:g}_{method}.csv"
            paths.append(write_artifact(path, header, zip(*columns), prov))
        logger.info("%s demo intervals written for n=%g", plan.model, n)
    return paths

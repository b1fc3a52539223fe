import logging
import math
from pathlib import Path
from time import perf_counter

import numpy as np

from gpcover.credible.balls import (
    covers,
    diameter,
    l2_distance,
    make_ball,
    radius_for_prior,
    radius_hb,
)
from gpcover.eb.hb import hb_posterior_mean, hyper_posterior
from gpcover.eb.mmle import fit, fit_polynomial
from gpcover.errors import UnsupportedCheckError
from gpcover.harness.io import provenance, write_artifact
from gpcover.harness.runner import Outcome, aggregate, map_ordered
from gpcover.harness.types import CoverageReport, ExperimentPlan
from gpcover.sequence.model import simulate
from gpcover.sequence.posterior import posterior
from gpcover.sequence.types import ObservedSequence, PriorSpec
from gpcover.signals.membership import check_membership
from gpcover.signals.types import SequenceSignal

logger = logging.getLogger(__name__)

L2_TARGET = "l2"
HB_METHODS = ("hb", "hb-llogn")
HYPER_COLUMNS = ["a", "weight"]

# sub-stream purposes within one replication
DATA, EB_BALL, MODIFIED_BALL, HB_BALL, POLY_BALL = range(5)


def log_n_inflation(n: float) -> float:
    return max(math.log(n), 1.0)


def _ball_outcome(
    center: np.ndarray,
    radius: float,
    inflation: float,
    truth: SequenceSignal,
    plan: ExperimentPlan,
    hyper: float,
    seconds: float,
) -> Outcome:
    ball = make_ball(center, radius, inflation, plan.alpha, plan.draws, plan.master_seed)
    return Outcome(
        covered=covers(ball, truth),
        radius=radius,
        diameter=diameter(ball),
        error=l2_distance(center, truth),
        hyper=hyper,
        seconds=seconds,
    )


def replication_data(plan: ExperimentPlan, n_index: int, rep: int) -> ObservedSequence:
    truth = plan.truth.build()
    n = plan.n_values[n_index]
    return simulate(truth, n, plan.n_obs, plan.master_seed, (n_index, rep, DATA))


def write_hyper_posteriors(out: Path, plan: ExperimentPlan, rep: int = 0) -> list[Path]:
    """(a, weight) of the hyper-posterior behind replication `rep`'s HB balls, per n."""
    prov = provenance(plan, plan.master_seed)
    paths = []
    for n_index, n in enumerate(plan.n_values):
        y = replication_data(plan, n_index, rep)
        hpost = hyper_posterior(y, plan.hyper_prior, plan.mmle.grid_size, plan.mmle)
        path = out / f"hyper_posterior_n{n:g}.csv"
        paths.append(write_artifact(path, HYPER_COLUMNS, hpost.to_rows(), prov))
    return paths


def gwn_replication(plan: ExperimentPlan, n_index: int, rep: int) -> dict[str, Outcome]:
    """Every method of the plan on one shared data set."""
    truth = plan.truth.build()
    n = plan.n_values[n_index]
    seed = plan.master_seed
    y = replication_data(plan, n_index, rep)
    wanted = set(plan.methods)

    def ball_radius(prior: PriorSpec, purpose: int) -> float:
        stream = (n_index, rep, purpose)
        return radius_for_prior(prior, n, plan.alpha, plan.draws, seed, stream)

    out: dict[str, Outcome] = {}

    if wanted & {"eb-l1", "eb-llogn", "eb-modified"}:
        start = perf_counter()
        mfit = fit(y, plan.mmle)
        fit_time = perf_counter() - start

    if wanted & {"eb-l1", "eb-llogn"}:
        start = perf_counter()
        prior = PriorSpec(a=mfit.a_hat)
        post = posterior(y, prior)
        r = ball_radius(prior, EB_BALL)
        seconds = fit_time + perf_counter() - start
        for method, L in (("eb-l1", plan.inflation), ("eb-llogn", log_n_inflation(n))):
            if method in wanted:
                out[method] = _ball_outcome(post.means, r, L, truth, plan, mfit.a_hat, seconds)

    if "eb-modified" in wanted:
        start = perf_counter()
        prior = PriorSpec(a=mfit.modified_scale)
        post = posterior(y, prior)
        r = ball_radius(prior, MODIFIED_BALL)
        out["eb-modified"] = _ball_outcome(
            post.means,
            r,
            plan.inflation,
            truth,
            plan,
            mfit.modified_scale,
            fit_time + perf_counter() - start,
        )

    if wanted.intersection(HB_METHODS):
        start = perf_counter()
        hpost = hyper_posterior(y, plan.hyper_prior, plan.mmle.grid_size, plan.mmle)
        center = hb_posterior_mean(y, hpost)
        r = radius_hb(hpost, plan.alpha, plan.draws, seed, (n_index, rep, HB_BALL))
        seconds = perf_counter() - start
        for method, L in (("hb", plan.inflation), ("hb-llogn", log_n_inflation(n))):
            if method in wanted:
                out[method] = _ball_outcome(center, r, L, truth, plan, hpost.mean(), seconds)

    if "poly-eb" in wanted:
        start = perf_counter()
        pfit = fit_polynomial(y, plan.mmle)
        prior = PriorSpec(variant="polynomial", alpha=pfit.alpha_hat)
        post = posterior(y, prior)
        r = ball_radius(prior, POLY_BALL)
        out["poly-eb"] = _ball_outcome(
            post.means,
            r,
            plan.inflation,
            truth,
            plan,
            pfit.alpha_hat,
            perf_counter() - start,
        )
    return out


def membership_summary(plan: ExperimentPlan) -> dict | None:
    if plan.membership is None:
        return None
    spec = plan.membership
    try:
        result = check_membership(plan.truth.build(), spec)
    except UnsupportedCheckError as e:
        logger.warning("%s", e.message)
        return {"class": spec.model_dump(exclude_none=True), "member": None, "reason": e.message}
    if not result.member:
        logger.warning("Truth is outside %s (witness %s)", spec.kind, result.witness)
    return {
        "class": spec.model_dump(exclude_none=True),
        "member": result.member,
        "witness": result.witness,
    }


def run_gwn_coverage(plan: ExperimentPlan, threads: int = 1) -> CoverageReport:
    if plan.model != "gwn":
        raise ValueError(f"Plan {plan.name!r} is for the {plan.model} model, not gwn")
    membership = membership_summary(plan)
    cells = []
    for n_index, n in enumerate(plan.n_values):
        tasks = [(plan, n_index, rep) for rep in range(plan.replications)]
        results = map_ordered(gwn_replication, tasks, threads)
        for method in plan.methods:
            cell = aggregate(method, n, L2_TARGET, [r[method] for r in results])
            logger.info(
                "%s n=%g: coverage %.3f ± %.3f, diameter %.4g",
                method,
                n,
                cell.coverage,
                cell.mc_se,
                cell.mean_diameter,
            )
            cells.append(cell)
    return CoverageReport(
        plan_name=plan.name,
        model=plan.model,
        truth_label=plan.truth.build().label,
        cells=cells,
        provenance=provenance(plan, plan.master_seed),
        membership=membership,
    )

import logging
from time import perf_counter

import numpy as np

from gpcover.gp.classification import fit_classifier, predict_latent, simulate_classification
from gpcover.gp.regression import fit_methods, predict, simulate_regression
from gpcover.gp.types import Method, Prediction
from gpcover.harness.io import provenance
from gpcover.harness.runner import Outcome, aggregate, map_ordered
from gpcover.harness.types import CoverageReport, ExperimentPlan
from gpcover.signals.synthesize import evaluate

logger = logging.getLogger(__name__)


def point_target(x: float) -> str:
    return f"x={x:g}"


def _outcomes(pred: Prediction, truth_values: np.ndarray, hyper: float, seconds: float):
    covered = pred.covers(truth_values)
    return [
        Outcome(
            covered=bool(covered[j]),
            radius=float(pred.half_width[j]),
            diameter=2 * float(pred.half_width[j]),
            error=float(abs(pred.mean[j] - truth_values[j])),
            hyper=hyper,
            seconds=seconds,
        )
        for j in range(truth_values.size)
    ]


def fit_predictions(
    plan: ExperimentPlan, n_index: int, rep: int, xs: np.ndarray
) -> dict[str, tuple[Prediction, float]]:
    """
    One simulated data set of size n_values[n_index]; every plan method's
    latent prediction at `xs` with the scale it used.
    """
    truth = plan.truth.build()
    n = int(plan.n_values[n_index])
    seed, stream = plan.master_seed, (n_index, rep)
    out = {}
    if plan.model == "regression":
        data = simulate_regression(truth, plan.basis_size, n, plan.sigma2, seed, stream)
        fits = fit_methods(data, plan.gp_bounds)
        for name in plan.methods:
            fitted = fits[Method(name)]
            out[name] = (predict(fitted, data, xs), fitted.a_eff)
    else:
        data = simulate_classification(truth, plan.basis_size, n, seed, stream)
        cfit = fit_classifier(data, plan.gp_bounds)
        for name in plan.methods:
            method = Method(name)
            laplace = cfit.fits[method]
            out[name] = (predict_latent(laplace, data, xs, method), laplace.a)
    return out


def pointwise_replication(
    plan: ExperimentPlan, n_index: int, rep: int
) -> dict[str, list[Outcome]]:
    """Intervals of every method at the evaluation points, one outcome per point."""
    xs = np.asarray(plan.eval_points, dtype=float)
    truth_values = evaluate(plan.truth.build(), xs, plan.basis_size)
    start = perf_counter()
    predictions = fit_predictions(plan, n_index, rep, xs)
    seconds = perf_counter() - start
    return {
        name: _outcomes(pred, truth_values, hyper, seconds)
        for name, (pred, hyper) in predictions.items()
    }


def run_pointwise_coverage(plan: ExperimentPlan, threads: int = 1) -> CoverageReport:
    if plan.model not in ("regression", "classification"):
        raise ValueError(f"Plan {plan.name!r} is for the {plan.model} model")
    cells = []
    for n_index, n in enumerate(plan.n_values):
        tasks = [(plan, n_index, rep) for rep in range(plan.replications)]
        results = map_ordered(pointwise_replication, tasks, threads)
        for name in plan.methods:
            for j, x in enumerate(plan.eval_points):
                cell = aggregate(name, n, point_target(x), [r[name][j] for r in results])
                cells.append(cell)
            logger.info(
                "%s %s n=%g: coverage %s",
                plan.model,
                Method(name).title,
                n,
                ", ".join(f"{c.coverage:.2f}" for c in cells[-len(plan.eval_points) :]),
            )
    return CoverageReport(
        plan_name=plan.name,
        model=plan.model,
        truth_label=plan.truth.build().label,
        cells=cells,
        provenance=provenance(plan, plan.master_seed),
    )

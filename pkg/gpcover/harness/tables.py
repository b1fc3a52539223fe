import logging
import math
from pathlib import Path

from gpcover.gp.types import Method
from gpcover.harness.io import write_artifact, write_summary
from gpcover.harness.pointwise import run_pointwise_coverage
from gpcover.harness.types import CoverageReport, ExperimentPlan, TruthSpec

logger = logging.getLogger(__name__)

TABLE_N = {"regression": [100, 500, 1000], "classification": [100, 200, 500]}


def table_plans(replications: int = 100, seed: int = 0) -> dict[str, ExperimentPlan]:
    return {
        model: ExperimentPlan(
            name=f"{model}-tables",
            model=model,
            truth=TruthSpec(kind="f2"),
            n_values=ns,
            methods=[m.value for m in Method],
            replications=replications,
            master_seed=seed,
        )
        for model, ns in TABLE_N.items()
    }


def _layout(report: CoverageReport) -> tuple[list[str], list[float], list[str]]:
    methods = list(dict.fromkeys(c.method for c in report.cells))
    ns = sorted({c.n for c in report.cells})
    targets = list(dict.fromkeys(c.target for c in report.cells))
    return methods, ns, targets


def coverage_table(report: CoverageReport) -> tuple[list[str], list[list]]:
    """Coverage per method (rows) and (point, n) (columns), followed by MC errors."""
    methods, ns, targets = _layout(report)
    columns = [(t, n) for t in targets for n in ns]
    header = ["method"]
    header += [f"{t},n={n:g}" for t, n in columns]
    header += [f"se {t},n={n:g}" for t, n in columns]
    rows = []
    for m in methods:
        cells = [report.cell(m, n, t) for t, n in columns]
        rows.append(
            [Method(m).title] + [c.coverage for c in cells] + [c.mc_se for c in cells]
        )
    return header, rows


def size_table(report: CoverageReport) -> tuple[list[str], list[list]]:
    """Interval length per method and n, averaged over the evaluation points."""
    methods, ns, targets = _layout(report)
    header = ["method"] + [f"n={n:g}" for n in ns] + [f"se n={n:g}" for n in ns]
    rows = []
    for m in methods:
        means, errors = [], []
        for n in ns:
            cells = [report.cell(m, n, t) for t in targets]
            means.append(math.fsum(c.mean_diameter for c in cells) / len(cells))
            pooled_var = math.fsum(c.sd_diameter**2 for c in cells) / len(cells)
            errors.append(math.sqrt(pooled_var / (cells[0].replications * len(cells))))
        rows.append([Method(m).title] + means + errors)
    return header, rows


def write_tables(
    out: Path, regression: CoverageReport, classification: CoverageReport
) -> list[Path]:
    paths = []
    for index, (report, build) in enumerate(
        [
            (regression, coverage_table),
            (regression, size_table),
            (classification, coverage_table),
            (classification, size_table),
        ],
        start=1,
    ):
        header, rows = build(report)
        paths.append(write_artifact(out / f"table{index}.csv", header, rows, report.provenance))
    return paths


def run_tables(
    out: Path, replications: int = 100, seed: int = 0, threads: int = 1
) -> list[Path]:
    plans = table_plans(replications, seed)
    regression = run_pointwise_coverage(plans["regression"], threads)
    classification = run_pointwise_coverage(plans["classification"], threads)
    paths = write_tables(out, regression, classification)
    write_summary(out / "regression_summary.json", regression)
    write_summary(out / "classification_summary.json", classification)
    return paths

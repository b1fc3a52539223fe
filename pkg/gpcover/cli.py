import argparse
import logging
import sys
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, ValidationError, model_validator
from rich.console import Console
from rich.table import Table

from gpcover.errors import AcceptanceError, NumericalFailureError
from gpcover.harness.acceptance import enforce_acceptance
from gpcover.harness.demo import DemoSettings, run_gp_demo, run_gwn_demo
from gpcover.harness.diagnostics import BOUND_COLUMNS, SWEEP_COLUMNS, run_diagnostics
from gpcover.harness.gwn import HB_METHODS, run_gwn_coverage, write_hyper_posteriors
from gpcover.harness.io import provenance, write_artifact, write_coverage_csv, write_summary
from gpcover.harness.rate import run_rate_slope
from gpcover.harness.tables import run_tables
from gpcover.harness.types import CoverageReport, ExperimentPlan, SlopeReport
from gpcover.log import setup_logging

logger = logging.getLogger(__name__)

COMMANDS = ("gwn-demo", "gp-demo", "gwn-coverage", "tables", "diag", "rate-slope")
PLAN_COMMANDS = ("gp-demo", "gwn-coverage", "diag", "rate-slope")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 0, 2, 3, 4


class RunConfig(BaseModel):
    command: Literal["gwn-demo", "gp-demo", "gwn-coverage", "tables", "diag", "rate-slope"]
    plan: Path | None = None
    out: Path = Path("out")
    seed: int | None = Field(default=None, ge=0)
    threads: int = Field(default=1, ge=1)
    verbosity: int = Field(default=0, ge=0)
    alpha: float | None = Field(default=None, gt=0.0, lt=1.0)
    replications: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _inputs(self) -> "RunConfig":
        if self.command in PLAN_COMMANDS and self.plan is None:
            raise ValueError(f"{self.command} needs --plan")
        if self.command not in PLAN_COMMANDS and self.seed is None:
            raise ValueError(f"{self.command} needs --seed")
        return self


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpcover",
        description="Coverage experiments for empirical and hierarchical Bayes GP priors.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--plan", type=Path, help="experiment plan (JSON)")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--seed", type=int, help="master seed (overrides the plan's)")
    parser.add_argument("--threads", type=int, default=1, help="worker processes")
    parser.add_argument("--alpha", type=float, help="credible level 1 - alpha")
    parser.add_argument("--replications", type=int, help="override the replication count")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    return parser


def load_plan(config: RunConfig) -> ExperimentPlan:
    plan = ExperimentPlan.model_validate_json(config.plan.read_text(encoding="utf-8"))
    updates = {
        "master_seed": config.seed,
        "alpha": config.alpha,
        "replications": config.replications,
    }
    updates = {k: v for k, v in updates.items() if v is not None}
    if updates:
        plan = ExperimentPlan.model_validate({**plan.model_dump(), **updates})
    return plan


def coverage_table(report: CoverageReport) -> Table:
    table = Table(title=f"{report.plan_name} ({report.truth_label})")
    for column in ("method", "n", "target", "coverage", "MC se", "mean diameter", "R"):
        table.add_column(column, justify="left" if column == "method" else "right")
    for c in report.cells:
        table.add_row(
            c.method,
            f"{c.n:g}",
            c.target,
            f"{c.coverage:.3f}",
            f"{c.mc_se:.3f}",
            f"{c.mean_diameter:.4g}",
            str(c.replications),
        )
    return table


def slope_table(slopes: SlopeReport) -> Table:
    table = Table(title="log-log slopes in n")
    for column in ("method", "diameter", "± se", "error", "± se"):
        table.add_column(column, justify="right")
    for s in slopes.slopes:
        table.add_row(
            s.method,
            f"{s.diameter.slope:.4f}",
            f"{s.diameter.stderr:.4f}",
            f"{s.error.slope:.4f}",
            f"{s.error.stderr:.4f}",
        )
    return table


def cmd_gwn_demo(config: RunConfig, console: Console) -> None:
    paths = run_gwn_demo(config.out, DemoSettings(seed=config.seed))
    console.print(f"Wrote {len(paths)} band files to {config.out}")


def cmd_gp_demo(config: RunConfig, console: Console) -> None:
    paths = run_gp_demo(config.out, load_plan(config))
    console.print(f"Wrote {len(paths)} interval files to {config.out}")


def cmd_gwn_coverage(config: RunConfig, console: Console) -> None:
    plan = load_plan(config)
    report = run_gwn_coverage(plan, config.threads)
    write_coverage_csv(config.out / "coverage.csv", report)
    write_summary(config.out / "summary.json", report)
    if set(HB_METHODS).intersection(plan.methods):
        write_hyper_posteriors(config.out, plan)
    console.print(coverage_table(report))
    enforce_acceptance(report, plan.acceptance)


def cmd_rate_slope(config: RunConfig, console: Console) -> None:
    plan = load_plan(config)
    slopes = run_rate_slope(plan, config.threads)
    write_coverage_csv(config.out / "coverage.csv", slopes.coverage)
    rows = [
        [s.method, quantity, fit.slope, fit.stderr, fit.intercept]
        for s in slopes.slopes
        for quantity, fit in (("diameter", s.diameter), ("error", s.error))
    ]
    write_artifact(
        config.out / "slopes.csv",
        ["method", "quantity", "slope", "stderr", "intercept"],
        rows,
        slopes.coverage.provenance,
    )
    write_summary(config.out / "summary.json", slopes)
    console.print(slope_table(slopes))
    enforce_acceptance(slopes.coverage, plan.acceptance, slopes)


def cmd_tables(config: RunConfig, console: Console) -> None:
    paths = run_tables(config.out, config.replications or 100, config.seed, config.threads)
    console.print(f"Wrote {', '.join(p.name for p in paths)} to {config.out}")


def cmd_diag(config: RunConfig, console: Console) -> None:
    plan = load_plan(config)
    diag = run_diagnostics(plan)
    prov = provenance(plan, plan.master_seed)
    write_artifact(config.out / "diag_sweep.csv", SWEEP_COLUMNS, diag.sweep, prov)
    write_artifact(config.out / "diag_bounds.csv", BOUND_COLUMNS, diag.bounds, prov)
    console.print(f"MMLE inside the deterministic bounds in {diag.sandwich_rate:.0%} of runs")


HANDLERS = {
    "gwn-demo": cmd_gwn_demo,
    "gp-demo": cmd_gp_demo,
    "gwn-coverage": cmd_gwn_coverage,
    "tables": cmd_tables,
    "diag": cmd_diag,
    "rate-slope": cmd_rate_slope,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    console = Console()
    try:
        config = RunConfig(
            command=args.command,
            plan=args.plan,
            out=args.out,
            seed=args.seed,
            threads=args.threads,
            verbosity=args.verbose,
            alpha=args.alpha,
            replications=args.replications,
        )
        config.out.mkdir(parents=True, exist_ok=True)
        HANDLERS[config.command](config, console)
    except (ValidationError, ValueError, OSError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except NumericalFailureError as e:
        logger.error("Numerical failure: %s %s", e, e.diagnostics or "")
        return EXIT_NUMERICAL
    except AcceptanceError as e:
        for failure in e.failures:
            logger.error("Acceptance failed: %s", failure)
        return EXIT_ACCEPTANCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

import csv
import json
import math
from pathlib import Path

import pytest

from gpcover.eb.types import MmleConfig
from gpcover.errors import AcceptanceError, InvalidArgumentError
from gpcover.gp.types import GpBounds
from gpcover.harness.acceptance import enforce_acceptance, evaluate_acceptance
from gpcover.harness.gwn import (
    gwn_replication,
    log_n_inflation,
    membership_summary,
    run_gwn_coverage,
)
from gpcover.harness.io import CELL_COLUMNS, config_hash, write_coverage_csv, write_summary
from gpcover.harness.pointwise import run_pointwise_coverage
from gpcover.harness.rate import fit_log_slope, run_rate_slope
from gpcover.harness.runner import Outcome, aggregate, map_ordered
from gpcover.harness.tables import coverage_table, size_table, table_plans, write_tables
from gpcover.harness.types import (
    AcceptanceCheck,
    CoverageCell,
    CoverageReport,
    ExperimentPlan,
    Provenance,
    TruthSpec,
)

FAST_MMLE = MmleConfig(grid_size=64)


def gwn_plan(**overrides) -> ExperimentPlan:
    settings = dict(
        name="unit",
        truth=TruthSpec(kind="selfsimilar", beta=1.0),
        n_values=[1e3, 1e4],
        methods=["eb-l1", "eb-llogn"],
        replications=4,
        master_seed=3,
        draws=200,
        mmle=FAST_MMLE,
    )
    settings.update(overrides)
    return ExperimentPlan(**settings)


def cell(method, n, coverage, diameter=1.0, target="l2"):
    return CoverageCell(
        method=method,
        n=n,
        target=target,
        replications=100,
        coverage=coverage,
        mc_se=math.sqrt(coverage * (1 - coverage) / 100),
        mean_radius=diameter / 2,
        median_radius=diameter / 2,
        mean_diameter=diameter,
        sd_diameter=0.1,
        median_diameter=diameter,
        median_error=0.1,
        mean_hyper=1.0,
    )


def report(cells, model="gwn"):
    return CoverageReport(
        plan_name="synthetic",
        model=model,
        truth_label="f1",
        cells=cells,
        provenance=Provenance(config_hash="0" * 40, master_seed=0, version="0.1.0"),
    )


def test_single_replication():
    rep = run_gwn_coverage(gwn_plan(replications=1, n_values=[1e3]))
    for c in rep.cells:
        assert c.coverage in (0.0, 1.0)
        assert c.mc_se == 0.0
        assert c.sd_diameter == 0.0
        assert c.replications == 1
        assert c.median_radius == c.mean_radius


def test_median_radius():
    outcomes = [
        Outcome(covered=True, radius=r, diameter=2 * r, error=0.1, hyper=1.0, seconds=0.0)
        for r in (1.0, 2.0, 9.0)
    ]
    c = aggregate("eb-l1", 1e3, "l2", outcomes)
    assert c.median_radius == 2.0
    assert c.mean_radius == 4.0
    assert c.median_diameter == 4.0


def test_modified_scale_below_e():
    plan = gwn_plan(
        truth=TruthSpec(kind="zero"),
        n_values=[2.0],
        methods=["eb-l1", "eb-modified"],
        replications=1,
        draws=100,
        mmle=MmleConfig(grid_size=16),
    )
    out = gwn_replication(plan, 0, 0)
    a_hat = out["eb-l1"].hyper
    assert out["eb-modified"].hyper == pytest.approx(max(a_hat * math.log(2), 1.0))
    assert out["eb-modified"].hyper >= 1.0
    assert out["eb-modified"].radius > 0
    assert math.isfinite(out["eb-modified"].error)


def test_runs_are_deterministic():
    plan = gwn_plan()
    first = run_gwn_coverage(plan).model_dump(exclude={"cells": {"__all__": {"wall_time"}}})
    second = run_gwn_coverage(plan).model_dump(exclude={"cells": {"__all__": {"wall_time"}}})
    assert first == second


def test_worker_processes_do_not_change_results():
    plan = gwn_plan(n_values=[1e3])
    tasks = [(plan, 0, rep) for rep in range(3)]
    serial = map_ordered(gwn_replication, tasks, 1)
    parallel = map_ordered(gwn_replication, tasks, 2)
    for a, b in zip(serial, parallel):
        for method in plan.methods:
            assert a[method].covered == b[method].covered
            assert a[method].radius == b[method].radius


def test_log_n_inflation_never_covers_less():
    rep = run_gwn_coverage(gwn_plan(replications=10))
    for n in (1e3, 1e4):
        plain, inflated = rep.cell("eb-l1", n), rep.cell("eb-llogn", n)
        assert inflated.coverage >= plain.coverage
        assert inflated.mean_diameter == pytest.approx(plain.mean_diameter * math.log(n))
        assert inflated.diameter_over_log_n == pytest.approx(plain.mean_diameter)


def test_every_method_runs():
    methods = ["eb-l1", "eb-llogn", "eb-modified", "hb", "hb-llogn", "poly-eb"]
    rep = run_gwn_coverage(gwn_plan(methods=methods, replications=2, n_values=[1e4]))
    assert [c.method for c in rep.cells] == methods
    for c in rep.cells:
        assert 0 <= c.coverage <= 1
        assert c.mean_radius > 0
        assert c.median_error > 0
    assert rep.cell("hb-llogn", 1e4).mean_diameter > rep.cell("hb", 1e4).mean_diameter
    assert rep.truth_label == "selfsimilar(beta=1, c=1)"


def test_plan_validation():
    with pytest.raises(ValueError):
        gwn_plan(methods=[])
    with pytest.raises(ValueError):
        gwn_plan(methods=["M1"])
    with pytest.raises(ValueError):
        gwn_plan(model="regression", methods=["M1"], n_values=[10.5])
    with pytest.raises(ValueError):
        gwn_plan(n_values=[-1.0])
    with pytest.raises(ValueError):
        AcceptanceCheck(kind="coverage_min", method="eb-l1")
    with pytest.raises(ValueError):
        run_pointwise_coverage(gwn_plan())


def test_log_n_inflation():
    assert log_n_inflation(2.0) == 1.0
    assert log_n_inflation(1e4) == pytest.approx(math.log(1e4))


def test_membership_summary():
    plan = gwn_plan(membership={"kind": "selfsimilar", "beta": 1.0, "m": 0.5, "M": 2.0})
    assert membership_summary(plan)["member"] is True
    assert membership_summary(gwn_plan()) is None
    plan = gwn_plan(membership={"kind": "hyperrectangle", "beta": 2.0, "M": 1.0})
    assert membership_summary(plan)["member"] is False


def test_slope_of_an_exact_power_law():
    ns = [1e3, 1e4, 1e5, 1e6]
    fitted = fit_log_slope(ns, [n ** (-1 / 3) for n in ns])
    assert fitted.slope == pytest.approx(-1 / 3, abs=1e-12)
    assert fitted.intercept == pytest.approx(0.0, abs=1e-10)


def test_slope_needs_three_points():
    with pytest.raises(InvalidArgumentError):
        fit_log_slope([1e3, 1e4], [1.0, 0.5])
    with pytest.raises(InvalidArgumentError):
        fit_log_slope([1e3, 1e4, 1e5], [1.0, 0.0, 0.5])
    with pytest.raises(InvalidArgumentError):
        run_rate_slope(gwn_plan(n_values=[1e3, 1e4]))


def test_rate_slope_report():
    slopes = run_rate_slope(gwn_plan(n_values=[1e3, 1e4, 1e5], replications=2))
    assert {s.method for s in slopes.slopes} == {"eb-l1", "eb-llogn"}
    assert slopes.for_method("eb-l1").diameter.slope < 0


def test_acceptance_checks():
    rep = report(
        [
            cell("eb-l1", 1e3, 0.6, 1.0),
            cell("eb-l1", 1e4, 0.3, 0.5),
            cell("eb-llogn", 1e3, 0.97, 7.0),
            cell("eb-llogn", 1e4, 0.99, 4.6),
        ]
    )
    passing = [
        AcceptanceCheck(kind="coverage_min", method="eb-llogn", threshold=0.95),
        AcceptanceCheck(kind="coverage_max", method="eb-l1", n=1e4, threshold=0.5),
        AcceptanceCheck(kind="coverage_nonincreasing", method="eb-l1"),
        AcceptanceCheck(kind="dominates", method="eb-llogn", other="eb-l1", strict=True),
        AcceptanceCheck(kind="size_ordering", order=["eb-l1", "eb-llogn"]),
    ]
    assert evaluate_acceptance(rep, passing) == []
    enforce_acceptance(rep, passing)

    failing = [
        AcceptanceCheck(kind="coverage_min", method="eb-l1", threshold=0.95),
        AcceptanceCheck(kind="coverage_nonincreasing", method="eb-llogn"),
        AcceptanceCheck(kind="size_ordering", order=["eb-llogn", "eb-l1"]),
        AcceptanceCheck(kind="slope_range", method="eb-l1", low=-0.4, high=-0.26),
    ]
    failures = evaluate_acceptance(rep, failing)
    assert len(failures) == 6
    with pytest.raises(AcceptanceError) as info:
        enforce_acceptance(rep, failing)
    assert info.value.failures == failures


def test_coverage_csv_and_sidecar(tmp_path):
    plan = gwn_plan(replications=2, n_values=[1e3])
    path = write_coverage_csv(tmp_path / "coverage.csv", run_gwn_coverage(plan))
    with open(path, encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == CELL_COLUMNS
    assert "wall_time" not in rows[0]
    assert len(rows) == 1 + len(plan.methods)

    meta = json.loads((tmp_path / "coverage.meta.json").read_text(encoding="utf-8"))
    assert meta["config_hash"] == config_hash(plan)
    assert meta["master_seed"] == 3
    assert meta["artifact"] == "coverage.csv"

    again = write_coverage_csv(tmp_path / "again.csv", run_gwn_coverage(plan))
    assert again.read_bytes() == path.read_bytes()

    summary_path = write_summary(tmp_path / "summary.json", run_gwn_coverage(plan))
    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    assert "wall_time" in summary["cells"][0]


def test_config_hash_tracks_the_plan():
    assert config_hash(gwn_plan()) == config_hash(gwn_plan())
    assert config_hash(gwn_plan()) != config_hash(gwn_plan(master_seed=4))


def test_pointwise_coverage():
    plan = ExperimentPlan(
        name="pointwise",
        model="regression",
        truth=TruthSpec(kind="f2"),
        n_values=[30],
        methods=["M1", "M2", "M3"],
        replications=2,
        gp_bounds=GpBounds(a_grid=12, sigma2_grid=8),
    )
    rep = run_pointwise_coverage(plan)
    assert len(rep.cells) == 3 * len(plan.eval_points)
    assert {c.target for c in rep.cells} == {"x=0.25", "x=0.3188", "x=0.75"}
    for target in ("x=0.25", "x=0.3188", "x=0.75"):
        m1, m2 = rep.cell("M1", 30, target), rep.cell("M2", 30, target)
        assert m2.coverage >= m1.coverage
        assert m2.mean_diameter == pytest.approx(m1.mean_diameter * math.log(30))


def test_table_layout(tmp_path):
    targets = ["x=0.25", "x=0.3188", "x=0.75"]
    cells = [
        cell(m, n, 0.5, size, t)
        for m, size in (("M1", 0.4), ("M2", 1.8), ("M3", 0.75))
        for n in (100, 500, 1000)
        for t in targets
    ]
    rep = report(cells, model="regression")
    header, rows = coverage_table(rep)
    assert header[0] == "method"
    assert len(header) == 1 + 2 * 9
    assert [r[0] for r in rows] == ["Method 1", "Method 2", "Method 3"]
    assert all(len(r) == len(header) for r in rows)

    header, rows = size_table(rep)
    assert header == ["method", "n=100", "n=500", "n=1000", "se n=100", "se n=500", "se n=1000"]
    assert rows[0][1] == pytest.approx(0.4)

    paths = write_tables(tmp_path, rep, rep)
    assert [p.name for p in paths] == ["table1.csv", "table2.csv", "table3.csv", "table4.csv"]
    assert (tmp_path / "table3.meta.json").exists()


def test_table_plans():
    plans = table_plans(replications=7, seed=5)
    assert plans["regression"].n_values == [100, 500, 1000]
    assert plans["classification"].n_values == [100, 200, 500]
    assert all(p.replications == 7 and p.master_seed == 5 for p in plans.values())


@pytest.mark.parametrize("path", sorted(Path("plans").glob("*.json")), ids=lambda p: p.stem)
def test_shipped_plans_validate(path):
    plan = ExperimentPlan.model_validate_json(path.read_text(encoding="utf-8"))
    assert plan.methods
    summary = membership_summary(plan)
    assert summary is None or summary["member"] is True


# Monte-Carlo acceptance runs


def _slow_plan(**overrides) -> ExperimentPlan:
    settings = dict(
        truth=TruthSpec(kind="selfsimilar", beta=1.0, c=1.0),
        n_values=[1e3, 1e4, 1e5],
        methods=["eb-l1"],
        replications=200,
        master_seed=2024,
    )
    settings.update(overrides)
    return ExperimentPlan(**settings)


@pytest.mark.slow
def test_plain_empirical_bayes_loses_coverage():
    rep = run_gwn_coverage(_slow_plan())
    coverage = [rep.cell("eb-l1", n).coverage for n in (1e3, 1e4, 1e5)]
    assert coverage[0] >= coverage[1] >= coverage[2]
    assert coverage[2] <= 0.10


@pytest.mark.slow
def test_log_n_inflation_restores_coverage():
    rep = run_gwn_coverage(_slow_plan(methods=["eb-llogn"]))
    assert all(c.coverage >= 0.95 for c in rep.cells)


@pytest.mark.slow
def test_modified_scale_dominates():
    plan = _slow_plan(n_values=[1e4, 1e5], methods=["eb-l1", "eb-modified"])
    rep = run_gwn_coverage(plan)
    checks = [
        AcceptanceCheck(kind="coverage_min", method="eb-modified", threshold=0.80),
        AcceptanceCheck(kind="dominates", method="eb-modified", other="eb-l1", strict=True),
    ]
    enforce_acceptance(rep, checks)


@pytest.mark.slow
def test_analytic_truth():
    plan = _slow_plan(truth=TruthSpec(kind="analytic", gamma=1.0), inflation=2.0)
    rep = run_gwn_coverage(plan)
    assert rep.cell("eb-l1", 1e4).coverage >= 0.90
    radius = {n: rep.cell("eb-l1", n).median_radius for n in (1e3, 1e4, 1e5)}
    C = radius[1e3] * math.sqrt(1e3) / math.log(1e3)
    for n in (1e4, 1e5):
        assert radius[n] <= C * math.log(n) / math.sqrt(n)


@pytest.mark.slow
def test_diameter_rate():
    plan = _slow_plan(n_values=[1e3, 1e4, 1e5, 1e6], replications=100)
    slope = run_rate_slope(plan).for_method("eb-l1").diameter.slope
    assert -0.40 <= slope <= -0.26


@pytest.mark.slow
def test_regression_tables():
    rep = run_pointwise_coverage(table_plans(100, 0)["regression"])
    for n in (100, 500, 1000):
        m1, m2, m3 = (rep.cell(m, n, "x=0.3188") for m in ("M1", "M2", "M3"))
        assert m1.coverage <= 0.15
        assert m1.coverage < m3.coverage < m2.coverage
        assert all(c.coverage >= 0.90 for c in rep.select(method="M2"))
    _, rows = size_table(rep)
    sizes = {r[0]: r[1:4] for r in rows}
    for j in range(3):
        assert sizes["Method 1"][j] < sizes["Method 3"][j] < sizes["Method 2"][j]
    assert 0.3956 / 2 <= sizes["Method 1"][0] <= 0.3956 * 2


@pytest.mark.slow
def test_classification_tables():
    rep = run_pointwise_coverage(table_plans(100, 0)["classification"])
    for n in (100, 200, 500):
        assert rep.cell("M1", n, "x=0.3188").coverage <= 0.5
    assert all(c.coverage >= 0.90 for c in rep.select(method="M2"))
    _, rows = size_table(rep)
    sizes = {r[0]: r[1:4] for r in rows}
    for j in range(3):
        assert sizes["Method 1"][j] < sizes["Method 3"][j] < sizes["Method 2"][j]
import logging
from itertools import groupby
from operator import attrgetter

from gpcover.errors import AcceptanceError
from gpcover.harness.types import AcceptanceCheck, CoverageReport, SlopeReport

logger = logging.getLogger(__name__)


def _check(
    check: AcceptanceCheck, report: CoverageReport, slopes: SlopeReport | None
) -> list[str]:
    name = check.describe()
    cells = report.select(check.method, check.n, check.target)
    match check.kind:
        case "coverage_min":
            return [
                f"{name}: {c.method} n={c.n:g} {c.target} coverage {c.coverage:.3f}"
                for c in cells
                if c.coverage < check.threshold
            ]
        case "coverage_max":
            return [
                f"{name}: {c.method} n={c.n:g} {c.target} coverage {c.coverage:.3f}"
                for c in cells
                if c.coverage > check.threshold
            ]
        case "coverage_nonincreasing":
            failures = []
            by_target = attrgetter("target")
            for target, group in groupby(sorted(cells, key=by_target), key=by_target):
                ordered = sorted(group, key=lambda c: c.n)
                for prev, cur in zip(ordered, ordered[1:]):
                    if cur.coverage > prev.coverage:
                        failures.append(
                            f"{name}: {target} coverage rises from {prev.coverage:.3f} "
                            f"at n={prev.n:g} to {cur.coverage:.3f} at n={cur.n:g}"
                        )
            return failures
        case "dominates":
            failures = []
            for c in cells:
                other = report.cell(check.other, c.n, c.target)
                ok = c.coverage > other.coverage if check.strict else c.coverage >= other.coverage
                if not ok:
                    failures.append(
                        f"{name}: n={c.n:g} {c.target} {c.coverage:.3f} vs {other.coverage:.3f}"
                    )
            return failures
        case "size_ordering":
            failures = []
            first = report.select(check.order[0], check.n, check.target)
            for c in first:
                sizes = [report.cell(m, c.n, c.target).mean_diameter for m in check.order]
                if any(b <= a for a, b in zip(sizes, sizes[1:])):
                    failures.append(
                        f"{name}: n={c.n:g} {c.target} sizes "
                        + ", ".join(f"{s:.4g}" for s in sizes)
                    )
            return failures
        case "slope_range":
            if slopes is None:
                return [f"{name}: no slope report to check"]
            slope = slopes.for_method(check.method).diameter.slope
            if not check.low <= slope <= check.high:
                return [f"{name}: slope {slope:.4f}"]
            return []


def evaluate_acceptance(
    report: CoverageReport, checks: list[AcceptanceCheck], slopes: SlopeReport | None = None
) -> list[str]:
    """Failure messages for every check that does not hold; empty when all pass."""
    failures = []
    for check in checks:
        found = _check(check, report, slopes)
        if found:
            logger.warning("Acceptance check failed: %s", check.describe())
        failures.extend(found)
    return failures


def enforce_acceptance(
    report: CoverageReport, checks: list[AcceptanceCheck], slopes: SlopeReport | None = None
) -> None:
    failures = evaluate_acceptance(report, checks, slopes)
    if failures:
        raise AcceptanceError(failures)

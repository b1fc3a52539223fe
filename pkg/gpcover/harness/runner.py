import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from gpcover.harness.types import CoverageCell


@dataclass(frozen=True)
class Outcome:
    """What one replication of one method produced."""

    covered: bool
    radius: float
    diameter: float
    error: float
    hyper: float
    seconds: float


def map_ordered(fn: Callable, tasks: Sequence[tuple], threads: int = 1) -> list:
    """fn(*task) for every task, in task order; threads > 1 fans out to worker processes."""
    if threads <= 1 or len(tasks) <= 1:
        return [fn(*task) for task in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, *zip(*tasks)))


def aggregate(method: str, n: float, target: str, outcomes: Sequence[Outcome]) -> CoverageCell:
    R = len(outcomes)
    p = sum(o.covered for o in outcomes) / R
    radii = np.array([o.radius for o in outcomes])
    diameters = np.array([o.diameter for o in outcomes])
    return CoverageCell(
        method=method,
        n=n,
        target=target,
        replications=R,
        coverage=p,
        mc_se=math.sqrt(p * (1 - p) / R),
        mean_radius=float(np.mean(radii)),
        median_radius=float(np.median(radii)),
        mean_diameter=float(diameters.mean()),
        sd_diameter=float(diameters.std(ddof=1)) if R > 1 else 0.0,
        median_diameter=float(np.median(diameters)),
        median_error=float(np.median([o.error for o in outcomes])),
        mean_hyper=float(np.mean([o.hyper for o in outcomes])),
        wall_time=math.fsum(o.seconds for o in outcomes),
    )

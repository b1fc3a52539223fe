import csv
import hashlib
import json
import logging
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from pydantic import BaseModel

from gpcover.harness.types import CoverageReport, Provenance

logger = logging.getLogger(__name__)

try:
    VERSION = version("gpcover")
except PackageNotFoundError:
    VERSION = "0.1.0"

CELL_COLUMNS = [
    "method",
    "n",
    "target",
    "replications",
    "coverage",
    "mc_se",
    "mean_radius",
    "median_radius",
    "mean_diameter",
    "sd_diameter",
    "median_diameter",
    "median_error",
    "mean_hyper",
]


def config_hash(config: BaseModel) -> str:
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha1(canonical.encode("utf-8")).hexdigest()


def provenance(config: BaseModel, master_seed: int) -> Provenance:
    return Provenance(config_hash=config_hash(config), master_seed=master_seed, version=VERSION)


def _format(value: object) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.bool_):
        return str(bool(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(v) for v in row])
    logger.info("Wrote %s", path)
    return path


def write_sidecar(path: Path, prov: Provenance, **extra: object) -> Path:
    """Provenance JSON next to an artifact: table1.csv → table1.meta.json."""
    sidecar = path.with_name(path.stem + ".meta.json")
    payload = {"artifact": path.name, **prov.model_dump(), **extra}
    sidecar.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return sidecar


def write_artifact(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[object]], prov: Provenance
) -> Path:
    write_csv(path, header, rows)
    write_sidecar(path, prov)
    return path


def write_coverage_csv(path: Path, report: CoverageReport) -> Path:
    rows = [[getattr(c, col) for col in CELL_COLUMNS] for c in report.cells]
    return write_artifact(path, CELL_COLUMNS, rows, report.provenance)


def write_summary(path: Path, report: BaseModel) -> Path:
    """Full report as JSON; the only artifact that carries wall times."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    return path

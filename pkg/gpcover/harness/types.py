from __future__ import annotations

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from gpcover.eb.types import BoundsConfig, HyperPrior, MmleConfig
from gpcover.gp.types import GpBounds
from gpcover.signals.construct import (
    DEFAULT_N,
    make_analytic,
    make_f1,
    make_f2,
    make_selfsimilar,
    make_zero,
)
from gpcover.signals.types import FunctionClassSpec, SequenceSignal

GWN_METHODS = ("eb-l1", "eb-llogn", "eb-modified", "hb", "hb-llogn", "poly-eb")
POINTWISE_METHODS = ("M1", "M2", "M3")


class TruthSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["f1", "f2", "selfsimilar", "analytic", "zero"]
    beta: float = Field(default=1.0, gt=0.0)
    gamma: float = Field(default=1.0, gt=0.0)
    c: float = Field(default=1.0, gt=0.0)
    N: int = Field(default=DEFAULT_N, ge=1)

    def build(self) -> SequenceSignal:
        match self.kind:
            case "f1":
                return make_f1(self.N)
            case "f2":
                return make_f2(self.N)
            case "selfsimilar":
                return make_selfsimilar(self.beta, self.c, self.N)
            case "analytic":
                return make_analytic(self.gamma, self.c, self.N)
            case "zero":
                return make_zero(self.N)


class AcceptanceCheck(BaseModel):
    """
    One assertion about a finished run.

    coverage_min / coverage_max compare coverage with `threshold`;
    coverage_nonincreasing orders a method's coverage by n; dominates compares
    `method` with `other` cell by cell; size_ordering requires mean diameters
    to increase along `order`; slope_range bounds a diameter slope to [low, high].
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal[
        "coverage_min",
        "coverage_max",
        "coverage_nonincreasing",
        "dominates",
        "size_ordering",
        "slope_range",
    ]
    method: str | None = None
    other: str | None = None
    order: list[str] = []
    n: float | None = None
    target: str | None = None
    threshold: float | None = None
    strict: bool = False
    low: float | None = None
    high: float | None = None

    @model_validator(mode="after")
    def _needs(self) -> AcceptanceCheck:
        required = {
            "coverage_min": ("method", "threshold"),
            "coverage_max": ("method", "threshold"),
            "coverage_nonincreasing": ("method",),
            "dominates": ("method", "other"),
            "size_ordering": (),
            "slope_range": ("method", "low", "high"),
        }[self.kind]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind} check needs {', '.join(missing)}")
        if self.kind == "size_ordering" and len(self.order) < 2:
            raise ValueError("size_ordering needs at least two methods in order")
        return self

    def describe(self) -> str:
        parts = [self.kind]
        for name in ("method", "other", "n", "target", "threshold", "low", "high"):
            value = getattr(self, name)
            if value is not None:
                parts.append(f"{name}={value}")
        if self.order:
            parts.append("order=" + "<".join(self.order))
        return " ".join(parts)


class ExperimentPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = "experiment"
    model: Literal["gwn", "regression", "classification"] = "gwn"
    truth: TruthSpec
    n_values: list[float] = Field(min_length=1)
    methods: list[str]
    replications: int = Field(default=100, ge=1)
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0)
    master_seed: int = Field(default=0, ge=0)
    inflation: float = Field(default=1.0, ge=1.0)
    draws: int = Field(default=2000, ge=100)
    n_obs: int = Field(default=2000, ge=1)
    eval_points: list[float] = [0.25, 0.3188, 0.75]
    basis_size: int = Field(default=200, ge=1)
    sigma2: float = Field(default=0.5, ge=0.0)
    mmle: MmleConfig = MmleConfig()
    bounds: BoundsConfig = BoundsConfig()
    hyper_prior: HyperPrior = HyperPrior()
    gp_bounds: GpBounds = GpBounds()
    membership: FunctionClassSpec | None = None
    acceptance: list[AcceptanceCheck] = []

    @field_validator("n_values")
    @classmethod
    def _positive_n(cls, values: list[float]) -> list[float]:
        if any(not (v > 0 and math.isfinite(v)) for v in values):
            raise ValueError(f"n values must be positive and finite, got {values}")
        return values

    @field_validator("eval_points")
    @classmethod
    def _unit_interval(cls, points: list[float]) -> list[float]:
        if any(not 0 <= x <= 1 for x in points):
            raise ValueError(f"Evaluation points must lie in [0, 1], got {points}")
        return points

    @model_validator(mode="after")
    def _check_methods(self) -> ExperimentPlan:
        if not self.methods:
            raise ValueError("A plan needs at least one method")
        allowed = GWN_METHODS if self.model == "gwn" else POINTWISE_METHODS
        unknown = [m for m in self.methods if m not in allowed]
        if unknown:
            raise ValueError(f"Unknown methods for {self.model}: {unknown}; allowed {allowed}")
        if self.model != "gwn" and any(n < 2 or n != int(n) for n in self.n_values):
            raise ValueError("Pointwise models need integer sample sizes >= 2")
        if self.model != "gwn" and self.basis_size > self.truth.N:
            raise ValueError(f"basis_size {self.basis_size} exceeds truth N={self.truth.N}")
        return self


class Provenance(BaseModel):
    config_hash: str
    master_seed: int
    version: str


class CoverageCell(BaseModel):
    method: str
    n: float
    target: str
    replications: int = Field(ge=1)
    coverage: float = Field(ge=0.0, le=1.0)
    mc_se: float
    mean_radius: float
    median_radius: float
    mean_diameter: float
    sd_diameter: float
    median_diameter: float
    median_error: float
    mean_hyper: float
    wall_time: float = 0.0

    @property
    def diameter_over_log_n(self) -> float:
        return self.mean_diameter / math.log(self.n) if self.n > 1 else math.nan


class CoverageReport(BaseModel):
    plan_name: str
    model: str
    truth_label: str
    cells: list[CoverageCell]
    provenance: Provenance
    membership: dict | None = None

    def cell(self, method: str, n: float, target: str = "l2") -> CoverageCell:
        for c in self.cells:
            if c.method == method and c.n == n and c.target == target:
                return c
        raise KeyError(f"No cell for method={method}, n={n}, target={target}")

    def select(
        self, method: str | None = None, n: float | None = None, target: str | None = None
    ) -> list[CoverageCell]:
        return [
            c
            for c in self.cells
            if (method is None or c.method == method)
            and (n is None or c.n == n)
            and (target is None or c.target == target)
        ]


class SlopeFit(BaseModel):
    slope: float
    stderr: float
    intercept: float


class MethodSlopes(BaseModel):
    method: str
    diameter: SlopeFit
    error: SlopeFit


class SlopeReport(BaseModel):
    slopes: list[MethodSlopes]
    coverage: CoverageReport

    def for_method(self, method: str) -> MethodSlopes:
        for s in self.slopes:
            if s.method == method:
                return s
        raise KeyError(f"No slope for method={method}")

from __future__ import annotations

from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from gpcover.errors import InvalidArgumentError
from gpcover.optimize import Boundary

Q_975 = 1.959963984540054


class Method(StrEnum):
    """Pointwise interval constructions."""

    STANDARD = "M1"
    INFLATED = "M2"
    MODIFIED = "M3"

    @property
    def title(self) -> str:
        return f"Method {self.value[1]}"


class GpBounds(BaseModel):
    model_config = ConfigDict(frozen=True)

    a_min: float = Field(default=1e-2, gt=0.0)
    a_max: float = Field(default=1e6, gt=0.0)
    sigma2_min: float = Field(default=1e-6, gt=0.0)
    sigma2_max: float = Field(default=1e2, gt=0.0)
    a_grid: int = Field(default=60, ge=4)
    sigma2_grid: int = Field(default=40, ge=4)
    refine_tol: float = Field(default=1e-6, gt=0.0)

    @model_validator(mode="after")
    def _ordered(self) -> GpBounds:
        if self.a_min >= self.a_max or self.sigma2_min >= self.sigma2_max:
            raise ValueError("Search bounds need min < max")
        return self


@dataclass(frozen=True, eq=False)
class RegressionData:
    x: np.ndarray
    y: np.ndarray
    sigma2_true: float
    seed: int = 0

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape or x.ndim != 1 or x.size < 2:
            raise InvalidArgumentError("Regression data need matching x and y with n >= 2")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.size


@dataclass(frozen=True, eq=False)
class ClassificationData:
    x: np.ndarray
    y: np.ndarray
    seed: int = 0

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=int)
        if x.shape != y.shape or x.ndim != 1 or x.size < 1:
            raise InvalidArgumentError("Classification data need matching x and labels")
        if np.any((y != 0) & (y != 1)):
            raise InvalidArgumentError("Labels must be 0 or 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.size

    @property
    def degenerate(self) -> bool:
        return bool(np.all(self.y == self.y[0]))


@dataclass(frozen=True)
class GpFit:
    """Marginal-likelihood fit; `a_eff` is the scale used for prediction."""

    a_hat: float
    a_eff: float
    sigma2_hat: float
    log_marginal: float
    method: Method
    n: int
    a_boundary: Boundary = Boundary.INTERIOR
    sigma2_boundary: Boundary = Boundary.INTERIOR


@dataclass(frozen=True, eq=False)
class LaplaceFit:
    a: float
    mode: np.ndarray
    grad_loglik: np.ndarray
    approx_log_marginal: float
    newton_iters: int
    converged: bool
    objective_trace: list[float] = field(default_factory=list, repr=False)
    chol_B: np.ndarray = field(default=None, repr=False)
    sqrt_W: np.ndarray = field(default=None, repr=False)


@dataclass(frozen=True)
class ClassifierFit:
    a_hat: float
    boundary: Boundary
    fits: dict[Method, LaplaceFit]


@dataclass(frozen=True, eq=False)
class Prediction:
    x: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    half_width: np.ndarray
    method: Method

    @property
    def lower(self) -> np.ndarray:
        return self.mean - self.half_width

    @property
    def upper(self) -> np.ndarray:
        return self.mean + self.half_width

    def covers(self, values: np.ndarray) -> np.ndarray:
        return (self.lower <= values) & (values <= self.upper)

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from gpcover.errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class ObservedSequence:
    y: np.ndarray
    n: float
    seed: int = 0
    truth_label: str = ""
    stream: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        y = np.array(self.y, dtype=float).ravel()
        if y.size < 1:
            raise InvalidArgumentError("An observed sequence needs at least one coordinate")
        if not (self.n > 0 and math.isfinite(self.n)):
            raise InvalidArgumentError(f"Signal-to-noise n must be positive, got {self.n}", self.n)
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def N(self) -> int:
        return self.y.size

    def to_dict(self) -> dict:
        return {
            "y": self.y.tolist(),
            "n": self.n,
            "seed": self.seed,
            "stream": list(self.stream),
            "truth_label": self.truth_label,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ObservedSequence:
        return cls(
            y=np.asarray(data["y"], dtype=float),
            n=float(data["n"]),
            seed=int(data.get("seed", 0)),
            truth_label=data.get("truth_label", ""),
            stream=tuple(data.get("stream", ())),
        )


class PriorSpec(BaseModel):
    """
    Coordinate-wise Gaussian prior: variance a⁻¹e^(-i/a) (exponential) or
    i^(-1-2α) (polynomial).
    """

    model_config = ConfigDict(frozen=True)

    variant: Literal["exponential", "polynomial"] = "exponential"
    a: float = Field(default=1.0, ge=1.0, allow_inf_nan=False)
    alpha: float = Field(default=1.0, gt=0.0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _finite(self) -> PriorSpec:
        if self.variant == "polynomial" and self.alpha > 1e3:
            raise ValueError(f"alpha={self.alpha} is outside the supported range")
        return self

    def log_precision(self, i: np.ndarray) -> np.ndarray:
        """Log of the prior precision 1/var_i."""
        i = np.asarray(i, dtype=float)
        if self.variant == "exponential":
            return math.log(self.a) + i / self.a
        return (1 + 2 * self.alpha) * np.log(i)

    @property
    def label(self) -> str:
        if self.variant == "exponential":
            return f"exponential(a={self.a:.6g})"
        return f"polynomial(alpha={self.alpha:.6g})"


@dataclass(frozen=True, eq=False)
class ScaledPosterior:
    means: np.ndarray
    log_precisions: np.ndarray
    prior: PriorSpec
    n: float
    truncated: np.ndarray = field(repr=False, default=None)

    @property
    def N(self) -> int:
        return self.means.size

    @property
    def a(self) -> float:
        return self.prior.a

    @property
    def precisions(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_precisions)

    @property
    def variances(self) -> np.ndarray:
        return np.exp(-self.log_precisions)

    @property
    def sds(self) -> np.ndarray:
        return np.exp(-0.5 * self.log_precisions)

    def to_dict(self) -> dict:
        return {
            "prior": self.prior.model_dump(),
            "n": self.n,
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import stats

from gpcover.errors import DomainError
from gpcover.optimize import Boundary
from gpcover.sequence.types import ObservedSequence


class MmleConfig(BaseModel):
    """
    Search settings for the marginal-likelihood estimate of the scale a.

    The upper endpoint A_n defaults to n/log²(n); `a_max` replaces it with a
    constant, which must stay below n.
    """

    model_config = ConfigDict(frozen=True)

    a_max: float | None = Field(default=None, gt=1.0)
    grid_size: int = Field(default=400, ge=16)
    refine_tol: float = Field(default=1e-6, gt=0.0, lt=1.0)
    truncation_margin: float = Field(default=40.0, ge=10.0)
    alpha_bounds: tuple[float, float] = (0.1, 5.0)

    @model_validator(mode="after")
    def _check_alpha(self) -> MmleConfig:
        lo, hi = self.alpha_bounds
        if not 0 < lo < hi:
            raise ValueError(f"alpha_bounds must satisfy 0 < lo < hi, got {self.alpha_bounds}")
        return self

    def upper(self, n: float) -> float:
        """A_n for signal-to-noise n."""
        if self.a_max is not None:
            if self.a_max >= n:
                raise DomainError("a_max", self.a_max, 1.0, n)
            return self.a_max
        return max(n / max(math.log(n), 1.0) ** 2, 1.0)


class BoundsConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    b: float = Field(default=1 / 32, gt=0.0)
    B: float = Field(default=1.0, gt=0.0)
    K0: float = Field(default=1.0, ge=1.0)
    scan_size: int = Field(default=400, ge=16)
    rel_tol: float = Field(default=1e-4, gt=0.0)


@dataclass(frozen=True)
class MmleFit:
    a_hat: float
    a_tilde: float
    loglik_at_hat: float
    boundary_flag: Boundary
    n: float
    a_max: float

    @property
    def modified_scale(self) -> float:
        """ã moved onto the prior's support a >= 1; for n < e the log n factor is below 1."""
        return max(self.a_tilde, 1.0)

    def to_dict(self) -> dict:
        return {
            "a_hat": self.a_hat,
            "a_tilde": self.a_tilde,
            "loglik_at_hat": self.loglik_at_hat,
            "boundary_flag": str(self.boundary_flag),
            "n": self.n,
            "a_max": self.a_max,
        }


@dataclass(frozen=True)
class PolynomialFit:
    alpha_hat: float
    loglik_at_hat: float
    boundary_flag: Boundary


@dataclass(frozen=True)
class DeterministicBounds:
    a_lower: float
    a_upper: float
    lower_empty: bool
    upper_empty: bool

    def contains(self, a: float) -> bool:
        return self.a_lower <= a <= self.a_upper


class HyperPrior(BaseModel):
    """
    Hyper-prior on the scale a, restricted to [lower, upper] (upper defaults to A_n).

    exponential(rate), gamma(shape, rate) and inverse_gamma(shape, scale).
    """

    model_config = ConfigDict(frozen=True)

    family: Literal["exponential", "gamma", "inverse_gamma"] = "exponential"
    rate: float = Field(default=1.0, gt=0.0)
    shape: float = Field(default=1.0, gt=0.0)
    scale: float = Field(default=1.0, gt=0.0)
    lower: float = Field(default=1.0, ge=1.0)
    upper: float | None = None

    @model_validator(mode="after")
    def _check_support(self) -> HyperPrior:
        if self.upper is not None and self.upper <= self.lower:
            raise ValueError(f"Support needs lower < upper, got [{self.lower}, {self.upper}]")
        return self

    def distribution(self) -> stats.rv_continuous:
        match self.family:
            case "exponential":
                return stats.expon(scale=1 / self.rate)
            case "gamma":
                return stats.gamma(self.shape, scale=1 / self.rate)
            case "inverse_gamma":
                return stats.invgamma(self.shape, scale=self.scale)

    def support(self, n: float, cfg: MmleConfig) -> tuple[float, float]:
        upper = cfg.upper(n) if self.upper is None else self.upper
        if upper > cfg.upper(n) * (1 + 1e-12):
            raise DomainError("upper", upper, self.lower, cfg.upper(n))
        if upper <= self.lower:
            raise DomainError("upper", upper, self.lower, cfg.upper(n))
        return self.lower, upper

    def log_density(self, a: np.ndarray, lo: float, hi: float) -> np.ndarray:
        """Log density of the restriction to [lo, hi]."""
        dist = self.distribution()
        log_sf_lo, log_sf_hi = dist.logsf(lo), dist.logsf(hi)
        log_mass = log_sf_lo + math.log(-math.expm1(log_sf_hi - log_sf_lo))
        return dist.logpdf(a) - log_mass

    def envelope(self) -> dict[str, float]:
        """Exponents of the bounds c₄⁻¹a^(-c₃)e^(-c₂a) ≤ π(a) ≤ c₄a^(-c₅)e^(-c₆a)."""
        match self.family:
            case "exponential":
                return {"c2": self.rate, "c3": 0.0, "c5": 0.0, "c6": self.rate}
            case "gamma":
                return {
                    "c2": self.rate,
                    "c3": 1 - self.shape,
                    "c5": 1 - self.shape,
                    "c6": self.rate,
                }
            case "inverse_gamma":
                return {"c2": 0.0, "c3": self.shape + 1, "c5": self.shape + 1, "c6": 0.0}


@dataclass(frozen=True, eq=False)
class HyperPosterior:
    grid: np.ndarray
    log_weights: np.ndarray
    weights: np.ndarray
    y: ObservedSequence = field(repr=False)
    prior: HyperPrior = field(repr=False)

    def mean(self) -> float:
        return float(self.weights @ self.grid)

    def mass(self, lo: float, hi: float) -> float:
        inside = (self.grid >= lo) & (self.grid <= hi)
        return float(self.weights[inside].sum())

    def to_rows(self) -> list[tuple[float, float]]:
        return [(float(a), float(w)) for a, w in zip(self.grid, self.weights)]

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Literal

import numpy as np
from pydantic import BaseModel, model_validator
from scipy.special import zeta

from gpcover.errors import InvalidArgumentError


class TailKind(StrEnum):
    ZERO = "zero"
    POWER = "power"
    EXP = "exp"


@dataclass(frozen=True)
class Tail:
    """
    Squared coefficients beyond the stored range.

    power(c, rate=β): f_i² = c·i^(-1-2β); exp(c, rate=γ): f_i² = c·e^(-2γi).
    An envelope tail only bounds the energy: its coefficients are not
    materialised, but its energy is used wherever a tail sum is needed.
    """

    kind: TailKind = TailKind.ZERO
    c: float = 0.0
    rate: float = 0.0
    envelope: bool = False

    def __post_init__(self) -> None:
        if self.kind != TailKind.ZERO and not (self.c > 0 and self.rate > 0):
            raise InvalidArgumentError(
                f"{self.kind} tail needs positive c and rate, got c={self.c}, rate={self.rate}"
            )
        if not (math.isfinite(self.c) and math.isfinite(self.rate)):
            raise InvalidArgumentError("Tail parameters must be finite")

    @property
    def materialised(self) -> bool:
        return self.kind != TailKind.ZERO and not self.envelope

    def log_square(self, i: np.ndarray) -> np.ndarray:
        i = np.asarray(i, dtype=float)
        if self.kind == TailKind.POWER:
            return math.log(self.c) - (1 + 2 * self.rate) * np.log(i)
        if self.kind == TailKind.EXP:
            return math.log(self.c) - 2 * self.rate * i
        return np.full(i.shape, -np.inf)

    def square(self, i: np.ndarray) -> np.ndarray:
        return np.exp(self.log_square(i))

    def energy_from(self, k: int | np.ndarray) -> float | np.ndarray:
        """Σ_{i>k} f_i² under this descriptor, in closed form."""
        k = np.asarray(k, dtype=float)
        if self.kind == TailKind.POWER:
            out = self.c * zeta(1 + 2 * self.rate, k + 1)
        elif self.kind == TailKind.EXP:
            out = self.c * np.exp(-2 * self.rate * (k + 1)) / -np.expm1(-2 * self.rate)
        else:
            out = np.zeros(k.shape)
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {
            "kind": str(self.kind),
            "params": {"c": self.c, "rate": self.rate},
            "envelope": self.envelope,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Tail:
        params = data.get("params", {})
        return cls(
            kind=TailKind(data.get("kind", "zero")),
            c=float(params.get("c", 0.0)),
            rate=float(params.get("rate", 0.0)),
            envelope=bool(data.get("envelope", False)),
        )


@dataclass(frozen=True, eq=False)
class SequenceSignal:
    coeffs: np.ndarray
    tail: Tail = field(default_factory=Tail)
    label: str = ""

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=float).ravel()
        if coeffs.size < 1:
            raise InvalidArgumentError("A signal needs at least one coefficient")
        if not np.all(np.isfinite(coeffs)):
            raise InvalidArgumentError("Signal coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def N(self) -> int:
        return self.coeffs.size

    def coefficients(self, length: int) -> np.ndarray:
        """Coefficients f_1..f_length, extended through the tail when it is materialised."""
        out = np.zeros(length)
        m = min(length, self.N)
        out[:m] = self.coeffs[:m]
        if length > self.N and self.tail.materialised:
            i = np.arange(self.N + 1, length + 1)
            out[self.N :] = np.sqrt(self.tail.square(i))
        return out

    def tail_energy(self, k: int) -> float:
        """Σ_{i>k} f_i²."""
        if k < 0:
            raise InvalidArgumentError(f"Tail index must be non-negative, got {k}", k)
        if k >= self.N:
            return float(self.tail.energy_from(k))
        return math.fsum(self.coeffs[k:] ** 2) + float(self.tail.energy_from(self.N))

    def energy_after(self, k: np.ndarray) -> np.ndarray:
        """Vectorised Σ_{i>k} f_i² for an array of k >= 0."""
        k = np.asarray(k, dtype=np.int64)
        out = np.asarray(self.tail.energy_from(np.maximum(k, self.N)), dtype=float)
        inside = k < self.N
        if np.any(inside):
            stored = np.cumsum((self.coeffs**2)[::-1])[::-1] + self.tail.energy_from(self.N)
            out = np.where(inside, stored[np.minimum(k, self.N - 1)], out)
        return out

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "coeffs": self.coeffs.tolist(),
            "tail": self.tail.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> SequenceSignal:
        return cls(
            coeffs=np.asarray(data["coeffs"], dtype=float),
            tail=Tail.from_dict(data.get("tail", {})),
            label=data.get("label", ""),
        )

    def __repr__(self) -> str:
        return f"SequenceSignal({self.label!r}, N={self.N}, tail={self.tail.kind})"


class FunctionClassSpec(BaseModel):
    kind: Literal["hyperrectangle", "selfsimilar", "analytic", "polishedtail"]
    beta: float | None = None
    m: float | None = None
    M: float | None = None
    gamma: float | None = None
    L0: float | None = None
    N0: int | None = None
    rho: float | None = None

    @model_validator(mode="after")
    def _check_params(self) -> FunctionClassSpec:
        required = {
            "hyperrectangle": ("beta", "M"),
            "selfsimilar": ("beta", "m", "M"),
            "analytic": ("gamma", "M"),
            "polishedtail": ("L0", "N0", "rho"),
        }[self.kind]
        for name in required:
            value = getattr(self, name)
            if value is None or not math.isfinite(value) or value <= 0:
                raise ValueError(f"{self.kind} needs a finite positive {name}")
        if self.kind == "selfsimilar" and self.m > self.M:
            raise ValueError(f"selfsimilar needs m <= M, got m={self.m}, M={self.M}")
        if self.kind == "polishedtail" and self.rho < 1:
            raise ValueError(f"polishedtail needs rho >= 1, got {self.rho}")
        return self


@dataclass(frozen=True, eq=False)
class BasisGrid:
    points: np.ndarray
    basis_size: int

    def __post_init__(self) -> None:
        points = np.array(self.points, dtype=float).ravel()
        if self.basis_size < 1:
            raise InvalidArgumentError(f"Basis size must be >= 1, got {self.basis_size}")
        if points.size and (np.any(np.diff(points) < 0) or points[0] < 0 or points[-1] > 1):
            raise InvalidArgumentError("Grid points must be sorted within [0, 1]")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @classmethod
    def uniform(cls, lo: float, hi: float, count: int, basis_size: int) -> BasisGrid:
        return cls(np.linspace(lo, hi, count), basis_size)


@dataclass(frozen=True)
class MembershipResult:
    member: bool
    witness: int | None = None

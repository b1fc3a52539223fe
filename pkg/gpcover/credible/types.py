from dataclasses import dataclass

import numpy as np

from gpcover.errors import InvalidArgumentError


@dataclass(frozen=True, eq=False)
class CredibleBall:
    """L₂ ball of radius inflation·radius around `center`."""

    center: np.ndarray
    radius: float
    inflation: float = 1.0
    alpha: float = 0.05
    mc_draws: int = 2000
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise InvalidArgumentError(f"Radius must be positive, got {self.radius}", self.radius)
        if not self.inflation >= 1:
            raise InvalidArgumentError(
                f"Inflation must be >= 1, got {self.inflation}", self.inflation
            )

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "inflation": self.inflation,
            "alpha": self.alpha,
            "mc_draws": self.mc_draws,
            "seed": self.seed,
            "N": int(self.center.size),
        }

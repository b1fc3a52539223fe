import logging
import math

import numpy as np

from gpcover.errors import InvalidArgumentError
from gpcover.rng import derive_rng
from gpcover.sequence.types import ObservedSequence
from gpcover.signals.types import SequenceSignal

logger = logging.getLogger(__name__)

DEFAULT_N_OBS = 2000


def simulate(
    f: SequenceSignal,
    n: float,
    N_obs: int = DEFAULT_N_OBS,
    seed: int = 0,
    stream: tuple[int, ...] = (),
) -> ObservedSequence:
    """
    Draw Y_i = f_i + Z_i/√n for i = 1..N_obs.

    Coefficients past the stored range come from the tail descriptor when it is
    materialised and are zero otherwise; their energy is accounted for
    analytically wherever distances to the truth are computed.
    """
    if not (n > 0 and math.isfinite(n)):
        raise InvalidArgumentError(f"Signal-to-noise n must be positive, got {n}", n)
    if N_obs < 1:
        raise InvalidArgumentError(f"N_obs must be >= 1, got {N_obs}", N_obs)
    rng = derive_rng(seed, *stream)
    z = rng.standard_normal(N_obs)
    y = f.coefficients(N_obs) + z / math.sqrt(n)
    logger.debug("Simulated %s at n=%g, stream=%s", f.label, n, stream)
    return ObservedSequence(y, float(n), seed, f.label, tuple(stream))

import logging
import math

import numpy as np
from scipy.special import logsumexp

from gpcover.errors import InvalidArgumentError, NumericalFailureError
from gpcover.eb.mmle import DEFAULT_CONFIG, log_marginal_likelihood
from gpcover.eb.types import HyperPosterior, HyperPrior, MmleConfig
from gpcover.rng import derive_rng
from gpcover.sequence.posterior import posterior
from gpcover.sequence.types import ObservedSequence, PriorSpec

logger = logging.getLogger(__name__)

MAX_LOG_FLOAT = math.log(np.finfo(float).max)


def _trapezoid_widths(grid: np.ndarray) -> np.ndarray:
    if grid.size == 1:
        return np.ones(1)
    gaps = np.diff(grid)
    widths = np.zeros(grid.size)
    widths[:-1] += gaps / 2
    widths[1:] += gaps / 2
    return widths


def hyper_posterior(
    y: ObservedSequence,
    prior: HyperPrior,
    grid_size: int = DEFAULT_CONFIG.grid_size,
    cfg: MmleConfig = DEFAULT_CONFIG,
) -> HyperPosterior:
    """
    Weights proportional to e^ℓ(a)·π(a) on a log-spaced quadrature grid
    over the prior's support.
    """
    if grid_size < 2:
        raise InvalidArgumentError(f"grid_size must be >= 2, got {grid_size}", grid_size)
    lo, hi = prior.support(y.n, cfg)
    grid = np.geomspace(lo, hi, grid_size)
    loglik = np.array([log_marginal_likelihood(y, float(a), cfg) for a in grid])
    log_weights = loglik + prior.log_density(grid, lo, hi) + np.log(_trapezoid_widths(grid))
    bad = np.flatnonzero(~np.isfinite(log_weights))
    if bad.size:
        raise NumericalFailureError(
            f"Hyper-posterior weight is not finite at a={grid[bad[0]]:.6g}",
            value=float(grid[bad[0]]),
        )

    log_weights = log_weights - logsumexp(log_weights)
    return HyperPosterior(grid, log_weights, np.exp(log_weights), y, prior)


def component_posteriors(
    y: ObservedSequence, grid: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means and standard deviations for every grid scale, one row per scale."""
    posts = [posterior(y, PriorSpec(a=float(a))) for a in grid]
    return np.stack([p.means for p in posts]), np.stack([p.sds for p in posts])


def hb_posterior_mean(y: ObservedSequence, hpost: HyperPosterior) -> np.ndarray:
    means, _ = component_posteriors(y, hpost.grid)
    return hpost.weights @ means


def hb_sample(
    y: ObservedSequence,
    hpost: HyperPosterior,
    count: int,
    seed: int = 0,
    stream: tuple[int, ...] = (),
) -> np.ndarray:
    """Mixture draws: a grid index from the weights, then a Gaussian vector given that scale."""
    return hb_draws(y, hpost, count, seed, stream)[0]


def hb_draws(
    y: ObservedSequence,
    hpost: HyperPosterior,
    count: int,
    seed: int = 0,
    stream: tuple[int, ...] = (),
    components: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Mixture draws together with the grid index each one was drawn under."""
    if count < 1:
        raise InvalidArgumentError(f"Draw count must be >= 1, got {count}", count)
    means, sds = components or component_posteriors(y, hpost.grid)
    rng = derive_rng(seed, *stream)
    index = rng.choice(hpost.grid.size, size=count, p=hpost.weights)
    return means[index] + rng.standard_normal((count, y.N)) * sds[index], index


def check_envelope(
    prior: HyperPrior,
    lo: float,
    hi: float,
    grid_size: int = 400,
    envelope: dict[str, float] | None = None,
) -> float:
    """
    Smallest c₄ for which the envelope (the prior's documented one unless
    given) holds on a log grid of [lo, hi].

    A finite value verifies the bounds numerically; inf when c₄ overflows.
    """
    c = prior.envelope() if envelope is None else envelope
    grid = np.geomspace(lo, hi, grid_size)
    log_pi = prior.log_density(grid, lo, hi)
    log_lower = -c["c3"] * np.log(grid) - c["c2"] * grid
    log_upper = -c["c5"] * np.log(grid) - c["c6"] * grid
    gap = max(float(np.max(log_pi - log_upper)), float(np.max(log_lower - log_pi)), 0.0)
    if gap >= MAX_LOG_FLOAT:
        logger.debug("Envelope gap %.4g on [%g, %g] overflows", gap, lo, hi)
        return math.inf
    return math.exp(gap)

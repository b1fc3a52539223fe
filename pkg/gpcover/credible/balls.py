"""
Credible-ball radii by Monte Carlo, coverage and size of inflated balls.

The squared radius is the (1-α) quantile of U = Σ Z_i²/τ_i. Coordinates are
drawn in fixed-width column blocks, each from its own sub-stream, so a given
(seed, block) yields the same Z wherever it is used; radii at different n
then share their noise exactly.
"""

import logging
import math

import numpy as np
from scipy.integrate import quad
from scipy.special import zeta

from gpcover.credible.types import CredibleBall
from gpcover.eb.hb import component_posteriors, hb_draws
from gpcover.eb.types import HyperPosterior
from gpcover.errors import InvalidArgumentError
from gpcover.rng import derive_rng
from gpcover.sequence.posterior import log_posterior_precision
from gpcover.sequence.types import PriorSpec
from gpcover.signals.types import SequenceSignal

logger = logging.getLogger(__name__)

DEFAULT_DRAWS = 2000
COLUMN_BLOCK = 32
DRAW_BLOCK = 1000
# relative size below which a coordinate's variance is folded into the mean tail
RELATIVE_CUTOFF = 1e-16
POLY_MAX_COORDS = 200_000


def _check_level(alpha: float, draws: int) -> None:
    if not 0 < alpha < 1:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}", alpha)
    if draws < 100:
        raise InvalidArgumentError(f"At least 100 draws are needed, got {draws}", draws)


def quantile_index(alpha: float, draws: int) -> int:
    """0-based position of the order statistic ⌈(1-α)·draws⌉."""
    return min(math.ceil((1 - alpha) * draws), draws) - 1


def _truncation(prior: PriorSpec, n: float) -> int:
    log_tau_1 = float(log_posterior_precision(np.array(1.0), prior, n))
    target = log_tau_1 - math.log(RELATIVE_CUTOFF)
    if prior.variant == "exponential":
        # smallest i with a·e^(i/a) + n > e^target
        log_excess = target + math.log1p(-n * math.exp(-target))
        return max(1, math.ceil(prior.a * (log_excess - math.log(prior.a))))
    s = 1 + 2 * prior.alpha
    stop = math.ceil(math.exp((target + math.log1p(-n * math.exp(-target))) / s))
    return max(1, min(stop, POLY_MAX_COORDS))


def tail_variance(prior: PriorSpec, n: float, start: int) -> float:
    """Σ_{i>start} 1/τ_i, for coordinates where the prior precision dominates n."""
    if prior.variant == "exponential":
        a = prior.a
        return math.exp(-math.log(a) - (start + 1) / a) / -math.expm1(-1 / a)
    s = 1 + 2 * prior.alpha
    if n < 1e-8 * (start + 1) ** s:
        return float(zeta(s, start + 1) - n * zeta(2 * s, start + 1))
    # midpoint approximation of the remaining sum
    value, _ = quad(lambda x: 1 / (x**s + n), start + 0.5, np.inf, limit=200)
    return value


def _exact_variances(prior: PriorSpec, n: float, lo: int, hi: int) -> np.ndarray:
    i = np.arange(lo + 1, hi + 1, dtype=float)
    return np.exp(-log_posterior_precision(i, prior, n))


def radius_sq_draws(
    prior: PriorSpec,
    n: float,
    draws: int = DEFAULT_DRAWS,
    seed: int = 0,
    stream: tuple[int, ...] = (),
) -> np.ndarray:
    """Monte-Carlo realisations of U = Σ Z_i²/τ_i."""
    i_star = _truncation(prior, n)
    total = np.full(draws, tail_variance(prior, n, i_star))
    for block, lo in enumerate(range(0, i_star, COLUMN_BLOCK)):
        hi = min(lo + COLUMN_BLOCK, i_star)
        z = derive_rng(seed, *stream, block).standard_normal((draws, COLUMN_BLOCK))
        total += (z[:, : hi - lo] ** 2) @ _exact_variances(prior, n, lo, hi)
    return total


def radius_for_prior(
    prior: PriorSpec,
    n: float,
    alpha: float = 0.05,
    draws: int = DEFAULT_DRAWS,
    seed: int = 0,
    stream: tuple[int, ...] = (),
) -> float:
    _check_level(alpha, draws)
    u = radius_sq_draws(prior, n, draws, seed, stream)
    k = quantile_index(alpha, draws)
    return math.sqrt(float(np.partition(u, k)[k]))


def radius_fixed_a(
    a: float,
    n: float,
    alpha: float = 0.05,
    draws: int = DEFAULT_DRAWS,
    seed: int = 0,
    stream: tuple[int, ...] = (),
) -> float:
    return radius_for_prior(PriorSpec(a=a), n, alpha, draws, seed, stream)


def expected_radius_sq(prior: PriorSpec, n: float) -> float:
    """E[U] = Σ 1/τ_i."""
    i_star = _truncation(prior, n)
    head = _exact_variances(prior, n, 0, i_star)
    return float(np.sum(head)) + tail_variance(prior, n, i_star)


def _tail_mean_beyond(a: float, n: float, start: int) -> float:
    """Σ_{i>start} 1/(a·e^(i/a) + n), exactly up to the cutoff and geometrically after."""
    prior = PriorSpec(a=a)
    i_star = max(_truncation(prior, n), start)
    head = _exact_variances(prior, n, start, i_star)
    return float(np.sum(head)) + tail_variance(prior, n, i_star)


def radius_hb(
    hpost: HyperPosterior,
    alpha: float = 0.05,
    draws: int = DEFAULT_DRAWS,
    seed: int = 0,
    stream: tuple[int, ...] = (),
) -> float:
    """
    Quantile of ‖f - f̂‖₂ under the mixture posterior.

    Coordinates past the observed range add their posterior variance given
    the drawn scale, so the radius stays comparable with the fixed-scale one.
    """
    _check_level(alpha, draws)
    y = hpost.y
    components = component_posteriors(y, hpost.grid)
    center = hpost.weights @ components[0]
    tails = np.array([_tail_mean_beyond(float(a), y.n, y.N) for a in hpost.grid])

    dist_sq = np.empty(draws)
    for block, lo in enumerate(range(0, draws, DRAW_BLOCK)):
        count = min(DRAW_BLOCK, draws - lo)
        f, index = hb_draws(y, hpost, count, seed, (*stream, block), components)
        dist_sq[lo : lo + count] = np.sum((f - center) ** 2, axis=1)
        dist_sq[lo : lo + count] += tails[index]
    k = quantile_index(alpha, draws)
    return math.sqrt(float(np.partition(dist_sq, k)[k]))


def l2_distance(center: np.ndarray, truth: SequenceSignal) -> float:
    """‖truth - center‖₂ with the truth's energy past the center's range added exactly."""
    diff = truth.coefficients(center.size) - center
    return math.sqrt(math.fsum(diff**2) + truth.tail_energy(center.size))


def make_ball(
    center: np.ndarray,
    radius: float,
    inflation: float = 1.0,
    alpha: float = 0.05,
    draws: int = DEFAULT_DRAWS,
    seed: int = 0,
) -> CredibleBall:
    return CredibleBall(np.asarray(center, dtype=float), radius, inflation, alpha, draws, seed)


def covers(ball: CredibleBall, truth: SequenceSignal) -> bool:
    return l2_distance(ball.center, truth) <= ball.inflation * ball.radius


def diameter(ball: CredibleBall) -> float:
    return 2 * ball.inflation * ball.radius

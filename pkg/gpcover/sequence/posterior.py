import logging
import math

import numpy as np
from scipy.special import expit

from gpcover.errors import InvalidArgumentError
from gpcover.rng import derive_rng
from gpcover.sequence.types import ObservedSequence, PriorSpec, ScaledPosterior
from gpcover.signals.types import SequenceSignal

logger = logging.getLogger(__name__)

# prior variance times n below this contributes nothing a double can resolve
NEGLIGIBLE_PRIOR = 1e-16
DEFAULT_MARGIN = 40.0


def log_posterior_precision(i: np.ndarray, prior: PriorSpec, n: float) -> np.ndarray:
    """log(τ_i) = log(prior precision + n), without forming the exponential."""
    return np.logaddexp(prior.log_precision(i), math.log(n))


def posterior(y: ObservedSequence, prior: PriorSpec) -> ScaledPosterior:
    i = np.arange(1, y.N + 1, dtype=float)
    log_prior = prior.log_precision(i)
    log_tau = np.logaddexp(log_prior, math.log(y.n))
    means = y.n * y.y * np.exp(-log_tau)

    truncated = math.log(y.n) - log_prior < math.log(NEGLIGIBLE_PRIOR)
    if np.any(truncated):
        means[truncated] = 0.0
        log_tau = np.where(truncated, log_prior, log_tau)
    return ScaledPosterior(means, log_tau, prior, y.n, truncated)


def posterior_mean_sq_error(post: ScaledPosterior, truth: SequenceSignal) -> float:
    """‖f̂ - f₀‖₂², with the truth's energy past the posterior's range added exactly."""
    diff = post.means - truth.coefficients(post.N)
    return math.fsum(diff**2) + truth.tail_energy(post.N)


def shrinkage(a: float, n: float, i: np.ndarray) -> np.ndarray:
    """Bias factor a·e^(i/a)/(a·e^(i/a) + n) per coordinate."""
    return expit(math.log(a) + np.asarray(i, dtype=float) / a - math.log(n))


def _check_scale(a: float, n: float) -> None:
    if not a >= 1 or not math.isfinite(a):
        raise InvalidArgumentError(f"Scale a must be >= 1, got {a}", a)
    if not n > 0 or not math.isfinite(n):
        raise InvalidArgumentError(f"Signal-to-noise n must be positive, got {n}", n)


def bias_norm_sq(
    a: float, n: float, truth: SequenceSignal, margin: float = DEFAULT_MARGIN
) -> tuple[float, float]:
    """
    Squared norm of the posterior-mean bias, Σ (a·e^(i/a)·f_i/(a·e^(i/a)+n))².

    Coordinates are summed up to a·(log(n/a) + margin) or the stored range,
    whichever is larger (envelope tails stop at the stored range). The rest of
    the truth's energy is shrunk by a factor in [1 - ε, 1]; the midpoint of
    that bracket is returned with its half-width.
    """
    _check_scale(a, n)
    cutoff = math.ceil(a * (max(math.log(n / a), 0.0) + margin))
    length = max(cutoff, truth.N) if truth.tail.materialised else truth.N
    i = np.arange(1, length + 1, dtype=float)
    head = math.fsum((shrinkage(a, n, i) * truth.coefficients(length)) ** 2)

    rest = truth.tail_energy(length)
    eps = min(1.0, 2 * math.exp(math.log(n) - math.log(a) - (length + 1) / a))
    return head + rest * (1 - eps / 2), rest * eps / 2


def variance_profile(a: float, n: float, N: int) -> np.ndarray:
    """n/(a·e^(i/a) + n)² for i = 1..N."""
    _check_scale(a, n)
    i = np.arange(1, N + 1, dtype=float)
    log_tau = np.logaddexp(math.log(a) + i / a, math.log(n))
    return np.exp(math.log(n) - 2 * log_tau)


def sample(
    post: ScaledPosterior, count: int, seed: int = 0, stream: tuple[int, ...] = ()
) -> np.ndarray:
    """Independent draws from the posterior, shape (count, N)."""
    if count < 1:
        raise InvalidArgumentError(f"Draw count must be >= 1, got {count}", count)
    rng = derive_rng(seed, *stream)
    return post.means + rng.standard_normal((count, post.N)) * post.sds

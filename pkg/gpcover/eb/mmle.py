"""
Marginal likelihood of the scale a in the sequence model, its derivative, the
maximum marginal likelihood estimate over [1, A_n] and the deterministic
functionals that bracket it.

Sums run to i* = max(⌈a·(log(n/a) + T)⌉, N_obs); past i* the data are zero
and the data-free parts are geometric series added in closed form.
"""

import logging
import math

import numpy as np

from gpcover.errors import DomainError, InvalidArgumentError
from gpcover.eb.types import (
    BoundsConfig,
    DeterministicBounds,
    MmleConfig,
    MmleFit,
    PolynomialFit,
)
from gpcover.optimize import Boundary, golden_section_max, maximize_on_log_grid
from gpcover.sequence.types import ObservedSequence
from gpcover.signals.types import SequenceSignal

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = MmleConfig()


def a_upper_bound(n: float, cfg: MmleConfig = DEFAULT_CONFIG) -> float:
    return cfg.upper(n)


def cutoff(a: float, n: float, margin: float) -> int:
    """Index past which a·e^(i/a) exceeds n by a factor e^margin."""
    return math.ceil(a * (max(math.log(n / a), 0.0) + margin))


def _check_scale(a: float, n: float, cfg: MmleConfig) -> None:
    upper = cfg.upper(n)
    if not (1.0 <= a <= upper * (1 + 1e-12)):
        raise DomainError("a", a, 1.0, upper)


def _geometric_tails(a: float, k: int) -> tuple[float, float]:
    """(Σ_{i>k} q^i, Σ_{i>k} i·q^i) for q = e^(-1/a)."""
    q_k1 = math.exp(-(k + 1) / a)
    one_minus_q = -math.expm1(-1 / a)
    q = 1 - one_minus_q
    return q_k1 / one_minus_q, q_k1 * ((k + 1) - k * q) / one_minus_q**2


def _loglik(y: ObservedSequence, a: float, margin: float) -> float:
    n = y.n
    i_star = max(cutoff(a, n, margin), y.N)
    i = np.arange(1, i_star + 1, dtype=float)
    log_prior = math.log(a) + i / a
    free = np.logaddexp(0.0, math.log(n) - log_prior)
    log_tau = np.logaddexp(log_prior[: y.N], math.log(n))
    data = n**2 * y.y**2 * np.exp(-log_tau)
    # Σ_{i>i*} log(1 + x_i) with x_i = n/(a·e^(i/a)) < e^-margin, to first order
    residual = n / a * _geometric_tails(a, i_star)[0]
    return -0.5 * (float(np.sum(free)) + residual - float(np.sum(data)))


def log_marginal_likelihood(
    y: ObservedSequence, a: float, cfg: MmleConfig = DEFAULT_CONFIG
) -> float:
    """
    ℓ_n(a) = -½ Σ [log(1 + n/(a·e^(i/a))) - n²y_i²/(a·e^(i/a) + n)].
    """
    _check_scale(a, y.n, cfg)
    return _loglik(y, a, cfg.truncation_margin)


def score(y: ObservedSequence, a: float, cfg: MmleConfig = DEFAULT_CONFIG) -> float:
    """dℓ_n/da."""
    _check_scale(a, y.n, cfg)
    n = y.n
    i_star = max(cutoff(a, n, cfg.truncation_margin), y.N)
    i = np.arange(1, i_star + 1, dtype=float)
    log_tau = np.logaddexp(math.log(a) + i / a, math.log(n))

    head = i[: y.N]
    data = (
        n**2
        * y.y**2
        * np.exp(head / a - 2 * log_tau[: y.N])
        * (head - a)
        / a
    )
    free = n * (i - a) / a**2 * np.exp(-log_tau)
    s0, s1 = _geometric_tails(a, i_star)
    residual = n / a**3 * (s1 - a * s0)
    return 0.5 * (float(np.sum(data)) - float(np.sum(free)) - residual)


def fit(y: ObservedSequence, cfg: MmleConfig = DEFAULT_CONFIG) -> MmleFit:
    upper = cfg.upper(y.n)
    best = maximize_on_log_grid(
        lambda a: _loglik(y, a, cfg.truncation_margin),
        1.0,
        upper,
        cfg.grid_size,
        cfg.refine_tol,
        name="a",
    )
    if best.boundary != Boundary.INTERIOR:
        logger.debug("MMLE at %s of [1, %.4g] for n=%g", best.boundary, upper, y.n)
    return MmleFit(
        a_hat=best.argmax,
        a_tilde=math.log(y.n) * best.argmax,
        loglik_at_hat=best.maximum,
        boundary_flag=best.boundary,
        n=y.n,
        a_max=upper,
    )


def log_marginal_likelihood_poly(y: ObservedSequence, alpha: float) -> float:
    """Marginal likelihood under prior variances i^(-1-2α), over the observed coordinates."""
    if not alpha > 0:
        raise InvalidArgumentError(f"alpha must be positive, got {alpha}", alpha)
    n = y.n
    i = np.arange(1, y.N + 1, dtype=float)
    log_prior = (1 + 2 * alpha) * np.log(i)
    free = np.logaddexp(0.0, math.log(n) - log_prior)
    data = n**2 * y.y**2 * np.exp(-np.logaddexp(log_prior, math.log(n)))
    return -0.5 * float(np.sum(free - data))


def fit_polynomial(y: ObservedSequence, cfg: MmleConfig = DEFAULT_CONFIG) -> PolynomialFit:
    lo, hi = cfg.alpha_bounds
    grid = np.linspace(lo, hi, cfg.grid_size)
    values = np.array([log_marginal_likelihood_poly(y, float(x)) for x in grid])
    j = int(np.argmax(values))
    boundary = Boundary.INTERIOR
    if j == 0:
        boundary = Boundary.AT_LOWER
    elif j == grid.size - 1:
        boundary = Boundary.AT_UPPER

    left, right = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]
    res = golden_section_max(
        lambda x: log_marginal_likelihood_poly(y, x), left, right, tol=cfg.refine_tol
    )
    if res.maximum >= values[j]:
        return PolynomialFit(res.argmax, res.maximum, boundary)
    return PolynomialFit(float(grid[j]), float(values[j]), boundary)


def _score_terms(
    a: float, truth: SequenceSignal, n: float, margin: float
) -> tuple[np.ndarray, np.ndarray]:
    if not (1.0 <= a < n):
        raise DomainError("a", a, 1.0, n)
    length = max(cutoff(a, n, margin), truth.N) if truth.tail.materialised else truth.N
    i = np.arange(1, length + 1, dtype=float)
    log_tau = np.logaddexp(math.log(a) + i / a, math.log(n))
    f_sq = truth.coefficients(length) ** 2
    base = n**2 * f_sq * np.exp(i / a - 2 * log_tau) / a
    return i, base


def h_fn(
    a: float, truth: SequenceSignal, n: float, margin: float = DEFAULT_CONFIG.truncation_margin
) -> float:
    """h_n(a) = log⁻²(n/a)·Σ n²·i·e^(i/a)·f_i²/(a·(a·e^(i/a) + n)²)."""
    i, base = _score_terms(a, truth, n, margin)
    return float(np.sum(i * base)) / math.log(n / a) ** 2


def g_fn(
    a: float, truth: SequenceSignal, n: float, margin: float = DEFAULT_CONFIG.truncation_margin
) -> float:
    """As h_n with weight (i - a), summed from i = ⌈2a⌉."""
    i, base = _score_terms(a, truth, n, margin)
    keep = i >= math.ceil(2 * a)
    return float(np.sum(((i - a) * base)[keep])) / math.log(n / a) ** 2


def _last_crossing(
    phi, threshold: float, lo: float, hi: float, scan_size: int, rel_tol: float
) -> tuple[float, bool]:
    """sup{a ∈ [lo, hi]: phi(a) >= threshold}, or (lo, True) when the set is empty."""
    grid = np.geomspace(lo, hi, scan_size)
    hits = np.flatnonzero([phi(float(a)) >= threshold for a in grid])
    if hits.size == 0:
        return lo, True
    j = int(hits[-1])
    if j == grid.size - 1:
        return hi, False
    good, bad = float(grid[j]), float(grid[j + 1])
    while bad / good - 1 > rel_tol:
        mid = math.sqrt(good * bad)
        if phi(mid) >= threshold:
            good = mid
        else:
            bad = mid
    return good, False


def deterministic_bounds(
    truth: SequenceSignal,
    n: float,
    cfg: BoundsConfig = BoundsConfig(),
    mmle_cfg: MmleConfig = DEFAULT_CONFIG,
) -> DeterministicBounds:
    upper = mmle_cfg.upper(n)
    margin = mmle_cfg.truncation_margin
    a_lower, lower_empty = _last_crossing(
        lambda a: g_fn(a, truth, n, margin),
        cfg.B * math.log(n),
        1.0,
        upper,
        cfg.scan_size,
        cfg.rel_tol,
    )
    a_upper, upper_empty = _last_crossing(
        lambda a: h_fn(a, truth, n, margin),
        cfg.b,
        min(cfg.K0, upper),
        upper,
        cfg.scan_size,
        cfg.rel_tol,
    )
    logger.debug("Bounds at n=%g: [%.4g, %.4g]", n, a_lower, a_upper)
    return DeterministicBounds(a_lower, a_upper, lower_empty, upper_empty)


def a_upper_rate(n: float, beta: float) -> float:
    """Reference scaling n^(1/(1+2β))·(log n)^(-1-1/(1+2β)) of the upper bound."""
    e = 1 / (1 + 2 * beta)
    return n**e * math.log(n) ** (-1 - e)


def lemma_h2_ratio(a: float, n: float, r: int, l: int, margin: float = 40.0) -> float:
    """
    Σ e^(ir/a)/(a·e^(i/a) + n)^l divided by n^(r-l)·a^(1-r)·log(n/a).
    """
    if not (1.0 <= a < n):
        raise DomainError("a", a, 1.0, n)
    length = cutoff(a, n, margin)
    i = np.arange(1, length + 1, dtype=float)
    log_tau = np.logaddexp(math.log(a) + i / a, math.log(n))
    total = float(np.sum(np.exp(r * i / a - l * log_tau)))
    if r < l:
        # remaining terms ≈ a^(-l)·e^(-(l-r)i/a), geometric
        q = -(l - r) / a
        total += a ** (-l) * math.exp(q * (length + 1)) / -math.expm1(q)
    return total / (n ** (r - l) * a ** (1 - r) * math.log(n / a))

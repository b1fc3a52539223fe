"""
Exact class-membership checks.

Each class is defined by a supremum, infimum or series over all indices. The
stored coefficients are scanned directly and the infinite remainder is settled
from the tail descriptor in closed form; a failing check reports the first
index (or block start, for polished tails) where the defining inequality breaks.
"""

import math
from typing import Callable

import numpy as np

from gpcover.errors import UnsupportedCheckError
from gpcover.signals.types import (
    FunctionClassSpec,
    MembershipResult,
    SequenceSignal,
    TailKind,
)

SCAN_CHUNK = 100_000
SCAN_CAP = 10_000_000
RATIO_TOL = 1e-12


def check_membership(f: SequenceSignal, spec: FunctionClassSpec) -> MembershipResult:
    match spec.kind:
        case "hyperrectangle":
            return _upper_envelope(f, spec.beta, spec.M)
        case "selfsimilar":
            upper = _upper_envelope(f, spec.beta, spec.M)
            lower = _lower_envelope(f, spec.beta, spec.m)
            failed = [r.witness for r in (upper, lower) if not r.member]
            if failed:
                return MembershipResult(False, min(failed))
            return MembershipResult(True)
        case "analytic":
            return _analytic(f, spec.gamma, spec.M)
        case "polishedtail":
            return _polished_tail(f, spec.L0, spec.N0, spec.rho)
    raise UnsupportedCheckError(spec.kind, "unknown class")


def _first_true(pred: Callable[[int], bool], start: int, kind: str) -> int:
    """Smallest i >= start with pred(i), for a predicate that stays true once true."""
    if pred(start):
        return start
    lo, step = start, 1
    while not pred(start + step):
        lo = start + step
        step *= 2
        if step > 2**62:
            raise UnsupportedCheckError(kind, "no violating index within the integer range")
    hi = start + step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _weighted(f: SequenceSignal, beta: float) -> np.ndarray:
    i = np.arange(1, f.N + 1, dtype=float)
    return i ** (1 + 2 * beta) * f.coeffs**2


def _log_weighted_tail(f: SequenceSignal, beta: float) -> Callable[[int], float]:
    def log_g(i: int) -> float:
        return (1 + 2 * beta) * math.log(i) + float(f.tail.log_square(np.array(i)))

    return log_g


def _upper_envelope(f: SequenceSignal, beta: float, M: float) -> MembershipResult:
    bad = np.flatnonzero(_weighted(f, beta) > M * (1 + RATIO_TOL))
    if bad.size:
        return MembershipResult(False, int(bad[0]) + 1)

    tail, N = f.tail, f.N
    if tail.kind == TailKind.ZERO:
        return MembershipResult(True)

    log_g = _log_weighted_tail(f, beta)
    log_M = math.log(M) + RATIO_TOL
    witness = None
    if tail.kind == TailKind.POWER:
        d = 2 * (beta - tail.rate)
        if d > 0:
            witness = _first_true(lambda i: log_g(i) > log_M, N + 1, "hyperrectangle")
        elif log_g(N + 1) > log_M:
            witness = N + 1
    else:
        i_star = (1 + 2 * beta) / (2 * tail.rate)
        peaks = [N + 1] + [i for i in (math.floor(i_star), math.ceil(i_star)) if i > N]
        peak = max(peaks, key=log_g)
        if log_g(peak) > log_M:
            i = np.arange(N + 1, peak + 1)
            values = (1 + 2 * beta) * np.log(i) + tail.log_square(i)
            witness = int(i[np.flatnonzero(values > log_M)[0]])

    if witness is None:
        return MembershipResult(True)
    if tail.envelope:
        raise UnsupportedCheckError("hyperrectangle", "the tail is only an energy envelope")
    return MembershipResult(False, witness)


def _lower_envelope(f: SequenceSignal, beta: float, m: float) -> MembershipResult:
    bad = np.flatnonzero(_weighted(f, beta) < m * (1 - RATIO_TOL))
    if bad.size:
        return MembershipResult(False, int(bad[0]) + 1)

    tail, N = f.tail, f.N
    if tail.kind == TailKind.ZERO:
        return MembershipResult(False, N + 1)
    if tail.envelope:
        raise UnsupportedCheckError("selfsimilar", "an energy envelope gives no lower bound")

    log_g = _log_weighted_tail(f, beta)
    log_m = math.log(m) - RATIO_TOL
    if tail.kind == TailKind.POWER:
        d = 2 * (beta - tail.rate)
        if d < 0:
            return MembershipResult(
                False, _first_true(lambda i: log_g(i) < log_m, N + 1, "selfsimilar")
            )
        if log_g(N + 1) < log_m:
            return MembershipResult(False, N + 1)
        return MembershipResult(True)

    # exponential decay always beats the polynomial weight
    i_star = max(N + 1, math.ceil((1 + 2 * beta) / (2 * tail.rate)))
    i = np.arange(N + 1, i_star + 1)
    values = (1 + 2 * beta) * np.log(i) + tail.log_square(i)
    bad = np.flatnonzero(values < log_m)
    if bad.size:
        return MembershipResult(False, int(i[bad[0]]))
    return MembershipResult(
        False, _first_true(lambda k: log_g(k) < log_m, i_star, "selfsimilar")
    )


def _analytic(f: SequenceSignal, gamma: float, M: float) -> MembershipResult:
    i = np.arange(1, f.N + 1, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        terms = np.exp(2 * np.log(np.abs(f.coeffs)) + 2 * gamma * i)
    partial = np.cumsum(terms)
    bad = np.flatnonzero(partial > M)
    if bad.size:
        return MembershipResult(False, int(bad[0]) + 1)

    tail, N, S = f.tail, f.N, float(partial[-1])
    if tail.kind == TailKind.ZERO:
        return MembershipResult(True)
    if tail.envelope:
        raise UnsupportedCheckError("analytic", "an energy envelope does not bound weighted sums")

    if tail.kind == TailKind.EXP:
        delta = tail.rate - gamma

        def tail_sum(k: int) -> float:
            if delta == 0:
                return tail.c * (k - N)
            with np.errstate(over="ignore"):
                return float(
                    tail.c
                    * np.exp(-2 * delta * (N + 1))
                    * np.expm1(-2 * delta * (k - N))
                    / np.expm1(-2 * delta)
                )

        if delta > 0:
            total = S + tail.c * math.exp(-2 * delta * (N + 1)) / -math.expm1(-2 * delta)
            if total <= M:
                return MembershipResult(True)
        return MembershipResult(
            False, _first_true(lambda k: S + tail_sum(k) > M, N + 1, "analytic")
        )

    # power tails diverge against an exponential weight: find where they cross M
    start = N + 1
    while start <= SCAN_CAP:
        k = np.arange(start, start + SCAN_CHUNK, dtype=float)
        with np.errstate(over="ignore"):
            chunk = S + np.cumsum(np.exp(tail.log_square(k) + 2 * gamma * k))
        bad = np.flatnonzero(chunk > M)
        if bad.size:
            return MembershipResult(False, int(k[bad[0]]))
        S = float(chunk[-1])
        start += SCAN_CHUNK
    raise UnsupportedCheckError("analytic", f"partial sums stay below M up to i={SCAN_CAP}")


def _polished_violations(
    f: SequenceSignal, blocks: np.ndarray, L0: float, rho: float
) -> np.ndarray:
    ends = np.floor(rho * blocks).astype(np.int64)
    lhs = f.energy_after(blocks - 1)
    block = lhs - f.energy_after(ends)
    return np.flatnonzero(lhs > L0 * block * (1 + RATIO_TOL))


def _polished_tail(f: SequenceSignal, L0: float, N0: int, rho: float) -> MembershipResult:
    N = f.N
    if N0 <= N:
        blocks = np.arange(N0, N + 1)
        bad = _polished_violations(f, blocks, L0, rho)
        if bad.size:
            return MembershipResult(False, int(blocks[bad[0]]))

    tail = f.tail
    start = max(N0, N + 1)
    if tail.kind == TailKind.ZERO:
        return MembershipResult(True)

    if tail.kind == TailKind.EXP:
        # the tail/block ratio 1/(1 - q^len) is non-increasing in the block start
        length = math.floor(rho * start) - start + 1
        ratio = 1.0 / -math.expm1(-2 * tail.rate * length)
        if ratio > L0 * (1 + RATIO_TOL):
            return MembershipResult(False, start)
        return MembershipResult(True)

    s = 1 + 2 * tail.rate
    # beyond n_b the integral bound ((s-1)/n + 1)/(1 - ρ^(1-s)) <= L0 certifies the rest
    excess = L0 * (1 - rho ** (1 - s)) - 1
    stop = max(start, math.ceil((s - 1) / excess)) if excess > 0 else None
    lo = start
    while stop is None or lo < stop:
        if lo - start > SCAN_CAP:
            raise UnsupportedCheckError(
                "polishedtail", f"no certificate or violation up to N={lo}"
            )
        hi = lo + SCAN_CHUNK if stop is None else min(lo + SCAN_CHUNK, stop)
        blocks = np.arange(lo, hi)
        bad = _polished_violations(f, blocks, L0, rho)
        if bad.size:
            return MembershipResult(False, int(blocks[bad[0]]))
        lo = hi
    return MembershipResult(True)

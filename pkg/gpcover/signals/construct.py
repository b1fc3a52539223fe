import numpy as np

from gpcover.errors import InvalidArgumentError
from gpcover.signals.types import SequenceSignal, Tail, TailKind

DEFAULT_N = 2000

# |i^{-3/2}·sin(i)|² ≤ i^{-3}: the trigonometric truths share this power envelope
TRIG_ENVELOPE = Tail(TailKind.POWER, c=1.0, rate=1.0, envelope=True)


def _check_size(N: int) -> None:
    if N < 1:
        raise InvalidArgumentError(f"N must be >= 1, got {N}", N)


def _check_positive(**params: float) -> None:
    for name, value in params.items():
        if not value > 0 or not np.isfinite(value):
            raise InvalidArgumentError(f"{name} must be positive and finite, got {value}", value)


def make_f1(N: int = DEFAULT_N) -> SequenceSignal:
    _check_size(N)
    i = np.arange(1, N + 1, dtype=float)
    return SequenceSignal(i**-1.5 * np.sin(i), TRIG_ENVELOPE, "f1")


def make_f2(N: int = DEFAULT_N) -> SequenceSignal:
    _check_size(N)
    i = np.arange(1, N + 1, dtype=float)
    return SequenceSignal(i**-1.5 * np.cos(i), TRIG_ENVELOPE, "f2")


def make_selfsimilar(beta: float, c: float = 1.0, N: int = DEFAULT_N) -> SequenceSignal:
    _check_size(N)
    _check_positive(beta=beta, c=c)
    i = np.arange(1, N + 1, dtype=float)
    coeffs = np.sqrt(c) * i ** (-(1 + 2 * beta) / 2)
    return SequenceSignal(
        coeffs, Tail(TailKind.POWER, c=c, rate=beta), f"selfsimilar(beta={beta:g}, c={c:g})"
    )


def make_analytic(gamma: float, c: float = 1.0, N: int = DEFAULT_N) -> SequenceSignal:
    _check_size(N)
    _check_positive(gamma=gamma, c=c)
    i = np.arange(1, N + 1, dtype=float)
    coeffs = np.sqrt(c) * np.exp(-gamma * i)
    return SequenceSignal(
        coeffs, Tail(TailKind.EXP, c=c, rate=gamma), f"analytic(gamma={gamma:g}, c={c:g})"
    )


def make_zero(N: int = 1) -> SequenceSignal:
    _check_size(N)
    return SequenceSignal(np.zeros(N), Tail(), "zero")

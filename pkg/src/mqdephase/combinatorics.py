"""Counting coherences and spin-pair configurations.

A density-matrix element of an n-spin-1/2 cluster connects two Zeeman product
states; its coherence order M is the difference of their total magnetic
quantum numbers and f is the Hamming distance between them (f and M share
parity, M <= f <= n).  Exact counts are plain Python integers so they stay
exact up to the largest cluster sizes of interest (2n ~ 1300); the Gaussian
large-n estimates are kept in log domain to avoid overflow.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "AsymptoticCount",
    "coherence_count",
    "coherence_count_asymptotic",
    "config_count",
    "config_count_asymptotic",
    "hamming_range",
]

_LOG10_E = math.log10(math.e)


@dataclass(frozen=True)
class AsymptoticCount:
    """A large count represented by its natural logarithm.

    ``value`` materializes the float (``inf`` on overflow); ``mantissa`` and
    ``exponent`` give the decimal scientific form value = mantissa * 10**exponent.
    """

    log: float

    @property
    def log10(self) -> float:
        return self.log * _LOG10_E

    @property
    def exponent(self) -> int:
        return int(math.floor(self.log10))

    @property
    def mantissa(self) -> float:
        return 10.0 ** (self.log10 - self.exponent)

    @property
    def value(self) -> float:
        try:
            return math.exp(self.log)
        except OverflowError:
            return math.inf

    def __float__(self) -> float:
        return self.value


def _check_n(n: int) -> int:
    n = int(n)
    if n < 1:
        raise DomainError(f"spin count n must be >= 1, got {n}")
    return n


def coherence_count(n: int, order: int) -> int:
    """Exact number of density-matrix elements of coherence order M: C(2n, n+M)."""
    n = _check_n(n)
    order = int(order)
    if abs(order) > n:
        raise DomainError(f"|M|={abs(order)} exceeds n={n}")
    return math.comb(2 * n, n + order)


def coherence_count_asymptotic(n: int, order: int) -> AsymptoticCount:
    """Gaussian large-n estimate 2^(2n) exp(-M^2/n) / sqrt(pi n)."""
    n = _check_n(n)
    order = int(order)
    log = 2 * n * math.log(2.0) - order * order / n - 0.5 * math.log(math.pi * n)
    return AsymptoticCount(log)


def hamming_range(n: int, order: int) -> range:
    """Valid Hamming distances for order M: |M| <= f <= n with f = M (mod 2)."""
    n = _check_n(n)
    m = abs(int(order))
    if m > n:
        raise DomainError(f"|M|={m} exceeds n={n}")
    return range(m, n + 1, 2)


def config_count(n: int, order: int, f: int) -> int:
    """Exact number of state pairs at order M and Hamming distance f.

    Counts 2^(n-f) C(n,f) C(f,(f+M)/2): choose the f flipped positions, the
    signs on them compatible with M, and free signs on the agreeing positions.
    """
    n = _check_n(n)
    order = int(order)
    f = int(f)
    m = abs(order)
    if m > n:
        raise DomainError(f"|M|={m} exceeds n={n}")
    if f < m or f > n:
        raise DomainError(f"Hamming distance f={f} outside [|M|, n] = [{m}, {n}]")
    if (f - m) % 2 != 0:
        raise DomainError(f"f={f} and M={order} must have the same parity")
    return (1 << (n - f)) * math.comb(n, f) * math.comb(f, (f + m) // 2)


def config_count_asymptotic(n: int, order: int, f: int) -> AsymptoticCount:
    """Gaussian large-n estimate of ``config_count``.

    2^(2n+1)/(pi sqrt(n f)) * exp(-(f - n/2)^2/(n/2)) * exp(-M^2/(2f)).
    Valid for n >> 1 and f >= 1; normalized so that summing over the
    parity-constrained f grid recovers ``coherence_count_asymptotic``.
    """
    n = _check_n(n)
    order = int(order)
    f = int(f)
    if f < 1 or f > n:
        raise DomainError(f"f={f} outside [1, n] for the Gaussian estimate")
    log = (
        (2 * n + 1) * math.log(2.0)
        - math.log(math.pi)
        - 0.5 * math.log(n * f)
        - (f - n / 2.0) ** 2 / (n / 2.0)
        - order * order / (2.0 * f)
    )
    return AsymptoticCount(log)

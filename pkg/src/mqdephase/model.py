"""Closed-form decay laws for multiple-quantum coherences.

A cluster of n spins with quadratic decay coefficient alpha (s^-2, equal to
one ninth of the Van Vleck second moment) dephases like a two-component bath:
a fully correlated part of weight p decaying as exp(-M^2 alpha t^2) and a
fully uncorrelated part of weight 1-p decaying as exp(-(n/2) alpha t^2).
The forms are trustworthy up to roughly the 1/e decay time.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .validation import check_nonnegative, check_probability

__all__ = [
    "ModelParams",
    "s_m_uncorrelated",
    "s_m_correlated",
    "s_m_short_time",
    "s_m_composite",
    "s_total",
    "gate_error",
]


@dataclass(frozen=True)
class ModelParams:
    """Cluster size n, degree of correlation p, quadratic coefficient alpha (s^-2)."""

    n: int
    p: float
    alpha: float

    def __post_init__(self):
        if int(self.n) < 1:
            raise DomainError(f"n must be >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "p", check_probability(self.p))
        object.__setattr__(self, "alpha", check_nonnegative(self.alpha, "alpha"))

    @classmethod
    def from_second_moment(cls, n: int, p: float, m2: float) -> "ModelParams":
        return cls(n=n, p=p, alpha=float(m2) / 9.0)

    @property
    def m2(self) -> float:
        return 9.0 * self.alpha


def _times(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be nonnegative")
    return t


def s_m_uncorrelated(n: int, alpha: float, t):
    """Uncorrelated-bath decay exp(-(n/2) alpha t^2); independent of order M."""
    t = _times(t)
    return np.exp(-0.5 * n * alpha * t**2)


def s_m_correlated(order: int, alpha: float, t):
    """Correlated-bath decay exp(-M^2 alpha t^2)."""
    t = _times(t)
    return np.exp(-(order**2) * alpha * t**2)


def s_m_composite(params: ModelParams, order: int, t):
    """Composite decay p exp(-M^2 alpha t^2) + (1-p) exp(-(n/2) alpha t^2)."""
    t = _times(t)
    return params.p * np.exp(-(order**2) * params.alpha * t**2) + (
        1.0 - params.p
    ) * np.exp(-0.5 * params.n * params.alpha * t**2)


def s_m_short_time(params: ModelParams, order: int, t):
    """Quadratic truncation 1 - [p M^2 + (1-p) n/2] alpha t^2 of the composite law.

    Matches ``s_m_composite`` through second order in t; valid for
    n alpha t^2 << 1.
    """
    t = _times(t)
    coeff = params.p * order**2 + (1.0 - params.p) * 0.5 * params.n
    return 1.0 - coeff * params.alpha * t**2


def s_total(params: ModelParams, t):
    """Total signal over all orders: p/sqrt(n alpha t^2 + 1) + (1-p) exp(-(n/2) alpha t^2).

    Follows from integrating the composite law against the Gaussian density of
    coherence orders, exp(-M^2/n)/sqrt(pi n).
    """
    t = _times(t)
    nat2 = params.n * params.alpha * t**2
    return params.p / np.sqrt(nat2 + 1.0) + (1.0 - params.p) * np.exp(-0.5 * nat2)


def gate_error(params: ModelParams, t_g):
    """Signal lost after a gate of duration t_g: 1 - S(t_g).

    For n alpha t_g^2 << 1 this is ~ (n/2) alpha t_g^2 regardless of p, so the
    error grows linearly with cluster size.
    """
    return 1.0 - s_total(params, t_g)

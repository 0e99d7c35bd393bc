"""Decoherence rates: inverse 1/e decay times of signal functions."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NoCrossingError, NonMonotoneError
from .model import ModelParams, s_m_composite, s_total

__all__ = ["RateCurve", "ScalingCurve", "decay_rate", "rate_curve", "scaling_curve", "scaling_exponent"]

_TARGET = float(np.exp(-1.0))
_MAX_DOUBLINGS = 200
_REL_TOL = 1e-10
# Slack for detecting a genuine increase while bracketing, vs. rounding noise.
_MONOTONE_EPS = 1e-12


@dataclass(frozen=True)
class RateCurve:
    """Decay rates versus coherence order; NaN rates are flagged in ``no_crossing``."""

    M_values: np.ndarray
    rates: np.ndarray
    no_crossing: np.ndarray
    params: ModelParams


@dataclass(frozen=True)
class ScalingCurve:
    """Decay rate versus cluster size with the fitted log-log slope."""

    n_values: np.ndarray
    rates: np.ndarray
    exponent: float


def decay_rate(signal: Callable[[float], float], t_max_hint: float) -> float:
    """Rate 1/t* where signal(t*) = 1/e, for a normalized nonincreasing signal.

    Brackets the crossing by doubling (or halving) from ``t_max_hint``, then
    bisects to relative tolerance 1e-10.  Raises ``NoCrossingError`` when the
    signal stays above 1/e out to ~2^200 times the hint (a bounded tail), and
    ``NonMonotoneError`` if bracketing sees the signal increase.
    """
    if not t_max_hint > 0:
        raise DomainError(f"t_max_hint must be positive, got {t_max_hint}")
    f0 = float(signal(0.0))
    if abs(f0 - 1.0) > 1e-9:
        raise DomainError(f"signal(0) must be 1, got {f0!r}")

    hi = float(t_max_hint)
    f_hi = float(signal(hi))
    if f_hi > _TARGET:
        # Expand rightward until the signal falls through 1/e.
        lo, f_lo = hi, f_hi
        for _ in range(_MAX_DOUBLINGS):
            lo, f_lo = hi, f_hi
            hi = 2.0 * hi
            f_hi = float(signal(hi))
            if f_hi > f_lo + _MONOTONE_EPS:
                raise NonMonotoneError(f"signal increased near t={hi!r}")
            if f_hi <= _TARGET:
                break
        else:
            raise NoCrossingError("signal stays above 1/e; no decay rate")
    else:
        # Shrink leftward until the signal rises above 1/e.
        lo, f_lo = hi, f_hi
        for _ in range(_MAX_DOUBLINGS):
            hi = lo
            lo = 0.5 * lo
            f_new = float(signal(lo))
            if f_new < f_lo - _MONOTONE_EPS:
                raise NonMonotoneError(f"signal increased near t={hi!r}")
            f_lo = f_new
            if f_lo > _TARGET:
                break
        else:
            # Crossing is at t below any resolvable scale.
            raise DomainError("signal is already below 1/e at vanishing times")

    while hi - lo > _REL_TOL * hi:
        mid = 0.5 * (lo + hi)
        if float(signal(mid)) <= _TARGET:
            hi = mid
        else:
            lo = mid
    return 2.0 / (lo + hi)


def _composite_hint(params: ModelParams, order: int) -> float:
    c = params.p * order**2 * params.alpha + (1.0 - params.p) * 0.5 * params.n * params.alpha
    return 1.0 / np.sqrt(c) if c > 0 else 1.0


def rate_curve(params: ModelParams, M_values: Sequence[int]) -> RateCurve:
    """Composite-law decay rate for each coherence order in ``M_values``."""
    m_arr = np.asarray(list(M_values), dtype=int)
    if np.any(np.abs(m_arr) > params.n):
        raise DomainError("coherence orders must satisfy |M| <= n")
    rates = np.empty(m_arr.size)
    flags = np.zeros(m_arr.size, dtype=bool)
    for i, m in enumerate(m_arr):
        try:
            rates[i] = decay_rate(
                lambda t, m=m: s_m_composite(params, m, t), _composite_hint(params, m)
            )
        except NoCrossingError:
            rates[i] = np.nan
            flags[i] = True
    return RateCurve(M_values=m_arr, rates=rates, no_crossing=flags, params=params)


def scaling_curve(params_list: Sequence[ModelParams], order: int | None = None) -> ScalingCurve:
    """Decay rate versus cluster size n, with the fitted log-log slope.

    Rates come from the total signal, or from the order-``order`` composite
    signal when ``order`` is given.  All entries must share p and alpha and
    provide at least three distinct n; sizes whose signal never crosses 1/e
    are excluded with a warning.
    """
    params_list = list(params_list)
    if len({pr.n for pr in params_list}) < 3:
        raise DomainError("need at least 3 distinct cluster sizes")
    p0, a0 = params_list[0].p, params_list[0].alpha
    for pr in params_list[1:]:
        if pr.p != p0 or pr.alpha != a0:
            raise DomainError("all entries must share p and alpha")

    ns, rates = [], []
    for pr in params_list:
        if order is None:
            sig = lambda t, pr=pr: s_total(pr, t)
            hint = 1.0 / np.sqrt(pr.n * pr.alpha / 2.0) if pr.alpha > 0 else 1.0
        else:
            sig = lambda t, pr=pr: s_m_composite(pr, order, t)
            hint = _composite_hint(pr, order)
        try:
            rates.append(decay_rate(sig, hint))
            ns.append(pr.n)
        except NoCrossingError:
            warnings.warn(f"no 1/e crossing for n={pr.n}; excluded from scaling fit")
    if len(ns) < 3:
        raise DomainError("fewer than 3 sizes contribute a crossing")
    n_arr = np.asarray(ns, dtype=float)
    rate_arr = np.asarray(rates)
    slope, _ = np.polyfit(np.log(n_arr), np.log(rate_arr), 1)
    return ScalingCurve(n_values=np.asarray(ns, dtype=int), rates=rate_arr, exponent=float(slope))


def scaling_exponent(params_list: Sequence[ModelParams], order: int | None = None) -> float:
    """Log-log slope of decay rate versus cluster size n (see ``scaling_curve``)."""
    return scaling_curve(params_list, order=order).exponent

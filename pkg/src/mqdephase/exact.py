"""Exact decay signals for small clusters, by configuration enumeration.

Under the secular dipolar dephasing Hamiltonian every density-matrix element
between Zeeman product states |a> and |b> acquires a pure phase

    Phi_ab = sum_{j in E, k in N} b_jk a_j a_k,

where N is the set of positions where the states differ (|N| = Hamming
distance f) and E its complement.  The normalized order-M signal is the mean
of cos(t Phi_ab) over all C(2n, n+M) such pairs.  Enumeration walks the
flipped subset N and the sign pattern on it (constrained to sum to M); the
free signs on E are summed in closed form,

    sum_{a_E} cos(t Phi) = 2^|E| * prod_{j in E} cos(t w_j),
    w_j = sum_{k in N} b_jk a_k,

which is an exact regrouping, not an approximation.  Work is partitioned into
fixed-size blocks of flipped subsets and reduced in block order, so results
are bit-identical for any worker count.
"""
from __future__ import annotations

import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .combinatorics import coherence_count, config_count, hamming_range
from .couplings import CouplingSet
from .errors import DomainError, InsufficientSamplesError, ResourceLimitError
from .series import DecaySeries
from .validation import check_nonnegative, check_time_grid

__all__ = [
    "DEFAULT_SIZE_CAP",
    "BathVariant",
    "BathModel",
    "dipolar_signal",
    "total_signal",
    "bath_signal",
    "quadratic_coefficient",
]

DEFAULT_SIZE_CAP = 14
_SUBSET_CHUNK = 256
# Bound on T * |E| * n_assign elements held at once while evaluating a block.
_TIME_CHUNK_ELEMENTS = 2_000_000


class BathVariant(enum.Enum):
    UNCORRELATED = "uncorrelated"
    CORRELATED = "correlated"


@dataclass(frozen=True)
class BathModel:
    """External bath with single-spin decay function Gamma(t) = gamma_alpha * t^2."""

    variant: BathVariant
    gamma_alpha: float

    def __post_init__(self):
        object.__setattr__(
            self, "gamma_alpha", check_nonnegative(self.gamma_alpha, "gamma_alpha")
        )


def _sign_patterns(f: int, order: int) -> np.ndarray:
    """All +-1 rows of length f summing to ``order``; shape (C(f,(f+order)/2), f)."""
    ups = (f + order) // 2
    rows = np.full((math.comb(f, ups), f), -1.0)
    for i, pos in enumerate(itertools.combinations(range(f), ups)):
        rows[i, list(pos)] = 1.0
    return rows


def _iter_blocks(n: int, order: int):
    """Yield (f, sign_patterns, subset_chunk) blocks in a fixed order."""
    for f in hamming_range(n, order):
        signs = _sign_patterns(f, order)
        subsets = itertools.combinations(range(n), f)
        while True:
            chunk = list(itertools.islice(subsets, _SUBSET_CHUNK))
            if not chunk:
                break
            yield f, signs, chunk


def _block_cosine_sum(b: np.ndarray, times: np.ndarray, f, signs, chunk) -> np.ndarray:
    n = b.shape[0]
    acc = np.zeros(times.size)
    mask = np.ones(n, dtype=bool)
    for subset in chunk:
        nset = np.asarray(subset, dtype=np.intp)
        mask[:] = True
        mask[nset] = False
        eset = np.flatnonzero(mask)
        w = b[np.ix_(eset, nset)] @ signs.T  # (|E|, n_assign)
        scale = float(2 ** eset.size)
        step = max(1, _TIME_CHUNK_ELEMENTS // (w.size + 1))
        for start in range(0, times.size, step):
            t = times[start : start + step]
            prod = np.cos(t[:, None, None] * w[None, :, :]).prod(axis=1)
            acc[start : start + step] += scale * prod.sum(axis=1)
    return acc


def dipolar_signal(
    couplings: CouplingSet,
    order: int,
    times,
    *,
    size_cap: int = DEFAULT_SIZE_CAP,
    workers: int | None = None,
) -> DecaySeries:
    """Exact order-M signal S_M(t) of the dipolar dephasing dynamics.

    Averages cos(t Phi_ab) over every configuration pair of coherence order M,
    i.e. over coherence_count(n, M) terms.  Enumeration cost grows roughly as
    3^n; ``size_cap`` guards against accidental large requests.
    """
    n = couplings.n
    if n > size_cap:
        raise ResourceLimitError(f"n={n} exceeds enumeration cap {size_cap}")
    order = int(order)
    if abs(order) > n:
        raise DomainError(f"|M|={abs(order)} exceeds n={n}")
    times = check_time_grid(times)
    m = abs(order)  # S_M = S_{-M}: configurations map onto each other under global flip

    blocks = list(_iter_blocks(n, m))
    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(
                pool.map(
                    lambda blk: _block_cosine_sum(couplings.b, times, *blk), blocks
                )
            )
    else:
        partials = [_block_cosine_sum(couplings.b, times, *blk) for blk in blocks]

    total = np.zeros(times.size)
    for part in partials:  # fixed reduction order
        total += part
    values = total / float(coherence_count(n, m))
    return DecaySeries(times, values, label=f"exact dipolar n={n} M={order}")


def total_signal(
    couplings: CouplingSet,
    times,
    *,
    size_cap: int = DEFAULT_SIZE_CAP,
    workers: int | None = None,
) -> DecaySeries:
    """Exact total signal: even orders weighted by their multiplicities.

    S(t) = sum_{M even} N_M S_M(t) / sum_{M even} N_M with N_M = C(2n, n+M),
    the equal-excitation weighting of all even coherence orders.
    """
    n = couplings.n
    times = check_time_grid(times)
    num = np.zeros(times.size)
    den = 0
    for m in range(0, n + 1, 2):
        weight = coherence_count(n, m) * (1 if m == 0 else 2)
        s_m = dipolar_signal(couplings, m, times, size_cap=size_cap, workers=workers)
        num += weight * s_m.values
        den += weight
    return DecaySeries(times, num / float(den), label=f"exact dipolar total n={n}")


def bath_signal(n: int, order: int, bath: BathModel, times) -> DecaySeries:
    """Order-M signal for an external bath acting on n spins.

    Correlated: every spin sees the same bath and S_M(t) = exp(-M^2 Gamma(t)).
    Uncorrelated: independent baths give exp(-f Gamma(t)) per element at
    Hamming distance f; the exact finite-n signal is the configuration-count
    weighted average over f (no Gaussian approximation).
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    order = int(order)
    if abs(order) > n:
        raise DomainError(f"|M|={abs(order)} exceeds n={n}")
    times = check_time_grid(times)
    gamma = bath.gamma_alpha * times**2

    if bath.variant is BathVariant.CORRELATED:
        values = np.exp(-(order**2) * gamma)
        label = f"bath correlated n={n} M={order}"
    else:
        if n > 2000:
            raise ResourceLimitError(f"uncorrelated bath sum capped at n=2000, got {n}")
        m = abs(order)
        total = coherence_count(n, m)
        values = np.zeros(times.size)
        for f in hamming_range(n, m):
            weight = float(Fraction(config_count(n, m, f), total))
            values += weight * np.exp(-f * gamma)
        label = f"bath uncorrelated n={n} M={order}"
    return DecaySeries(times, values, label=label)


def quadratic_coefficient(series: DecaySeries) -> float:
    """Quadratic onset coefficient c of S(t) ~ 1 - c t^2.

    Least-squares fit over the initial window where 1 - S < 0.05; the series
    must start at t=0 with S(0)=1 and sample the window densely.  A t^4 term
    is carried in the fit (and discarded) so the reported c is not biased by
    the next order of the expansion inside the window.
    """
    t = series.times
    v = series.values
    if t[0] != 0.0 or abs(v[0] - 1.0) > 1e-12:
        raise DomainError("series must start at t=0 with S(0)=1")
    decayed = np.flatnonzero(1.0 - v >= 0.05)
    end = decayed[0] if decayed.size else t.size
    tw = t[1:end]
    vw = v[1:end]
    if tw.size < 3:
        raise InsufficientSamplesError(
            f"only {tw.size} samples inside the 5% onset window; sample more densely"
        )
    design = np.column_stack([tw**2, tw**4])
    coeffs, *_ = np.linalg.lstsq(design, 1.0 - vw, rcond=None)
    return float(coeffs[0])

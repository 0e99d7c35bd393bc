"""Independent brute-force references used as oracles by the tests.

Everything here enumerates the full configuration space directly from first
principles (all pairs of Zeeman product states, phases from the j<k pair sum)
and shares no code path with the package's enumeration engine.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def iter_state_pairs(n):
    states = list(itertools.product((1, -1), repeat=n))
    for a in states:
        for b in states:
            yield a, b


def pair_order(a, b) -> int:
    return sum(ai - bi for ai, bi in zip(a, b)) // 2


def pair_hamming(a, b) -> int:
    return sum(ai != bi for ai, bi in zip(a, b))


def pair_phase(bmat, a, b) -> float:
    n = len(a)
    return 0.5 * sum(
        bmat[j, k] * (a[j] * a[k] - b[j] * b[k])
        for j in range(n)
        for k in range(j + 1, n)
    )


def direct_signal(bmat: np.ndarray, order: int, times) -> np.ndarray:
    """Order-M signal by summing cos(t*phase) over every configuration pair."""
    n = bmat.shape[0]
    phases = [
        pair_phase(bmat, a, b)
        for a, b in iter_state_pairs(n)
        if pair_order(a, b) == order
    ]
    return np.array([sum(math.cos(t * phi) for phi in phases) / len(phases) for t in times])


def direct_total_signal(bmat: np.ndarray, times) -> np.ndarray:
    """Total signal over all even orders, equal excitation weighting."""
    n = bmat.shape[0]
    phases = [
        pair_phase(bmat, a, b)
        for a, b in iter_state_pairs(n)
        if pair_order(a, b) % 2 == 0
    ]
    return np.array([sum(math.cos(t * phi) for phi in phases) / len(phases) for t in times])


def count_pairs(n: int, order: int) -> int:
    return sum(1 for a, b in iter_state_pairs(n) if pair_order(a, b) == order)


def count_configs(n: int, order: int, f: int) -> int:
    return sum(
        1
        for a, b in iter_state_pairs(n)
        if pair_order(a, b) == order and pair_hamming(a, b) == f
    )


def constant_coupling_closed_form(n: int, b: float, order: int, times) -> np.ndarray:
    """Order-M signal for constant couplings via the spin-sum distribution.

    With all couplings equal, the phase of a pair is b*M*s where s is the sum
    of the free signs on the agreeing positions, so S_M(t) is a weighted
    average of cos(b*M*s*t) over the binomial distribution of s at each
    Hamming distance.
    """
    m = abs(order)
    total = math.comb(2 * n, n + m)
    out = np.zeros(len(times))
    for f in range(m, n + 1, 2):
        n_assign = math.comb(n, f) * math.comb(f, (f + m) // 2)
        e_size = n - f
        for k in range(e_size + 1):
            s = e_size - 2 * k
            weight = n_assign * math.comb(e_size, k)
            out += weight * np.cos(b * m * s * np.asarray(times))
    return out / total

"""Pairwise dipolar couplings of a spin cluster and their correlation scalars.

Couplings are stored as angular frequencies b_jk (rad/s): the dipolar energy
scale divided by hbar, so that b_jk * t is a phase.  The Van Vleck second
moment in these units is M2 = (9/4) <sum_j b_jk^2>_k (s^-2) and the composite
decay laws use alpha = M2 / 9.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import constants

from .errors import (
    DegenerateCouplingsError,
    DegenerateGeometryError,
    DomainError,
    UndefinedCorrelationError,
)
from .validation import as_float_array, check_symmetric_couplings, check_unit_vector

__all__ = [
    "SI",
    "GAUSSIAN",
    "SpinGeometry",
    "CouplingSet",
    "CorrelationSummary",
    "dipolar_couplings",
    "synth_constant",
    "synth_random",
    "degree_of_correlation",
    "second_moment",
    "load_geometry",
    "coupling_set_to_json",
    "coupling_set_from_json",
]

SI = "SI"
GAUSSIAN = "Gaussian"

#: Proton gyromagnetic ratio, rad s^-1 T^-1.
GAMMA_PROTON = 2.6752218744e8


@dataclass(frozen=True)
class SpinGeometry:
    """Spin positions (meters) in a static field along ``field_axis``."""

    positions: np.ndarray
    field_axis: np.ndarray
    gyromagnetic_ratio: float

    def __post_init__(self):
        pos = as_float_array(self.positions, "positions", ndim=2)
        if pos.shape[0] < 2 or pos.shape[1] != 3:
            raise DomainError("positions must be an (n, 3) array with n >= 2")
        axis = check_unit_vector(self.field_axis)
        diffs = pos[:, None, :] - pos[None, :, :]
        dist = np.linalg.norm(diffs, axis=-1)
        np.fill_diagonal(dist, np.inf)
        if np.any(dist == 0.0):
            j, k = np.argwhere(dist == 0.0)[0]
            raise DegenerateGeometryError(f"spins {j} and {k} coincide")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "field_axis", axis)
        object.__setattr__(self, "gyromagnetic_ratio", float(self.gyromagnetic_ratio))

    @property
    def n(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class CouplingSet:
    """Symmetric matrix of pairwise angular-frequency couplings (rad/s)."""

    b: np.ndarray
    units_convention: str = SI

    def __post_init__(self):
        mat = check_symmetric_couplings(self.b)
        if self.units_convention not in (SI, GAUSSIAN):
            raise DomainError(f"unknown units convention {self.units_convention!r}")
        object.__setattr__(self, "b", mat)

    @property
    def n(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class CorrelationSummary:
    """Correlation scalars of a coupling set.

    ``M2`` is the Van Vleck second moment (s^-2) and ``alpha = M2/9`` the
    quadratic decay coefficient.  ``p`` is the degree of correlation
    (per-reference-spin values in ``per_spin_p``, scalar is their mean); the
    p fields are None when only the second moment was requested.
    """

    M2: float
    alpha: float
    p: float | None = None
    per_spin_p: np.ndarray | None = None


def dipolar_couplings(geometry: SpinGeometry, units_convention: str = SI) -> CouplingSet:
    """Dipolar couplings b_jk = pref * (1 - 3 cos^2 theta_jk) / r_jk^3.

    theta_jk is the angle between the inter-spin vector and the field axis.
    The prefactor is (mu0/4pi) * hbar * gamma^2 / 2 in SI mode; Gaussian mode
    omits mu0/4pi (positions then in cm, gamma in rad s^-1 G^-1).
    """
    pos = geometry.positions
    axis = geometry.field_axis
    diffs = pos[:, None, :] - pos[None, :, :]
    r = np.linalg.norm(diffs, axis=-1)
    np.fill_diagonal(r, 1.0)  # placeholder, diagonal zeroed below
    cos_theta = (diffs @ axis) / r
    prefactor = 0.5 * constants.hbar * geometry.gyromagnetic_ratio**2
    if units_convention == SI:
        prefactor *= constants.mu_0 / (4.0 * math.pi)
    elif units_convention != GAUSSIAN:
        raise DomainError(f"unknown units convention {units_convention!r}")
    b = prefactor * (1.0 - 3.0 * cos_theta**2) / r**3
    np.fill_diagonal(b, 0.0)
    b = 0.5 * (b + b.T)  # symmetrize away rounding asymmetry in cos_theta
    return CouplingSet(b=b, units_convention=units_convention)


def synth_constant(n: int, b: float) -> CouplingSet:
    """All pairs share one coupling value; the fully correlated limit."""
    n = int(n)
    if n < 2:
        raise DomainError("n must be >= 2")
    mat = np.full((n, n), float(b))
    np.fill_diagonal(mat, 0.0)
    return CouplingSet(b=mat)


def synth_random(n: int, magnitude: float, zero_mean: bool = True, seed: int = 0) -> CouplingSet:
    """Uniform random couplings, symmetric and seed-deterministic.

    zero_mean draws from [-magnitude, magnitude] (uncorrelated limit for
    large n); otherwise from [0, magnitude].
    """
    n = int(n)
    if n < 2:
        raise DomainError("n must be >= 2")
    rng = np.random.default_rng(seed)
    low = -float(magnitude) if zero_mean else 0.0
    draws = rng.uniform(low, float(magnitude), size=(n, n))
    upper = np.triu(draws, k=1)
    return CouplingSet(b=upper + upper.T)


def _row_sums(c: CouplingSet) -> tuple[np.ndarray, np.ndarray]:
    s1 = c.b.sum(axis=1)
    s2 = (c.b**2).sum(axis=1)
    if np.all(s2 == 0.0):
        raise DegenerateCouplingsError("all couplings are zero")
    return s1, s2


def second_moment(c: CouplingSet) -> CorrelationSummary:
    """Van Vleck second moment M2 = (9/4) <sum_j b_jk^2>_k and alpha = M2/9."""
    _, s2 = _row_sums(c)
    m2 = 2.25 * float(np.mean(s2))
    return CorrelationSummary(M2=m2, alpha=m2 / 9.0)


def degree_of_correlation(c: CouplingSet) -> CorrelationSummary:
    """Degree of correlation p of the couplings, with per-reference-spin detail.

    For reference spin k, p_k = (sum_j b_jk)^2 / ((n-1) sum_j b_jk^2); the
    divisor is the number of coupled partners, which makes constant couplings
    give exactly p = 1 at every n.  The scalar p is the mean over k.  By
    Cauchy-Schwarz each p_k lies in [0, 1].
    """
    s1, s2 = _row_sums(c)
    if np.any(s2 == 0.0):
        dead = np.flatnonzero(s2 == 0.0)
        raise UndefinedCorrelationError(
            f"reference spin(s) {dead.tolist()} have no nonzero coupling; p undefined"
        )
    n = c.n
    per_spin = np.clip(s1**2 / ((n - 1) * s2), 0.0, 1.0)
    m2 = 2.25 * float(np.mean(s2))
    return CorrelationSummary(
        M2=m2, alpha=m2 / 9.0, p=float(np.mean(per_spin)), per_spin_p=per_spin
    )


def load_geometry(
    path: str | Path, field_axis=(0.0, 0.0, 1.0), gyromagnetic_ratio: float = GAMMA_PROTON
) -> SpinGeometry:
    """Read positions from a plain-text file: first line n, then n lines "x y z" (meters)."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise DomainError(f"{path}: empty geometry file")
    try:
        n = int(lines[0])
    except ValueError as exc:
        raise DomainError(f"{path}: first line must be the spin count") from exc
    if len(lines) != n + 1:
        raise DomainError(f"{path}: expected {n} coordinate lines, found {len(lines) - 1}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise DomainError(f"{path}: expected 'x y z', got {ln!r}")
        rows.append([float(v) for v in parts])
    return SpinGeometry(
        positions=np.array(rows),
        field_axis=np.asarray(field_axis, dtype=float),
        gyromagnetic_ratio=gyromagnetic_ratio,
    )


def coupling_set_to_json(c: CouplingSet) -> str:
    """Serialize as {n, row-major upper triangle, units tag}."""
    iu = np.triu_indices(c.n, k=1)
    payload = {
        "n": c.n,
        "b_upper": c.b[iu].tolist(),
        "units_convention": c.units_convention,
    }
    return json.dumps(payload, indent=2)


def coupling_set_from_json(text: str) -> CouplingSet:
    payload = json.loads(text)
    try:
        n = int(payload["n"])
        upper = as_float_array(payload["b_upper"], "b_upper", ndim=1)
        units = payload.get("units_convention", SI)
    except (KeyError, TypeError) as exc:
        raise DomainError(f"malformed coupling-set JSON: {exc}") from exc
    expected = n * (n - 1) // 2
    if upper.size != expected:
        raise DomainError(f"b_upper has {upper.size} entries, expected {expected} for n={n}")
    b = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    b[iu] = upper
    b += b.T
    return CouplingSet(b=b, units_convention=units)

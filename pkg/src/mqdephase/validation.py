"""Input validation helpers shared across modules."""
from __future__ import annotations

import numpy as np

from .errors import DomainError


def as_float_array(x, name: str, ndim: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise DomainError(f"{name} must be {ndim}-dimensional, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite entries")
    return arr


def check_unit_vector(v, name: str = "field_axis", tol: float = 1e-12) -> np.ndarray:
    vec = as_float_array(v, name, ndim=1)
    if vec.shape != (3,):
        raise DomainError(f"{name} must be a 3-vector")
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > tol:
        raise DomainError(f"{name} must have unit norm (|norm - 1| = {abs(norm - 1.0):.3e})")
    return vec


def check_symmetric_couplings(b, name: str = "b") -> np.ndarray:
    mat = as_float_array(b, name, ndim=2)
    if mat.shape[0] != mat.shape[1] or mat.shape[0] < 2:
        raise DomainError(f"{name} must be a square matrix with n >= 2")
    if not np.array_equal(mat, mat.T):
        raise DomainError(f"{name} must be symmetric")
    if np.any(np.diagonal(mat) != 0.0):
        raise DomainError(f"{name} must have a zero diagonal")
    return mat


def check_coherence_order(n: int, order: int) -> int:
    order = int(order)
    if abs(order) > n:
        raise DomainError(f"coherence order |M|={abs(order)} exceeds spin count n={n}")
    return order


def check_time_grid(times, name: str = "times") -> np.ndarray:
    t = as_float_array(times, name, ndim=1)
    if t.size == 0:
        raise DomainError(f"{name} must be non-empty")
    if np.any(t < 0):
        raise DomainError(f"{name} must be nonnegative")
    if t.size > 1 and np.any(np.diff(t) <= 0):
        raise DomainError(f"{name} must be strictly increasing")
    return t


def check_probability(x: float, name: str = "p") -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {x}")
    return x


def check_positive(x: float, name: str) -> float:
    x = float(x)
    if not x > 0:
        raise DomainError(f"{name} must be positive, got {x}")
    return x


def check_nonnegative(x: float, name: str) -> float:
    x = float(x)
    if not x >= 0:
        raise DomainError(f"{name} must be nonnegative, got {x}")
    return x

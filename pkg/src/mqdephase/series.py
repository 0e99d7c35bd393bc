"""Sampled decay signals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .validation import check_time_grid

__all__ = ["DecaySeries"]


@dataclass(frozen=True)
class DecaySeries:
    """Normalized signal S(t) on a time grid, with a provenance label."""

    times: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        t = check_time_grid(self.times)
        v = np.asarray(self.values, dtype=float)
        if v.shape != t.shape:
            raise DomainError("values must match the time grid")
        if not np.all(np.isfinite(v)):
            raise DomainError("values contain non-finite entries")
        if np.any(np.abs(v) > 1.0 + 1e-12):
            raise DomainError("signal values must lie within [-1, 1]")
        if t[0] == 0.0 and abs(v[0] - 1.0) > 1e-12:
            raise DomainError(f"signal must be normalized: S(0) = {v[0]!r}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.times.size

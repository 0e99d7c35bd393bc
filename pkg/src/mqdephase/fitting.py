"""Recovery of the degree of correlation and second moment from rate data.

Given measured decoherence rates versus coherence order for one cluster size,
``CompositeRateRegressor`` minimizes the weighted squared misfit

    chi2(p, M2) = sum_i w_i (rate_model(M_i; n, p, M2) - rate_i)^2

where the model rate is the 1/e crossing of the composite decay law with
alpha = M2/9, and w_i = 1/sigma_i^2 for experimental errors sigma_i.  The
optimizer is deterministic: a coarse grid over p and log-spaced M2, then
Nelder-Mead refinement from the best cell with p clamped to [0, 1] and M2
kept positive through its logarithm.

The model rate scales exactly as sqrt(M2) at fixed (n, p, M), so the grid
stage solves the 1/e crossing once per (p, M) and rescales across the M2
axis; every grid cell is still evaluated.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .errors import DomainError, NoCrossingError, UnderdeterminedDataError
from .model import ModelParams, s_m_composite, s_total
from .rates import _composite_hint, decay_rate
from .series import DecaySeries

__all__ = [
    "RatePoint",
    "FitResult",
    "PooledSecondMoment",
    "CompositeRateRegressor",
    "fit_rates",
    "predict_total_decay",
    "pool_second_moment",
    "load_rate_csv",
    "fit_result_to_dict",
]

_REF_M2 = 1e9
RATE_CSV_FIELDS = ("n", "M", "rate_per_s", "sigma_per_s")


@dataclass(frozen=True)
class RatePoint:
    """One measured decoherence rate for coherence order M in an n-spin cluster."""

    n: int
    M: int
    rate: float
    sigma: float

    def __post_init__(self):
        if self.rate <= 0:
            raise DomainError(f"rate must be positive, got {self.rate}")
        if self.sigma <= 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "rate", float(self.rate))
        object.__setattr__(self, "sigma", float(self.sigma))


@dataclass(frozen=True)
class FitResult:
    """Recovered (p, M2) for one cluster size, with fit diagnostics."""

    n: int
    p: float
    M2: float
    chi2: float
    n_points: int
    converged: bool


@dataclass(frozen=True)
class PooledSecondMoment:
    """Unweighted mean and sample standard deviation of M2 across cluster sizes."""

    mean: float
    std: float


def _model_rate(n: int, p: float, m2: float, order: int) -> float:
    params = ModelParams.from_second_moment(n, p, m2)
    try:
        return decay_rate(
            lambda t: s_m_composite(params, order, t), _composite_hint(params, order)
        )
    except NoCrossingError:
        return math.nan


class CompositeRateRegressor(RegressorMixin, BaseEstimator):
    """Weighted least-squares fit of the composite decay law to rate data.

    Parameters
    ----------
    n_spins : int
        Cluster size n; required before calling ``fit``.
    p_step : float, default 0.05
        Spacing of the coarse grid over the degree of correlation.
    m2_min, m2_max : float
        Range of the log-spaced coarse grid over the second moment (s^-2).
    m2_grid_size : int, default 33
        Number of grid points across [m2_min, m2_max].
    refine_xtol : float, default 1e-8
        Simplex tolerance on (p, ln M2) during refinement.
    max_refine_iter : int, default 4000
        Iteration budget for the simplex stage; exhaustion leaves
        ``converged_`` False with the best point found.

    Attributes (after ``fit``)
    --------------------------
    p_, m2_, alpha_ : recovered parameters (alpha_ = m2_ / 9).
    chi2_ : weighted squared misfit at the optimum.
    converged_ : whether the simplex stage converged.
    """

    def __init__(
        self,
        n_spins: int | None = None,
        p_step: float = 0.05,
        m2_min: float = 1e7,
        m2_max: float = 1e11,
        m2_grid_size: int = 33,
        refine_xtol: float = 1e-8,
        max_refine_iter: int = 4000,
    ):
        self.n_spins = n_spins
        self.p_step = p_step
        self.m2_min = m2_min
        self.m2_max = m2_max
        self.m2_grid_size = m2_grid_size
        self.refine_xtol = refine_xtol
        self.max_refine_iter = max_refine_iter

    def _orders(self, X) -> np.ndarray:
        x = np.asarray(X, dtype=float)
        if x.ndim == 2:
            if x.shape[1] != 1:
                raise DomainError("X must hold a single column of coherence orders")
            x = x.ravel()
        orders = np.rint(x).astype(int)
        if np.any(np.abs(x - orders) > 1e-9):
            raise DomainError("coherence orders must be integers")
        if np.any(np.abs(orders) > self.n_spins):
            raise DomainError("coherence orders must satisfy |M| <= n_spins")
        return orders

    def fit(self, X, y, sample_weight=None):
        """Fit to coherence orders X (column vector or 1-D) and rates y (s^-1).

        ``sample_weight`` defaults to 1; pass 1/sigma^2 for chi-square
        weighting by experimental errors.
        """
        if self.n_spins is None or int(self.n_spins) < 1:
            raise DomainError("n_spins must be set to the cluster size before fitting")
        X_checked, y = check_X_y(X, y, ensure_2d=False, y_numeric=True)
        orders = self._orders(X_checked)
        if np.unique(orders).size < 2:
            raise UnderdeterminedDataError(
                "all coherence orders are equal; (p, M2) is underdetermined"
            )
        if np.any(y <= 0):
            raise DomainError("rates must be positive")
        if sample_weight is None:
            weights = np.ones_like(y)
        else:
            weights = check_array(sample_weight, ensure_2d=False, dtype=float)
            if weights.shape != y.shape or np.any(weights <= 0):
                raise DomainError("sample_weight must be positive and match y")

        n = int(self.n_spins)
        unique_orders = np.unique(orders)
        inverse = np.searchsorted(unique_orders, orders)

        def chi2_from_unique(unique_rates: np.ndarray) -> float:
            model = unique_rates[inverse]
            if not np.all(np.isfinite(model)):
                return math.inf
            r = model - y
            return float(np.sum(weights * r * r))

        # Coarse grid: crossings solved once per (p, M) at a reference M2,
        # then rescaled exactly by sqrt(M2/ref) across the M2 axis.
        p_grid = np.linspace(0.0, 1.0, int(round(1.0 / self.p_step)) + 1)
        m2_grid = np.logspace(
            math.log10(self.m2_min), math.log10(self.m2_max), self.m2_grid_size
        )
        best = (math.inf, p_grid[0], m2_grid[0])
        for p in p_grid:
            base = np.array(
                [_model_rate(n, p, _REF_M2, m) for m in unique_orders]
            )
            for m2 in m2_grid:
                chi2 = chi2_from_unique(base * math.sqrt(m2 / _REF_M2))
                if chi2 < best[0]:
                    best = (chi2, float(p), float(m2))
        grid_chi2, grid_p, grid_m2 = best
        if not math.isfinite(grid_chi2):
            raise DomainError("no grid point yields a finite misfit")

        def objective(theta: np.ndarray) -> float:
            p_raw, log_m2 = theta
            if not (math.isfinite(p_raw) and math.isfinite(log_m2)) or abs(log_m2) > 700:
                return math.inf
            p = min(max(p_raw, 0.0), 1.0)
            m2 = math.exp(log_m2)
            rates_u = np.array([_model_rate(n, p, m2, m) for m in unique_orders])
            # Out-of-box excursions cost extra, scaled with the misfit itself
            # so the argmin is invariant under rescaling all weights.
            return chi2_from_unique(rates_u) + (1.0 + grid_chi2) * 1e3 * (p_raw - p) ** 2

        res = minimize(
            objective,
            np.array([grid_p, math.log(grid_m2)]),
            method="Nelder-Mead",
            options={
                "xatol": self.refine_xtol,
                "fatol": 1e-9 * (1.0 + grid_chi2),
                "maxiter": self.max_refine_iter,
                "maxfev": 2 * self.max_refine_iter,
            },
        )
        p_hat = float(min(max(res.x[0], 0.0), 1.0))
        m2_hat = float(math.exp(res.x[1]))
        chi2_hat = chi2_from_unique(
            np.array([_model_rate(n, p_hat, m2_hat, m) for m in unique_orders])
        )
        converged = bool(res.success) and math.isfinite(chi2_hat)
        if chi2_hat > grid_chi2:  # never regress past the grid stage
            p_hat, m2_hat, chi2_hat = grid_p, grid_m2, grid_chi2

        self.p_ = p_hat
        self.m2_ = m2_hat
        self.alpha_ = m2_hat / 9.0
        self.chi2_ = chi2_hat
        self.converged_ = converged
        self.n_points_ = int(y.size)
        self.n_features_in_ = 1
        return self

    def predict(self, X) -> np.ndarray:
        """Model decay rates at the given coherence orders (NaN where no crossing)."""
        check_is_fitted(self, "p_")
        orders = self._orders(check_array(X, ensure_2d=False, dtype=float))
        return np.array([_model_rate(self.n_spins, self.p_, self.m2_, m) for m in orders])

    def predict_signal(self, times, m2_override: float | None = None) -> DecaySeries:
        """Total-signal decay curve at the fitted parameters."""
        check_is_fitted(self, "p_")
        m2 = self.m2_ if m2_override is None else float(m2_override)
        params = ModelParams.from_second_moment(int(self.n_spins), self.p_, m2)
        return DecaySeries(
            np.asarray(times, dtype=float),
            s_total(params, np.asarray(times, dtype=float)),
            label=f"total fit n={params.n} p={params.p} m2={m2}",
        )


def fit_rates(points: Sequence[RatePoint]) -> FitResult:
    """Fit (p, M2) to rate points of a single cluster size, chi-square weighted."""
    points = list(points)
    if len(points) < 3:
        raise DomainError(f"need at least 3 rate points, got {len(points)}")
    sizes = {pt.n for pt in points}
    if len(sizes) != 1:
        raise DomainError(f"points mix cluster sizes {sorted(sizes)}")
    n = points[0].n
    orders = np.array([pt.M for pt in points], dtype=float)
    rates = np.array([pt.rate for pt in points])
    weights = np.array([1.0 / pt.sigma**2 for pt in points])
    est = CompositeRateRegressor(n_spins=n).fit(orders, rates, sample_weight=weights)
    return FitResult(
        n=n,
        p=est.p_,
        M2=est.m2_,
        chi2=est.chi2_,
        n_points=len(points),
        converged=est.converged_,
    )


def predict_total_decay(fit: FitResult, times, m2_override: float | None = None) -> DecaySeries:
    """Total-signal decay predicted by a fit, optionally with a pooled M2."""
    if not fit.converged:
        raise DomainError("fit did not converge; refusing to extrapolate")
    m2 = fit.M2 if m2_override is None else float(m2_override)
    params = ModelParams.from_second_moment(fit.n, fit.p, m2)
    t = np.asarray(times, dtype=float)
    return DecaySeries(t, s_total(params, t), label=f"total fit n={fit.n} p={fit.p} m2={m2}")


def pool_second_moment(fits: Sequence[FitResult]) -> PooledSecondMoment:
    """Unweighted mean and sample standard deviation of M2 across fits."""
    fits = list(fits)
    if len(fits) < 2:
        raise DomainError("need at least 2 fits to pool")
    values = np.array([f.M2 for f in fits])
    return PooledSecondMoment(mean=float(values.mean()), std=float(values.std(ddof=1)))


def load_rate_csv(path: str | Path) -> list[RatePoint]:
    """Read rate points from CSV with header n, M, rate_per_s, sigma_per_s."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != list(
            RATE_CSV_FIELDS
        ):
            raise DomainError(
                f"{path}: expected header {','.join(RATE_CSV_FIELDS)}, "
                f"got {reader.fieldnames}"
            )
        points = []
        for row in reader:
            try:
                points.append(
                    RatePoint(
                        n=int(row["n"]),
                        M=int(row["M"]),
                        rate=float(row["rate_per_s"]),
                        sigma=float(row["sigma_per_s"]),
                    )
                )
            except (TypeError, ValueError) as exc:
                raise DomainError(f"{path}: malformed row {row}: {exc}") from exc
    if not points:
        raise DomainError(f"{path}: no data rows")
    return points


def fit_result_to_dict(fit: FitResult) -> dict:
    """JSON-ready mapping with a stable key order."""
    return {
        "n": fit.n,
        "p": fit.p,
        "m2_per_s2": fit.M2,
        "chi2": fit.chi2,
        "n_points": fit.n_points,
        "converged": fit.converged,
    }

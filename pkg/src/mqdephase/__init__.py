"""Collective dipolar dephasing of multiple-quantum spin coherences.

Exact small-cluster signals by configuration enumeration, closed-form
correlated/uncorrelated/composite decay laws, decoherence-rate extraction,
and weighted least-squares recovery of the degree of correlation p and the
Van Vleck second moment M2 from rate data.
"""
from .combinatorics import (
    AsymptoticCount,
    coherence_count,
    coherence_count_asymptotic,
    config_count,
    config_count_asymptotic,
    hamming_range,
)
from .couplings import (
    GAUSSIAN,
    SI,
    CorrelationSummary,
    CouplingSet,
    SpinGeometry,
    coupling_set_from_json,
    coupling_set_to_json,
    degree_of_correlation,
    dipolar_couplings,
    load_geometry,
    second_moment,
    synth_constant,
    synth_random,
)
from .errors import (
    DegenerateCouplingsError,
    DegenerateGeometryError,
    DomainError,
    InsufficientSamplesError,
    MqdephaseError,
    NoCrossingError,
    NonMonotoneError,
    ResourceLimitError,
    UnderdeterminedDataError,
    UndefinedCorrelationError,
)
from .exact import (
    DEFAULT_SIZE_CAP,
    BathModel,
    BathVariant,
    bath_signal,
    dipolar_signal,
    quadratic_coefficient,
    total_signal,
)
from .fitting import (
    CompositeRateRegressor,
    FitResult,
    PooledSecondMoment,
    RatePoint,
    fit_rates,
    fit_result_to_dict,
    load_rate_csv,
    pool_second_moment,
    predict_total_decay,
)
from .model import (
    ModelParams,
    gate_error,
    s_m_composite,
    s_m_correlated,
    s_m_short_time,
    s_m_uncorrelated,
    s_total,
)
from .rates import RateCurve, ScalingCurve, decay_rate, rate_curve, scaling_curve, scaling_exponent
from .series import DecaySeries

__version__ = "0.1.0"

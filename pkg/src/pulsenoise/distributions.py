"""Random laws used by the pulse and traffic models.

Every sampler is an inverse-CDF map from an explicit uniform variate ``u`` in
``[0, 1)`` to a sample, so that callers own the randomness and the maps can
be tested deterministically.  Samplers and CDFs accept scalars or numpy
arrays; scalars in give Python floats out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidParameterError

__all__ = [
    "TruncatedPowerLaw",
    "PositiveCauchy",
    "LogUniformScale",
    "ExponentialLaw",
    "sample_power_law",
    "power_law_pdf",
    "power_law_cdf",
    "power_law_norm",
    "power_law_moment",
    "sample_positive_cauchy",
    "positive_cauchy_cdf",
    "positive_cauchy_pdf",
    "sample_log_uniform",
    "log_uniform_cdf",
    "sample_exponential",
    "exponential_cdf",
]

# alpha closer than this to -1 uses the logarithmic branch
_LOG_BRANCH_TOL = 1e-12


def _finite_positive(name, value):
    if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value)):
        raise InvalidParameterError(f"{name} must be a finite real number, got {value!r}")
    if value <= 0:
        raise InvalidParameterError(f"{name} must be > 0, got {value!r}")


def _log_ratio(x, lo):
    # ln(x / lo), exact-difference form so that x close to lo keeps full accuracy
    return np.log1p((x - lo) / lo)


def _unit(u):
    """Validate uniform variates; returns (array, was_scalar)."""
    arr = np.asarray(u, dtype=float)
    if arr.size and not np.all((arr >= 0.0) & (arr < 1.0)):
        raise DomainError("uniform variate must lie in [0, 1)")
    return arr, arr.ndim == 0


def _out(arr, scalar):
    return float(arr) if scalar else arr


@dataclass(frozen=True)
class TruncatedPowerLaw:
    """Density proportional to ``t**alpha`` on ``[t_min, t_max]``."""

    alpha: float
    t_min: float
    t_max: float

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise InvalidParameterError(f"alpha must be finite, got {self.alpha!r}")
        _finite_positive("t_min", self.t_min)
        _finite_positive("t_max", self.t_max)
        if not self.t_max > self.t_min:
            raise InvalidParameterError(
                f"t_max must exceed t_min, got t_min={self.t_min!r}, t_max={self.t_max!r}"
            )

    @property
    def is_logarithmic(self) -> bool:
        return abs(self.alpha + 1.0) <= _LOG_BRANCH_TOL


@dataclass(frozen=True)
class PositiveCauchy:
    """Half-Cauchy law with density ``(2/pi) s / (s**2 + x**2)`` on ``x >= 0``."""

    scale: float

    def __post_init__(self):
        _finite_positive("scale", self.scale)


@dataclass(frozen=True)
class LogUniformScale:
    """``base * 10**eps`` with ``eps`` uniform on ``[0, decades]``."""

    base: float
    decades: float

    def __post_init__(self):
        _finite_positive("base", self.base)
        if not math.isfinite(self.decades) or self.decades < 0:
            raise InvalidParameterError(f"decades must be finite and >= 0, got {self.decades!r}")

    @property
    def maximum(self) -> float:
        return self.base * 10.0**self.decades

    @property
    def minimum(self) -> float:
        return self.base


@dataclass(frozen=True)
class ExponentialLaw:
    """Exponential waiting times with the given mean."""

    mean: float

    def __post_init__(self):
        _finite_positive("mean", self.mean)


# -- truncated power law ------------------------------------------------------


def power_law_norm(law: TruncatedPowerLaw) -> float:
    """Normalisation constant ``C`` such that the density is ``C * t**alpha``."""
    if law.is_logarithmic:
        return float(1.0 / _log_ratio(law.t_max, law.t_min))
    a = law.alpha + 1.0
    return float(a / (law.t_min**a * math.expm1(a * _log_ratio(law.t_max, law.t_min))))


def power_law_moment(law: TruncatedPowerLaw, k: float) -> float:
    """Exact ``E[T**k]`` under the law."""
    c = power_law_norm(law)
    e = law.alpha + k + 1.0
    if abs(e) <= _LOG_BRANCH_TOL:
        return float(c * _log_ratio(law.t_max, law.t_min))
    return float(c * law.t_min**e * math.expm1(e * _log_ratio(law.t_max, law.t_min)) / e)


def power_law_pdf(law: TruncatedPowerLaw, t):
    """Density at ``t``; zero outside ``[t_min, t_max]``."""
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    inside = (arr >= law.t_min) & (arr <= law.t_max)
    safe = np.where(inside, arr, law.t_min)
    out = np.where(inside, power_law_norm(law) * safe**law.alpha, 0.0)
    return _out(out, scalar)


def power_law_cdf(law: TruncatedPowerLaw, t):
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    x = np.clip(arr, law.t_min, law.t_max)
    if law.is_logarithmic:
        out = _log_ratio(x, law.t_min) / _log_ratio(law.t_max, law.t_min)
    else:
        # expm1 form avoids cancellation for alpha near -1
        a = law.alpha + 1.0
        out = np.expm1(a * _log_ratio(x, law.t_min)) / math.expm1(a * _log_ratio(law.t_max, law.t_min))
    return _out(np.clip(out, 0.0, 1.0), scalar)


def sample_power_law(law: TruncatedPowerLaw, u):
    """Inverse CDF of the truncated power law.

    Examples
    --------
    >>> sample_power_law(TruncatedPowerLaw(0.0, 1.0, 3.0), 0.5)
    2.0
    """
    arr, scalar = _unit(u)
    if law.is_logarithmic:
        out = law.t_min * np.exp(arr * _log_ratio(law.t_max, law.t_min))
    else:
        a = law.alpha + 1.0
        span = math.expm1(a * _log_ratio(law.t_max, law.t_min))
        out = law.t_min * np.exp(np.log1p(arr * span) / a)
    return _out(np.clip(out, law.t_min, law.t_max), scalar)


# -- positive Cauchy ----------------------------------------------------------


def positive_cauchy_pdf(law: PositiveCauchy, x):
    arr = np.asarray(x, dtype=float)
    s = law.scale
    out = np.where(arr >= 0, (2.0 / math.pi) * s / (s * s + arr * arr), 0.0)
    return _out(out, arr.ndim == 0)


def positive_cauchy_cdf(law: PositiveCauchy, x):
    arr = np.asarray(x, dtype=float)
    out = np.where(arr > 0, (2.0 / math.pi) * np.arctan(np.maximum(arr, 0.0) / law.scale), 0.0)
    return _out(out, arr.ndim == 0)


def sample_positive_cauchy(law: PositiveCauchy, u):
    """``s * tan(pi u / 2)``, the inverse of ``(2/pi) arctan(x/s)``."""
    arr, scalar = _unit(u)
    return _out(law.scale * np.tan(0.5 * math.pi * arr), scalar)


# -- log-uniform --------------------------------------------------------------


def log_uniform_cdf(law: LogUniformScale, x):
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    if law.decades == 0:
        return _out(np.where(arr >= law.base, 1.0, 0.0), scalar)
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = np.log10(np.where(arr > 0, arr, law.base) / law.base)
    out = np.where(arr > 0, np.clip(eps / law.decades, 0.0, 1.0), 0.0)
    return _out(out, scalar)


def sample_log_uniform(law: LogUniformScale, u):
    arr, scalar = _unit(u)
    return _out(law.base * 10.0 ** (arr * law.decades), scalar)


# -- exponential --------------------------------------------------------------


def exponential_cdf(law: ExponentialLaw, x):
    arr = np.asarray(x, dtype=float)
    out = np.where(arr > 0, -np.expm1(-np.maximum(arr, 0.0) / law.mean), 0.0)
    return _out(out, arr.ndim == 0)


def sample_exponential(law: ExponentialLaw, u):
    """``-mean * ln(1 - u)``."""
    arr, scalar = _unit(u)
    return _out(-law.mean * np.log1p(-arr), scalar)

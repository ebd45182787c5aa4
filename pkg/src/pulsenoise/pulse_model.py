"""Poisson trains of pulses with random duration.

A pulse of duration ``T`` has the shape ``T**beta * A(t / T)``.  Pulses start
at the points of a Poisson process of rate ``rate`` and their durations are
drawn independently from a :class:`~pulsenoise.distributions.TruncatedPowerLaw`.
The one-sided power spectrum of such a train is

    S(f) = 2 rate E[T**(2 beta + 2) |F(w T)|**2],   w = 2 pi f,

with ``F`` the Fourier transform of the base shape ``A``.  This module
evaluates that expectation by quadrature and, for rectangular pulses of
fixed height, in closed form through the upper incomplete gamma function.
It also synthesises binned realizations for Monte Carlo checks.
"""

from __future__ import annotations

import enum
import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .distributions import (
    TruncatedPowerLaw,
    power_law_norm,
    sample_power_law,
)
from .errors import (
    ConditionViolatedError,
    InvalidParameterError,
    QuadratureError,
)
from .specfun import upper_incomplete_gamma

__all__ = [
    "PulseKind",
    "PulseShape",
    "PulseEnsemble",
    "SampledSignal",
    "pulse_fourier_sq",
    "shape_integral",
    "unit_rect_shape_integral",
    "carson_spectrum_numeric",
    "rect_spectrum_closed_form",
    "asymptotic_one_over_f",
    "rect1f_prediction",
    "one_over_f_condition",
    "spectral_exponent",
    "bin_rect_pulses",
    "generate_pulse_train",
]

ONE_OVER_F_TOL = 1e-12
QUAD_RTOL = 1e-9
# u = w T above which the quadrature switches to the Fourier-weighted rule
_OSC_SWITCH = 50.0


class PulseKind(str, enum.Enum):
    RECTANGULAR = "rectangular"
    DELTA_TRAIN = "delta_train"


@dataclass(frozen=True)
class PulseShape:
    """Base pulse ``A(v)``: ``height`` on ``[0, 1]`` or a delta of weight ``height``."""

    kind: PulseKind = PulseKind.RECTANGULAR
    height: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PulseKind(self.kind))
        if not (math.isfinite(self.height) and self.height > 0):
            raise InvalidParameterError(f"pulse height must be finite and > 0, got {self.height!r}")


@dataclass(frozen=True)
class PulseEnsemble:
    shape: PulseShape
    beta: float
    durations: TruncatedPowerLaw
    rate: float

    def __post_init__(self):
        if not math.isfinite(self.beta):
            raise InvalidParameterError(f"beta must be finite, got {self.beta!r}")
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise InvalidParameterError(f"rate must be finite and > 0, got {self.rate!r}")

    @property
    def alpha(self) -> float:
        return self.durations.alpha


@dataclass(frozen=True)
class SampledSignal:
    """Signal averaged over consecutive bins ``[origin + j dt, origin + (j+1) dt)``."""

    bin_width: float
    values: np.ndarray = field(repr=False)
    origin: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.bin_width) and self.bin_width > 0):
            raise InvalidParameterError(f"bin_width must be > 0, got {self.bin_width!r}")
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise InvalidParameterError("values must be one-dimensional")
        if not np.all(np.isfinite(vals)):
            raise InvalidParameterError("signal values must be finite")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    @property
    def duration(self) -> float:
        return self.values.size * self.bin_width

    def rebin(self, factor: int) -> "SampledSignal":
        """Average groups of ``factor`` bins; a trailing partial group is dropped."""
        factor = int(factor)
        if factor < 1:
            raise InvalidParameterError("rebin factor must be >= 1")
        n = (self.values.size // factor) * factor
        vals = self.values[:n].reshape(-1, factor).mean(axis=1)
        return SampledSignal(self.bin_width * factor, vals, self.origin)


# -- Fourier moduli -----------------------------------------------------------


def _rect_unit_sq(u):
    # 4 sin^2(u/2) / u^2, equal to 1 at u = 0
    return np.sinc(np.asarray(u, dtype=float) / (2.0 * math.pi)) ** 2


def pulse_fourier_sq(shape: PulseShape, beta: float, omega, T: float):
    """``|F_k(omega)|**2 = T**(2 beta + 2) |F(omega T)|**2`` for one pulse.

    Examples
    --------
    >>> pulse_fourier_sq(PulseShape("rectangular", 1.0), 0.0, 0.0, 2.0)
    4.0
    """
    if not (math.isfinite(T) and T > 0):
        raise InvalidParameterError(f"pulse duration must be > 0, got {T!r}")
    w = np.asarray(omega, dtype=float)
    scale = shape.height**2 * T ** (2.0 * beta + 2.0)
    if shape.kind is PulseKind.RECTANGULAR:
        out = scale * _rect_unit_sq(w * T)
    else:
        out = np.full(w.shape, scale)
    return float(out) if out.ndim == 0 else out


@functools.lru_cache(maxsize=None)
def unit_rect_shape_integral() -> float:
    """Numerical value of ``int_0^inf 4 sin^2(u/2) / u^2 du`` (equal to pi)."""
    head, err_head = integrate.quad(_rect_unit_sq, 0.0, _OSC_SWITCH, limit=200, epsabs=0.0, epsrel=1e-13)
    # tail: 2 int 1/u^2 - 2 int cos(u)/u^2 over [K, inf)
    cos_tail, err_tail = integrate.quad(
        lambda u: u**-2, _OSC_SWITCH, np.inf, weight="cos", wvar=1.0, epsabs=1e-15
    )
    total = head + 2.0 / _OSC_SWITCH - 2.0 * cos_tail
    if err_head + 2.0 * err_tail > QUAD_RTOL * total:
        raise QuadratureError("shape integral did not converge")
    return total


def shape_integral(shape: PulseShape) -> float:
    """``int_0^inf |F(u)|**2 du`` for the base shape."""
    if shape.kind is not PulseKind.RECTANGULAR:
        raise InvalidParameterError("the shape integral diverges for delta pulses")
    return shape.height**2 * unit_rect_shape_integral()


# -- spectra ------------------------------------------------------------------


def one_over_f_condition(ens: PulseEnsemble) -> bool:
    return abs(ens.alpha + 2.0 * ens.beta + 2.0) <= ONE_OVER_F_TOL


def spectral_exponent(ens: PulseEnsemble) -> float:
    """Mid-band log-log slope ``-(alpha + 2 beta + 3)`` of the rectangular-pulse spectrum."""
    return -(ens.alpha + 2.0 * ens.beta + 3.0)


class _QuadSum:
    def __init__(self):
        self.value = 0.0
        self.error = 0.0

    def add(self, res, sign=1.0):
        self.value += sign * res[0]
        self.error += abs(res[1])


def _power_moment_quad(law: TruncatedPowerLaw, k: float, acc: _QuadSum):
    """Adds ``int T**k P(T) dT`` to ``acc`` by quadrature in log T."""
    c = power_law_norm(law)
    e = law.alpha + k + 1.0
    lo, hi = math.log(law.t_min), math.log(law.t_max)
    acc.add(integrate.quad(lambda s: c * math.exp(e * s), lo, hi, epsabs=0.0, epsrel=1e-13, limit=200))


def _rect_u_integral(q: float, u0: float, u1: float) -> _QuadSum:
    """``int_{u0}^{u1} u**q sin^2(u/2) du``."""
    acc = _QuadSum()
    mid = min(u1, _OSC_SWITCH)
    if u0 < mid:
        # log-spaced variable: smooth over many decades below the oscillatory range
        def f_log(s):
            u = math.exp(s)
            return u ** (q + 1.0) * math.sin(0.5 * u) ** 2

        lo, hi = math.log(u0), math.log(mid)
        npts = max(1, int(hi - lo))
        pts = np.linspace(lo, hi, npts + 1)
        for a, b in zip(pts[:-1], pts[1:]):
            acc.add(integrate.quad(f_log, a, b, epsabs=0.0, epsrel=1e-13, limit=200))
    lo = max(u0, _OSC_SWITCH)
    if u1 > lo:
        # sin^2(u/2) = (1 - cos u) / 2; the cosine part goes to the QAWO rule
        def f_pow(s):
            return 0.5 * math.exp((q + 1.0) * s)

        acc.add(integrate.quad(f_pow, math.log(lo), math.log(u1), epsabs=0.0, epsrel=1e-13, limit=200))
        with warnings.catch_warnings():
            # roundoff warnings near full precision; the error estimate is checked by the caller
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            cos_part = integrate.quad(
                lambda u: 0.5 * u**q, lo, u1, weight="cos", wvar=1.0, epsabs=0.0, epsrel=1e-13, limit=2000
            )
        acc.add(cos_part, sign=-1.0)
    return acc


def _carson_numeric_scalar(ens: PulseEnsemble, f: float) -> float:
    law = ens.durations
    a2 = ens.shape.height**2
    omega = 2.0 * math.pi * abs(f)
    if ens.shape.kind is PulseKind.DELTA_TRAIN or omega == 0.0:
        acc = _QuadSum()
        _power_moment_quad(law, 2.0 * ens.beta + 2.0, acc)
        factor = 2.0 * ens.rate * a2
    else:
        q = ens.alpha + 2.0 * ens.beta
        acc = _rect_u_integral(q, omega * law.t_min, omega * law.t_max)
        factor = 8.0 * ens.rate * a2 * power_law_norm(law) * omega ** (-q - 3.0)
    if not acc.error <= QUAD_RTOL * abs(acc.value):
        raise QuadratureError(
            f"Carson quadrature at f={f!r}: error estimate {acc.error:.3g} exceeds "
            f"{QUAD_RTOL:g} relative of {acc.value:.6g}"
        )
    return factor * acc.value


def carson_spectrum_numeric(ens: PulseEnsemble, f):
    """Carson-theorem spectrum by adaptive quadrature over the duration law.

    Parameters
    ----------
    ens : PulseEnsemble
    f : float or array_like
        Frequency in Hz.  The spectrum is even in ``f``; negative values
        return ``S(|f|)``.

    Returns
    -------
    float or ndarray
        One-sided PSD in signal units squared per Hz.

    Raises
    ------
    QuadratureError
        If the integrator's error estimate exceeds ``1e-9`` relative.
    """
    fs = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(fs)):
        raise InvalidParameterError("frequencies must be finite")
    out = np.array([_carson_numeric_scalar(ens, float(x)) for x in fs.ravel()]).reshape(fs.shape)
    return float(out) if out.ndim == 0 else out


def _check_closed_form(ens: PulseEnsemble):
    if ens.shape.kind is not PulseKind.RECTANGULAR:
        raise InvalidParameterError("closed form requires rectangular pulses")
    if ens.beta != 0.0:
        raise InvalidParameterError(f"closed form requires beta = 0, got {ens.beta!r}")
    if ens.durations.is_logarithmic:
        raise InvalidParameterError("closed form is undefined for alpha = -1")


def rect_spectrum_closed_form(ens: PulseEnsemble, f, gamma=None):
    """Spectrum of fixed-height rectangular pulses via incomplete gamma functions.

    ``S = 4 v a^2 / w^2 + 4 v a^2 C / w^(alpha+3) Re{i^(-1-alpha)
    [Gamma(alpha+1, i w T_max) - Gamma(alpha+1, i w T_min)]}`` with
    ``C = (alpha+1) / (T_max^(alpha+1) - T_min^(alpha+1))``.  All terms are
    kept; nothing is neglected asymptotically.  ``gamma(a, z)`` replaces
    :func:`~pulsenoise.specfun.upper_incomplete_gamma` when given.
    """
    _check_closed_form(ens)
    gamma = upper_incomplete_gamma if gamma is None else gamma
    fs = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(fs) & (fs > 0)):
        raise InvalidParameterError("closed form requires f > 0")
    law = ens.durations
    alpha = law.alpha
    a_ord = alpha + 1.0
    amp = 4.0 * ens.rate * ens.shape.height**2
    norm = power_law_norm(law)
    phase = complex(math.cos(-0.5 * math.pi * a_ord), math.sin(-0.5 * math.pi * a_ord))
    out = np.empty(fs.shape)
    for idx, fv in np.ndenumerate(fs):
        w = 2.0 * math.pi * fv
        g = gamma(a_ord, complex(0.0, w * law.t_max)) - gamma(a_ord, complex(0.0, w * law.t_min))
        out[idx] = amp / w**2 + amp * norm * w ** (-alpha - 3.0) * (phase * g).real
    return float(out) if out.ndim == 0 else out


def asymptotic_one_over_f(ens: PulseEnsemble, f):
    """Mid-band ``1/f`` law ``2 v C int_0^inf |F(u)|^2 du / w`` when alpha + 2 beta + 2 = 0."""
    if not one_over_f_condition(ens):
        raise ConditionViolatedError(
            f"alpha + 2 beta + 2 = {ens.alpha + 2.0 * ens.beta + 2.0:g}, not 0"
        )
    fs = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(fs) & (fs > 0)):
        raise InvalidParameterError("asymptotic law requires f > 0")
    coef = 2.0 * ens.rate * power_law_norm(ens.durations) * shape_integral(ens.shape)
    out = coef / (2.0 * math.pi * fs)
    return float(out) if out.ndim == 0 else out


def rect1f_prediction(ens: PulseEnsemble, f):
    """``v a^2 T_min / f``: the fixed-height, alpha = -2 limit for T_min << T_max."""
    fs = np.asarray(f, dtype=float)
    out = ens.rate * ens.shape.height**2 * ens.durations.t_min / fs
    return float(out) if out.ndim == 0 else out


# -- synthesis ----------------------------------------------------------------


def bin_rect_pulses(starts, durations, heights, n_bins: int, bin_width: float, origin: float = 0.0):
    """Exact bin averages of a sum of rectangular pulses.

    Each pulse contributes ``heights[k]`` on ``[starts[k], starts[k] + durations[k])``;
    the result holds the mean of the summed signal over each bin.
    """
    starts = np.asarray(starts, dtype=float)
    ends = starts + np.asarray(durations, dtype=float)
    heights = np.broadcast_to(np.asarray(heights, dtype=float), starts.shape)
    diff = np.zeros(n_bins + 1)
    for edges, sign in ((starts, 1.0), (ends, -1.0)):
        x = (edges - origin) / bin_width
        keep = x < n_bins
        x = np.maximum(x[keep], 0.0)
        h = sign * heights[keep]
        j = np.minimum(np.floor(x).astype(np.int64), n_bins - 1)
        frac = (j + 1) - x
        diff += np.bincount(j, weights=h * frac, minlength=n_bins + 1)
        diff += np.bincount(j + 1, weights=h * (1.0 - frac), minlength=n_bins + 1)
    return np.cumsum(diff[:n_bins])


def _n_bins(horizon: float, bin_width: float) -> int:
    n = int(math.floor(horizon / bin_width + 1e-9))
    if n < 1:
        raise InvalidParameterError("horizon shorter than one bin")
    return n


def generate_pulse_train(ens: PulseEnsemble, horizon: float, bin_width: float, seed: int) -> SampledSignal:
    """One binned realization of the pulse train on ``[0, horizon)``.

    Start times form a Poisson process on ``[-t_max, horizon]`` so that pulses
    already running at ``t = 0`` are present.  Each pulse has height
    ``a * T**beta`` (rectangular) or carries weight ``a * T**(beta + 1)``
    concentrated at its start (delta train).  The output is a pure function
    of the arguments.
    """
    if not (math.isfinite(horizon) and horizon > 0):
        raise InvalidParameterError(f"horizon must be > 0, got {horizon!r}")
    if not (math.isfinite(bin_width) and bin_width > 0):
        raise InvalidParameterError(f"bin_width must be > 0, got {bin_width!r}")
    law = ens.durations
    if bin_width > 0.25 * law.t_min * (1.0 + 1e-12):
        raise InvalidParameterError(
            f"bin_width {bin_width:g} too coarse; must be <= t_min/4 = {0.25 * law.t_min:g}"
        )
    n_bins = _n_bins(horizon, bin_width)
    rng = np.random.default_rng(seed)
    span = horizon + law.t_max
    n = rng.poisson(ens.rate * span)
    starts = -law.t_max + span * np.sort(rng.random(n))
    durations = sample_power_law(law, rng.random(n))
    a = ens.shape.height
    if ens.shape.kind is PulseKind.RECTANGULAR:
        live = starts + durations > 0.0
        starts, durations = starts[live], durations[live]
        values = bin_rect_pulses(starts, durations, a * durations**ens.beta, n_bins, bin_width)
    else:
        live = (starts >= 0.0) & (starts < n_bins * bin_width)
        w = a * durations[live] ** (ens.beta + 1.0)
        j = np.minimum((starts[live] / bin_width).astype(np.int64), n_bins - 1)
        values = np.bincount(j, weights=w, minlength=n_bins) / bin_width
    return SampledSignal(bin_width, values, 0.0)

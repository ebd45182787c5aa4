"""Upper incomplete gamma function and exponential integral for complex argument.

The closed-form spectrum of rectangular pulses needs ``Gamma(a, i w T)`` for
real ``a`` and purely imaginary argument over many decades of ``|z|``.
Evaluation uses the standard split:

* small ``|z|``: power series (``Gamma(a) - gamma(a, z)`` for ``a > 1/2``,
  a cancellation-free form for ``|a| <= 1/2``), with smaller ``a`` reached by
  the downward recurrence ``Gamma(a, z) = (Gamma(a+1, z) - z**a e**-z) / a``;
* large ``|z|``: Legendre continued fraction, valid for any real ``a``,
  evaluated with the modified Lentz algorithm.

All arithmetic is plain complex double precision; no branch other than the
principal one (``-pi < arg z <= pi``) is used.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy.special import zeta

from .errors import AccuracyError, DomainError

__all__ = ["upper_incomplete_gamma", "exp_integral_e1", "gammainc_upper"]

EULER_GAMMA = 0.57721566490153286061

_EPS = 2.0**-53
_TINY = 1e-300
_MAX_SERIES_TERMS = 5000
_MAX_CF_TERMS = 200_000
# |z| below this uses series; tuned so both branches stay near machine precision
_SERIES_RADIUS = 2.0
# (-1)**k zeta(k) / k, k = 2..63: Taylor coefficients of ln Gamma(1 + b)
_LNGAMMA1P = [(-1.0) ** k * float(zeta(k)) / k for k in range(2, 64)]


def _as_complex(z) -> complex:
    try:
        zc = complex(z)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"argument must be a number, got {z!r}") from exc
    if not (math.isfinite(zc.real) and math.isfinite(zc.imag)):
        raise DomainError(f"argument must be finite, got {z!r}")
    return zc


def _lentz_gamma_cf(a: float, z: complex) -> complex:
    """Continued fraction for ``z**-a e**z Gamma(a, z)``.

    Uses the even contraction ``1/(z+1-a- 1(1-a)/(z+3-a- 2(2-a)/(z+5-a- ...)))``.
    """
    b = z + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b if b != 0 else 1.0 / _TINY
    h = d
    for i in range(1, _MAX_CF_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= _EPS:
            return h
    raise AccuracyError(f"continued fraction for Gamma({a}, {z}) did not converge")


def _zpow_exp(a: float, z: complex) -> complex:
    # z**a and e**-z kept as separate factors: merging the phases before
    # exponentiating loses the argument reduction of large Im z
    return cmath.exp(a * cmath.log(z)) * cmath.exp(-z)


def _gamma_cf(a: float, z: complex) -> complex:
    return _zpow_exp(a, z) * _lentz_gamma_cf(a, z)


def _lower_gamma_series(a: float, z: complex) -> complex:
    """Lower incomplete gamma ``gamma(a, z)`` for ``a > 0`` by the Kummer series."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_SERIES_TERMS):
        ap += 1.0
        term *= z / ap
        total += term
        if abs(term) <= _EPS * abs(total):
            return total * _zpow_exp(a, z)
    raise AccuracyError(f"series for gamma({a}, {z}) did not converge")


def _e1_series(z: complex) -> complex:
    # E1(z) = -gamma - ln z - sum_{n>=1} (-z)^n / (n n!)
    term = 1.0
    total = 0.0j
    for n in range(1, _MAX_SERIES_TERMS):
        term *= -z / n
        piece = term / n
        total += piece
        if abs(piece) <= _EPS * abs(total):
            return -EULER_GAMMA - cmath.log(z) - total
    raise AccuracyError(f"series for E1({z}) did not converge")


def _use_series_e1(z: complex) -> bool:
    r = abs(z)
    if r <= _SERIES_RADIUS:
        return True
    # near the negative real axis the continued fraction stalls, while the
    # series loses only exp(|z| + Re z) to cancellation
    return z.real < 0 and (r + z.real) <= 3.0


def exp_integral_e1(z) -> complex:
    """Exponential integral ``E1(z) = int_1^inf exp(-z t) / t dt``.

    Principal branch, cut along the negative real axis.

    Examples
    --------
    >>> round(exp_integral_e1(1.0).real, 7)
    0.2193839
    """
    zc = _as_complex(z)
    if zc == 0:
        raise DomainError("E1 is singular at z = 0")
    if _use_series_e1(zc):
        try:
            return _e1_series(zc)
        except OverflowError as exc:
            raise DomainError(f"E1({zc}) overflows double precision") from exc
    return _gamma_cf(0.0, zc)


def _expm1c(w: complex) -> complex:
    x, y = w.real, w.imag
    return complex(math.expm1(x) * math.cos(y) - 2.0 * math.sin(0.5 * y) ** 2, math.exp(x) * math.sin(y))


def _gamma1p_m1_over(b: float) -> float:
    """``(Gamma(1 + b) - 1) / b`` for ``|b| <= 1/2`` without forming ``1 + b``."""
    poly = 0.0
    for c in reversed(_LNGAMMA1P):
        poly = c + b * poly
    lb = -EULER_GAMMA + b * poly  # ln Gamma(1 + b) / b
    ln = b * lb
    return lb * (math.expm1(ln) / ln if ln != 0.0 else 1.0)


def _gamma_base_small(b: float, z: complex) -> complex:
    """``Gamma(b, z)`` for ``|b| <= 1/2`` and small ``|z|``.

    Written as ``(Gamma(1+b) - 1)/b - (z**b - 1)/b - z**b sum_k (-z)**k / (k! (b+k))``
    so that the two ``1/b`` poles cancel analytically rather than numerically.
    """
    if b == 0.0:
        return _e1_series(z)
    bl = b * cmath.log(z)
    term = 1.0
    total = 0.0j
    for k in range(1, _MAX_SERIES_TERMS):
        term *= -z / k
        piece = term / (b + k)
        total += piece
        if abs(piece) <= _EPS * abs(total):
            return _gamma1p_m1_over(b) - _expm1c(bl) / b - cmath.exp(bl) * total
    raise AccuracyError(f"series for Gamma({b}, {z}) did not converge")


def upper_incomplete_gamma(a: float, z) -> complex:
    """Upper incomplete gamma ``Gamma(a, z) = int_z^inf u**(a-1) e**-u du``.

    Parameters
    ----------
    a : float
        Real order.  Tested on ``[-5, 5]``.
    z : complex
        Argument with ``-pi < arg z <= pi``; the right half-plane and the
        imaginary axis are the supported region.

    Returns
    -------
    complex
    """
    a = float(a)
    if not math.isfinite(a):
        raise DomainError(f"order must be finite, got {a!r}")
    zc = _as_complex(z)
    if zc == 0:
        if a <= 0:
            raise DomainError("Gamma(a, 0) diverges for a <= 0")
        return complex(math.gamma(a))
    if abs(zc) > max(_SERIES_RADIUS, a + 1.0):
        return _gamma_cf(a, zc)
    if a > 0.5:
        return math.gamma(a) - _lower_gamma_series(a, zc)

    # downward recurrence from a base order in [-1/2, 1/2]; every divisor
    # then has modulus >= 1/2
    steps = int(round(-a))
    b = a + steps
    g = _gamma_base_small(b, zc)
    if steps:
        log_z = cmath.log(zc)
        ez = cmath.exp(-zc)
        for k in range(1, steps + 1):
            order = b - k
            g = (g - cmath.exp(order * log_z) * ez) / order
    return g


def gammainc_upper(a, z):
    """Elementwise :func:`upper_incomplete_gamma` over array-like ``z``."""
    zs = np.asarray(z, dtype=complex)
    out = np.empty(zs.shape, dtype=complex)
    for idx, val in np.ndenumerate(zs):
        out[idx] = upper_incomplete_gamma(a, val)
    return out

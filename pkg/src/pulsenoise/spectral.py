"""Periodogram estimation for event traces and binned signals.

Conventions follow the one-sided finite-time periodogram

    S(f) = (2 / T) |int_0^T I(t) exp(-i 2 pi f t) dt|**2

with a rectangular window.  Variance is reduced by splitting the record
into equal segments and averaging (Bartlett).  The DC term is never
reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (
    EmptyTraceError,
    GridMismatchError,
    InsufficientPointsError,
    InvalidParameterError,
    TraceFormatError,
)
from .pulse_model import SampledSignal
from .traffic_sim import PacketTrace, format_float

__all__ = [
    "SpectrumEstimate",
    "SlopeFit",
    "periodogram_events",
    "periodogram_binned",
    "bin_trace",
    "ensemble_average",
    "log_bin",
    "fit_log_slope",
    "estimate_rate",
    "harmonic_grid",
    "save_spectrum",
    "load_spectrum",
]

# keeps the (events x freqs) phase matrix near 16 MB
_PHASE_BLOCK = 1 << 20


@dataclass(frozen=True)
class SpectrumEstimate:
    freqs: np.ndarray = field(repr=False)
    psd: np.ndarray = field(repr=False)
    segments: int = 1
    record_length: float = math.nan

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        p = np.asarray(self.psd, dtype=float)
        if f.ndim != 1 or f.shape != p.shape:
            raise InvalidParameterError("freqs and psd must be 1-D arrays of equal length")
        if f.size and (np.any(f <= 0) or np.any(np.diff(f) <= 0)):
            raise InvalidParameterError("freqs must be positive and strictly increasing")
        if not np.all(np.isfinite(p) & (p >= 0)):
            raise InvalidParameterError("psd must be finite and nonnegative")
        if int(self.segments) != self.segments or self.segments < 1:
            raise InvalidParameterError(f"segments must be a positive integer, got {self.segments!r}")
        object.__setattr__(self, "segments", int(self.segments))
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "psd", p)

    def __len__(self):
        return self.freqs.size

    def band(self, f_lo: float, f_hi: float) -> "SpectrumEstimate":
        m = (self.freqs >= f_lo) & (self.freqs <= f_hi)
        return SpectrumEstimate(self.freqs[m], self.psd[m], self.segments, self.record_length)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    band: tuple
    residual: float
    n_points: int
    n_excluded: int = 0

    def predict(self, f):
        return 10.0 ** (self.intercept + self.slope * np.log10(f))


def _stable_mean(rows: np.ndarray) -> np.ndarray:
    """Column means that do not depend on row order."""
    if rows.shape[0] == 1:
        return rows[0].copy()
    # sorting each column makes the summation order canonical; the contiguous
    # transpose lets numpy use pairwise summation along each column
    ordered = np.ascontiguousarray(np.sort(rows, axis=0).T)
    return ordered.sum(axis=1) / rows.shape[0]


def harmonic_grid(record_length: float, f_max: float, f_min: float = 0.0) -> np.ndarray:
    """Frequencies ``n / record_length`` for ``n >= 1`` within ``[f_min, f_max]``."""
    n_hi = int(math.floor(f_max * record_length + 1e-9))
    n_lo = max(1, int(math.ceil(f_min * record_length - 1e-9)))
    return np.arange(n_lo, n_hi + 1, dtype=float) / record_length


def _event_transform(times: np.ndarray, weights: np.ndarray, freqs: np.ndarray) -> np.ndarray:
    out = np.zeros(freqs.size, dtype=complex)
    if not times.size:
        return out
    step = max(1, _PHASE_BLOCK // max(1, freqs.size))
    two_pi_f = 2.0 * math.pi * freqs
    for i in range(0, times.size, step):
        t = times[i : i + step]
        w = weights[i : i + step]
        phase = np.outer(t, two_pi_f)
        out += w @ np.exp(-1j * phase)
    return out


def periodogram_events(trace: PacketTrace, freqs: Sequence[float], segments: int = 1) -> SpectrumEstimate:
    """Exact periodogram of a weighted delta train by direct summation.

    The record ``[0, horizon]`` is split into ``segments`` equal pieces of
    length ``T``; each piece gives ``(2 / T) |sum_k w_k exp(-i 2 pi f t_k)|**2``
    with times measured from the piece's start, and the pieces are averaged.
    """
    if len(trace) == 0:
        raise EmptyTraceError("periodogram of an empty trace")
    fs = np.asarray(freqs, dtype=float)
    if fs.ndim != 1 or fs.size == 0 or np.any(fs <= 0) or not np.all(np.isfinite(fs)):
        raise InvalidParameterError("freqs must be a non-empty list of positive frequencies")
    segments = int(segments)
    if segments < 1:
        raise InvalidParameterError("segments must be >= 1")
    seg_len = trace.horizon / segments
    ts = trace.timestamps
    ws = np.ascontiguousarray(trace.weights, dtype=float)
    idx = np.minimum((ts / seg_len).astype(np.int64), segments - 1)
    bounds = np.searchsorted(idx, np.arange(segments + 1))
    rows = np.empty((segments, fs.size))
    for m in range(segments):
        a, b = bounds[m], bounds[m + 1]
        x = _event_transform(ts[a:b] - m * seg_len, ws[a:b], fs)
        rows[m] = (2.0 / seg_len) * (x.real**2 + x.imag**2)
    order = np.argsort(fs)
    return SpectrumEstimate(fs[order], _stable_mean(rows)[order], segments, seg_len)


def bin_trace(trace: PacketTrace, bin_width: float) -> SampledSignal:
    """Event rate per bin: summed weights divided by ``bin_width``."""
    if not (math.isfinite(bin_width) and bin_width > 0):
        raise InvalidParameterError("bin_width must be > 0")
    n = int(math.floor(trace.horizon / bin_width + 1e-9))
    if n < 2:
        raise InvalidParameterError("bin_width leaves fewer than two bins")
    j = np.minimum((trace.timestamps / bin_width).astype(np.int64), n - 1)
    values = np.bincount(j, weights=trace.weights, minlength=n)[:n] / bin_width
    return SampledSignal(bin_width, values, 0.0)


def periodogram_binned(sig: SampledSignal, segments: int = 1, f_max: Optional[float] = None) -> SpectrumEstimate:
    """FFT periodogram of a binned signal at ``f_n = n / T_segment``, ``n >= 1``.

    ``S(f_n) = (2 / T) |dt sum_j I_j exp(-i 2 pi f_n j dt)|**2``, up to the
    Nyquist frequency ``0.5 / dt`` or ``f_max`` if given.
    """
    segments = int(segments)
    if segments < 1:
        raise InvalidParameterError("segments must be >= 1")
    n = len(sig) // segments
    if n < 2:
        raise InvalidParameterError("signal too short for a periodogram")
    dt = sig.bin_width
    seg_len = n * dt
    n_max = n // 2
    if f_max is not None:
        n_max = min(n_max, int(math.floor(f_max * seg_len + 1e-9)))
    if n_max < 1:
        raise InvalidParameterError("no frequencies below f_max")
    vals = sig.values[: n * segments].reshape(segments, n)
    rows = np.empty((segments, n_max))
    for m in range(segments):
        x = np.fft.rfft(vals[m])[1 : n_max + 1] * dt
        rows[m] = (2.0 / seg_len) * (x.real**2 + x.imag**2)
    freqs = np.arange(1, n_max + 1, dtype=float) / seg_len
    return SpectrumEstimate(freqs, _stable_mean(rows), segments, seg_len)


def ensemble_average(estimates: Sequence[SpectrumEstimate]) -> SpectrumEstimate:
    """Pointwise mean of estimates on one frequency grid; segment counts add."""
    estimates = list(estimates)
    if not estimates:
        raise InvalidParameterError("nothing to average")
    ref = estimates[0]
    for e in estimates[1:]:
        if e.freqs.shape != ref.freqs.shape or not np.array_equal(e.freqs, ref.freqs):
            raise GridMismatchError("estimates are on different frequency grids")
    if len(estimates) == 1:
        return ref
    # weight by segment count so that averaging averages is consistent
    seg = np.array([e.segments for e in estimates], dtype=float)
    rows = np.stack([e.psd for e in estimates])
    if np.all(seg == seg[0]):
        psd = _stable_mean(rows)
    else:
        psd = _stable_mean(rows * (seg[:, None] * len(estimates) / seg.sum()))
    return SpectrumEstimate(ref.freqs, psd, int(seg.sum()), ref.record_length)


def log_bin(est: SpectrumEstimate, bins_per_decade: int) -> SpectrumEstimate:
    """Average within bins ``[10**(k/K), 10**((k+1)/K))``.

    Each output point sits at the geometric mean of its frequencies and holds
    the arithmetic mean of their PSD values.  Empty bins are dropped.
    """
    if int(bins_per_decade) != bins_per_decade or bins_per_decade < 1:
        raise InvalidParameterError("bins_per_decade must be an integer >= 1")
    if len(est) == 0:
        return est
    lf = np.log10(est.freqs)
    key = np.floor(lf * bins_per_decade + 1e-9).astype(np.int64)
    uniq, start = np.unique(key, return_index=True)
    counts = np.diff(np.append(start, key.size))
    freqs = 10.0 ** (np.add.reduceat(lf, start) / counts)
    psd = np.add.reduceat(est.psd, start) / counts
    # a single-member bin reproduces its point exactly
    one = counts == 1
    freqs[one] = est.freqs[start[one]]
    return SpectrumEstimate(freqs, psd, est.segments, est.record_length)


def fit_log_slope(
    est: SpectrumEstimate,
    f_lo: float,
    f_hi: float,
    bins_per_decade: Optional[int] = None,
) -> SlopeFit:
    """Least-squares line through ``(log10 f, log10 psd)`` on ``[f_lo, f_hi]``.

    Points with nonpositive PSD are skipped and counted in ``n_excluded``.
    Pass ``bins_per_decade`` to log-bin first so that the many high
    frequency points of a linear grid do not dominate.
    """
    if not (f_lo > 0 and f_hi > f_lo):
        raise InvalidParameterError("fit band needs 0 < f_lo < f_hi")
    band = est.band(f_lo, f_hi)
    if bins_per_decade is not None:
        band = log_bin(band, bins_per_decade)
    good = band.psd > 0
    n_excl = int(np.count_nonzero(~good))
    x = np.log10(band.freqs[good])
    y = np.log10(band.psd[good])
    if x.size < 5:
        raise InsufficientPointsError(f"{x.size} usable points in [{f_lo:g}, {f_hi:g}] Hz, need 5")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (intercept + slope * x)
    rms = float(np.sqrt(np.mean(resid**2)))
    return SlopeFit(float(slope), float(intercept), (float(f_lo), float(f_hi)), rms, int(x.size), n_excl)


def estimate_rate(trace: PacketTrace) -> float:
    """Mean event rate ``(N + 1) / T``, with ``N + 1`` the number of events."""
    if len(trace) == 0:
        raise EmptyTraceError("rate of an empty trace")
    return len(trace) / trace.horizon


# -- file format --------------------------------------------------------------


def save_spectrum(est: SpectrumEstimate, path) -> None:
    lines = [f"# segments={est.segments} record_length={format_float(est.record_length)}"]
    lines.extend(f"{format_float(f)} {format_float(p)}" for f, p in zip(est.freqs, est.psd))
    Path(path).write_text("\n".join(lines) + "\n")


def load_spectrum(path) -> SpectrumEstimate:
    path = Path(path)
    meta = {"segments": 1, "record_length": math.nan}
    freqs, psd = [], []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                for tok in text[1:].split():
                    key, sep, val = tok.partition("=")
                    if sep and key in meta:
                        try:
                            meta[key] = int(val) if key == "segments" else float(val)
                        except ValueError:
                            raise TraceFormatError(f"bad header value {tok!r}", path=path, line=lineno)
                continue
            cols = text.split()
            if len(cols) != 2:
                raise TraceFormatError(f"expected 2 columns, got {len(cols)}", path=path, line=lineno)
            try:
                f, p = float(cols[0]), float(cols[1])
            except ValueError:
                raise TraceFormatError(f"not a number: {text!r}", path=path, line=lineno)
            freqs.append(f)
            psd.append(p)
    try:
        return SpectrumEstimate(np.array(freqs), np.array(psd), meta["segments"], meta["record_length"])
    except InvalidParameterError as exc:
        raise TraceFormatError(str(exc), path=path) from exc

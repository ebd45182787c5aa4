"""Packet-level web traffic: Poisson files, half-Cauchy sizes, Poisson packets.

Files arrive as a Poisson stream.  A file of ``x`` bytes is cut into
``max(1, ceil(x / p))`` packets which leave as a Poisson sequence (or, for
comparison, at fixed spacing) with a mean gap ``tau_p`` drawn once per file.
The superposition of all packets is the traffic trace.

Randomness is organised in independent streams derived from the config seed:
one stream for the file-level draws and one per file (keyed by file index)
for its packet gaps, so per-file work can run in any order or in parallel
and still reproduce the same trace.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .distributions import (
    ExponentialLaw,
    LogUniformScale,
    PositiveCauchy,
    sample_exponential,
    sample_log_uniform,
    sample_positive_cauchy,
)
from .errors import (
    EmptyTraceError,
    InvalidParameterError,
    QuadratureError,
    ResourceLimitError,
    TraceFormatError,
)
from .pulse_model import SampledSignal, bin_rect_pulses

__all__ = [
    "FixedGap",
    "TrafficConfig",
    "FileRequest",
    "PacketTrace",
    "n_packets_for",
    "generate_file_arrivals",
    "packetize",
    "simulate",
    "interpacket_histogram",
    "log_bin_edges",
    "empirical_one_over_f_prediction",
    "file_pulse_spectrum",
    "files_to_pulse_signal",
    "config_to_dict",
    "config_from_dict",
    "load_config",
    "save_config",
    "save_trace",
    "load_trace",
    "format_float",
    "default_workers",
]

THREADS_ENV = "PULSENOISE_THREADS"
_FILE_STREAM = 0
_PACKET_STREAM = 1
_CHUNK = 4096


def default_workers() -> int:
    """Thread count for ensemble and per-file work, from ``PULSENOISE_THREADS``."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def format_float(x: float) -> str:
    """Shortest positional decimal that parses back to exactly ``x``."""
    return np.format_float_positional(float(x), unique=True, trim="-")


@dataclass(frozen=True)
class FixedGap:
    """Every file uses the same mean inter-packet time."""

    gap: float

    def __post_init__(self):
        if not (math.isfinite(self.gap) and self.gap > 0):
            raise InvalidParameterError(f"gap must be > 0, got {self.gap!r}")

    @property
    def minimum(self) -> float:
        return self.gap

    @property
    def maximum(self) -> float:
        return self.gap


InterpacketLaw = Union[LogUniformScale, FixedGap]


def _positive(name, value):
    if not (isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value) and value > 0):
        raise InvalidParameterError(f"{name} must be a finite number > 0, got {value!r}")


@dataclass(frozen=True)
class TrafficConfig:
    """Parameters of one traffic simulation (SI units: seconds, bytes).

    ``intra_file_gaps`` selects exponential (Poisson) or evenly spaced packets
    inside a file.  ``warmup`` starts file arrivals that long before ``t = 0``;
    their packets before zero are dropped.  ``weight_mode`` chooses whether an
    event counts one packet or ``packet_size`` bytes.
    """

    file_size_scale: float = 4100.0
    mean_file_interarrival: float = 0.101
    packet_size: float = 1500.0
    interpacket_law: InterpacketLaw = field(default_factory=lambda: LogUniformScale(11.6e-6, 3.0))
    file_size_cap: Optional[float] = None
    horizon: float = 1000.0
    seed: int = 0
    intra_file_gaps: str = "exponential"
    warmup: float = 0.0
    max_packets: int = 10**8
    weight_mode: str = "packets"

    def __post_init__(self):
        _positive("file_size_scale", self.file_size_scale)
        _positive("mean_file_interarrival", self.mean_file_interarrival)
        _positive("packet_size", self.packet_size)
        _positive("horizon", self.horizon)
        if not isinstance(self.interpacket_law, (LogUniformScale, FixedGap)):
            raise InvalidParameterError("interpacket_law must be LogUniformScale or FixedGap")
        if self.file_size_cap is not None:
            _positive("file_size_cap", self.file_size_cap)
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise InvalidParameterError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if self.intra_file_gaps not in ("exponential", "fixed"):
            raise InvalidParameterError(f"intra_file_gaps must be 'exponential' or 'fixed', got {self.intra_file_gaps!r}")
        if not (math.isfinite(self.warmup) and self.warmup >= 0):
            raise InvalidParameterError(f"warmup must be >= 0, got {self.warmup!r}")
        if not isinstance(self.max_packets, int) or self.max_packets < 1:
            raise InvalidParameterError(f"max_packets must be a positive integer, got {self.max_packets!r}")
        if self.weight_mode not in ("packets", "bytes"):
            raise InvalidParameterError(f"weight_mode must be 'packets' or 'bytes', got {self.weight_mode!r}")

    @property
    def file_size_law(self) -> PositiveCauchy:
        return PositiveCauchy(self.file_size_scale)

    @property
    def tau_p_max(self) -> float:
        return self.interpacket_law.maximum

    @property
    def tau_p_min(self) -> float:
        return self.interpacket_law.minimum

    @property
    def event_weight(self) -> float:
        return 1.0 if self.weight_mode == "packets" else float(self.packet_size)

    def replace(self, **changes) -> "TrafficConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class FileRequest:
    arrival: float
    size: float
    n_packets: int
    packet_gap_mean: float


@dataclass(frozen=True)
class PacketTrace:
    """Sorted event times on ``[0, horizon]`` with a scalar or per-event weight."""

    timestamps: np.ndarray = field(repr=False)
    horizon: float
    weight: Union[float, np.ndarray] = 1.0

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=float)
        if ts.ndim != 1:
            raise InvalidParameterError("timestamps must be one-dimensional")
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise InvalidParameterError(f"horizon must be > 0, got {self.horizon!r}")
        if ts.size:
            if not np.all(np.isfinite(ts)):
                raise InvalidParameterError("timestamps must be finite")
            if np.any(np.diff(ts) < 0):
                raise InvalidParameterError("timestamps must be sorted")
            if ts[0] < 0 or ts[-1] > self.horizon:
                raise InvalidParameterError("timestamps must lie within [0, horizon]")
        object.__setattr__(self, "timestamps", ts)
        w = self.weight
        if np.ndim(w) == 0:
            object.__setattr__(self, "weight", float(w))
        else:
            w = np.asarray(w, dtype=float)
            if w.shape != ts.shape:
                raise InvalidParameterError("per-event weights must match timestamps")
            object.__setattr__(self, "weight", w)

    def __len__(self):
        return self.timestamps.size

    @property
    def weights(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.weight, dtype=float), self.timestamps.shape)

    @property
    def uniform_weight(self) -> bool:
        return np.ndim(self.weight) == 0


def n_packets_for(size, packet_size: float):
    """``max(1, ceil(size / packet_size))``, elementwise."""
    n = np.maximum(1, np.ceil(np.asarray(size, dtype=float) / packet_size)).astype(np.int64)
    return int(n) if n.ndim == 0 else n


# -- file level ---------------------------------------------------------------


def _file_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_FILE_STREAM,)))


def _packet_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_PACKET_STREAM, index)))


def _draw_files(cfg: TrafficConfig, rng: np.random.Generator):
    t0 = -cfg.warmup
    span = cfg.horizon + cfg.warmup
    law = ExponentialLaw(cfg.mean_file_interarrival)
    pieces = []
    t = t0
    expected = span / cfg.mean_file_interarrival
    chunk = int(expected + 6.0 * math.sqrt(expected) + 16)
    while True:
        gaps = sample_exponential(law, rng.random(chunk))
        times = t + np.cumsum(gaps)
        inside = times <= cfg.horizon
        pieces.append(times[inside])
        if not inside.all():
            break
        t = times[-1]
    arrivals = np.concatenate(pieces)
    n = arrivals.size
    sizes = sample_positive_cauchy(cfg.file_size_law, rng.random(n))
    if cfg.file_size_cap is not None:
        sizes = np.minimum(sizes, cfg.file_size_cap)
    if isinstance(cfg.interpacket_law, LogUniformScale):
        gaps_mean = sample_log_uniform(cfg.interpacket_law, rng.random(n))
    else:
        gaps_mean = np.full(n, cfg.interpacket_law.gap)
    return arrivals, sizes, n_packets_for(sizes, cfg.packet_size), gaps_mean


def generate_file_arrivals(cfg: TrafficConfig, rng: Optional[np.random.Generator] = None) -> list:
    """Poisson file arrivals with sizes, packet counts and per-file mean gap.

    With ``rng=None`` the file-level stream derived from ``cfg.seed`` is used,
    which is what :func:`simulate` does.
    """
    if rng is None:
        rng = _file_rng(cfg.seed)
    arrivals, sizes, npk, gaps = _draw_files(cfg, rng)
    return [
        FileRequest(float(a), float(s), int(k), float(g))
        for a, s, k, g in zip(arrivals, sizes, npk, gaps)
    ]


def packetize(file: FileRequest, rng, horizon: Optional[float] = None, gaps: str = "exponential") -> np.ndarray:
    """Packet timestamps of one file.

    The first packet leaves at ``file.arrival``; the remaining
    ``n_packets - 1`` gaps have mean ``file.packet_gap_mean`` (exponential,
    or all equal with ``gaps="fixed"``).  ``rng`` is a numpy Generator or a
    sequence of uniform variates.  With ``horizon`` set, packets after it are
    not generated.
    """
    n_gaps = file.n_packets - 1
    if n_gaps <= 0:
        return np.array([file.arrival])
    mean = file.packet_gap_mean
    if gaps == "fixed":
        steps = n_gaps if horizon is None else min(n_gaps, max(0, int((horizon - file.arrival) / mean) + 1))
        out = file.arrival + mean * np.arange(steps + 1, dtype=float)
        return out if horizon is None else out[out <= horizon]
    if gaps != "exponential":
        raise InvalidParameterError(f"unknown gap mode {gaps!r}")
    law = ExponentialLaw(mean)
    if not hasattr(rng, "random"):
        u = np.asarray(rng, dtype=float)[:n_gaps]
        if u.size < n_gaps:
            raise InvalidParameterError("not enough uniform variates for the packet gaps")
        out = file.arrival + np.concatenate(([0.0], np.cumsum(sample_exponential(law, u))))
        return out if horizon is None else out[out <= horizon]

    pieces = [np.array([file.arrival])]
    t = file.arrival
    left = n_gaps
    while left > 0:
        k = min(left, _CHUNK)
        times = t + np.cumsum(sample_exponential(law, rng.random(k)))
        left -= k
        if horizon is not None and times[-1] > horizon:
            pieces.append(times[times <= horizon])
            break
        pieces.append(times)
        t = times[-1]
    return np.concatenate(pieces)


def _file_packets(cfg: TrafficConfig, index: int, arrival: float, npk: int, gap: float) -> np.ndarray:
    req = FileRequest(arrival, 0.0, npk, gap)
    if npk == 1 or cfg.intra_file_gaps == "fixed":
        return packetize(req, None, horizon=cfg.horizon, gaps=cfg.intra_file_gaps)
    return packetize(req, _packet_rng(cfg.seed, index), horizon=cfg.horizon)


def simulate(cfg: TrafficConfig, workers: Optional[int] = None) -> PacketTrace:
    """Run the traffic model and return the superposed packet trace.

    Raises
    ------
    ResourceLimitError
        If more than ``cfg.max_packets`` packets fall inside the horizon.
    """
    arrivals, _, npk, gaps = _draw_files(cfg, _file_rng(cfg.seed))
    if arrivals.size == 0:
        return PacketTrace(np.empty(0), cfg.horizon, cfg.event_weight)

    # files of one packet need no per-file stream
    single = npk == 1
    parts = [arrivals[single & (arrivals >= 0.0)]]
    multi = np.flatnonzero(~single)
    # refuse early when the expected in-horizon packet count is already too large
    expected = np.minimum(npk[multi], (cfg.horizon - np.maximum(arrivals[multi], 0.0)) / gaps[multi] + 1.0)
    if parts[0].size + expected.sum() > cfg.max_packets:
        raise ResourceLimitError(f"simulation would exceed max_packets={cfg.max_packets}")

    def job(i):
        return _file_packets(cfg, int(i), float(arrivals[i]), int(npk[i]), float(gaps[i]))

    workers = default_workers() if workers is None else max(1, int(workers))
    total = parts[0].size
    if workers == 1:
        results = map(job, multi)
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        results = pool.map(job, multi)
    try:
        for ts in results:
            ts = ts[ts >= 0.0] if cfg.warmup else ts
            total += ts.size
            if total > cfg.max_packets:
                raise ResourceLimitError(f"simulation exceeded max_packets={cfg.max_packets}")
            parts.append(ts)
    finally:
        if workers != 1:
            pool.shutdown(cancel_futures=True)
    stamps = np.sort(np.concatenate(parts), kind="stable")
    return PacketTrace(stamps, cfg.horizon, cfg.event_weight)


def files_to_pulse_signal(cfg: TrafficConfig, bin_width: float, files=None) -> SampledSignal:
    """Each file as one rectangular pulse of height ``w / tau_p`` and length ``n_packets tau_p``.

    ``w`` is the event weight, so the pulse carries the same total as the
    file's packets.  Uses the same file draws as :func:`simulate` unless
    ``files`` is given.
    """
    if files is None:
        arrivals, _, npk, gaps = _draw_files(cfg, _file_rng(cfg.seed))
    else:
        arrivals = np.array([f.arrival for f in files], dtype=float)
        npk = np.array([f.n_packets for f in files], dtype=float)
        gaps = np.array([f.packet_gap_mean for f in files], dtype=float)
    n_bins = int(math.floor(cfg.horizon / bin_width + 1e-9))
    if n_bins < 1:
        raise InvalidParameterError("bin_width larger than the horizon")
    values = bin_rect_pulses(arrivals, npk * gaps, cfg.event_weight / gaps, n_bins, bin_width)
    return SampledSignal(bin_width, values, 0.0)


# -- analysis -----------------------------------------------------------------


def log_bin_edges(lo: float, hi: float, per_decade: int) -> np.ndarray:
    """Edges at ``10**(k / per_decade)`` covering ``[lo, hi]``."""
    if not (lo > 0 and hi > lo):
        raise InvalidParameterError("log bin edges need 0 < lo < hi")
    if per_decade < 1:
        raise InvalidParameterError("per_decade must be >= 1")
    k0 = math.floor(math.log10(lo) * per_decade + 1e-9)
    k1 = math.ceil(math.log10(hi) * per_decade - 1e-9)
    return 10.0 ** (np.arange(k0, max(k1, k0 + 1) + 1) / per_decade)


def interpacket_histogram(trace: PacketTrace, bins) -> np.ndarray:
    """Counts of consecutive gaps ``t[k+1] - t[k]`` per bin; zero gaps go to the first bin."""
    if len(trace) < 2:
        raise EmptyTraceError("an inter-packet histogram needs at least two events")
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or edges[0] <= 0 or np.any(np.diff(edges) <= 0):
        raise InvalidParameterError("bin edges must be positive and strictly increasing")
    gaps = np.diff(trace.timestamps)
    counts, _ = np.histogram(gaps[gaps > 0], bins=edges)
    counts[0] += int(np.count_nonzero(gaps == 0))
    return counts


def empirical_one_over_f_prediction(cfg: TrafficConfig, f):
    """``s ln10 / (f tau_f p tau_p_max)`` for the log-uniform inter-packet law."""
    if not isinstance(cfg.interpacket_law, LogUniformScale):
        raise InvalidParameterError("prediction requires a log-uniform inter-packet law")
    fs = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(fs) & (fs > 0)):
        raise InvalidParameterError("prediction requires f > 0")
    out = cfg.file_size_scale * math.log(10.0) / (
        fs * cfg.mean_file_interarrival * cfg.packet_size * cfg.tau_p_max
    )
    return float(out) if out.ndim == 0 else out


def _mean_over_gap_law(law, fn) -> float:
    if isinstance(law, FixedGap) or law.decades == 0:
        return fn(law.minimum)
    from scipy.integrate import quad

    val, err = quad(lambda e: fn(law.base * 10.0**e), 0.0, law.decades, epsabs=0.0, epsrel=1e-11, limit=200)
    if not err <= 1e-9 * abs(val):
        raise QuadratureError(f"mean over the inter-packet law failed (estimate {err:g})")
    return val / law.decades


def file_pulse_spectrum(cfg: TrafficConfig, f):
    """Carson spectrum of the traffic with every file read as a rectangular pulse.

    A file of ``x`` bytes with gap ``tau`` is a pulse of height ``w / tau`` and
    length ``x tau / p``.  Averaging ``sin**2`` over the half-Cauchy size law
    uses ``E[cos(k x)] = exp(-k s)``, giving

        S(f) = 4 nu w**2 / omega**2 * E_tau[(1 - exp(-omega s tau / p)) / tau**2]

    with ``nu = 1 / tau_f``.  Packet granularity and the packet shot noise
    are ignored, so the curve describes ``f`` well below ``1 / tau_p_max``.
    """
    fs = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(fs) & (fs > 0)):
        raise InvalidParameterError("prediction requires f > 0")
    scale = cfg.file_size_scale / cfg.packet_size
    amp = 4.0 * cfg.event_weight**2 / cfg.mean_file_interarrival
    out = np.empty(fs.shape)
    for idx, fi in np.ndenumerate(fs):
        w = 2.0 * math.pi * fi
        m = _mean_over_gap_law(cfg.interpacket_law, lambda t: -math.expm1(-w * scale * t) / (t * t))
        out[idx] = amp * m / (w * w)
    return float(out) if out.ndim == 0 else out


# -- serialisation ------------------------------------------------------------


def config_to_dict(cfg: TrafficConfig) -> dict:
    law = cfg.interpacket_law
    if isinstance(law, LogUniformScale):
        law_d = {"kind": "log_uniform", "base": law.base, "decades": law.decades}
    else:
        law_d = {"kind": "fixed", "gap": law.gap}
    d = dataclasses.asdict(cfg)
    d["interpacket_law"] = law_d
    return d


def config_from_dict(data: dict) -> TrafficConfig:
    if not isinstance(data, dict):
        raise InvalidParameterError("config must be a JSON object")
    known = {f.name for f in dataclasses.fields(TrafficConfig)}
    unknown = set(data) - known
    if unknown:
        raise InvalidParameterError(f"unknown config fields: {sorted(unknown)}")
    kw = dict(data)
    law = kw.get("interpacket_law")
    if law is not None:
        if not isinstance(law, dict):
            raise InvalidParameterError("interpacket_law must be an object")
        kind = law.get("kind", "log_uniform")
        try:
            if kind == "log_uniform":
                kw["interpacket_law"] = LogUniformScale(float(law["base"]), float(law["decades"]))
            elif kind == "fixed":
                kw["interpacket_law"] = FixedGap(float(law["gap"]))
            else:
                raise InvalidParameterError(f"unknown interpacket_law kind {kind!r}")
        except KeyError as exc:
            raise InvalidParameterError(f"interpacket_law missing field {exc}") from exc
    if "max_packets" in kw and isinstance(kw["max_packets"], float) and kw["max_packets"].is_integer():
        kw["max_packets"] = int(kw["max_packets"])
    return TrafficConfig(**kw)


def load_config(path) -> TrafficConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"invalid JSON: {exc.msg}", path=path, line=exc.lineno) from exc
    return config_from_dict(data)


def save_config(cfg: TrafficConfig, path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n")


_BIN_MAGIC = b"PNTRACE1"


def save_trace(trace: PacketTrace, path, binary: bool = False) -> None:
    """Write a trace as text (one event per line) or little-endian float64 binary.

    Text layout: ``# horizon=<s>`` header, then either ``# weight=<w>`` and one
    timestamp per line, or two columns ``timestamp weight``.  Binary layout:
    8-byte magic, then float64 ``horizon``, ``n``, ``has_weights``, the ``n``
    timestamps and, if flagged, ``n`` weights.
    """
    path = Path(path)
    if binary:
        has_w = not trace.uniform_weight
        head = np.array([trace.horizon, len(trace), 1.0 if has_w else 0.0, 0.0], dtype="<f8")
        if not has_w:
            head[3] = trace.weight
        with path.open("wb") as fh:
            fh.write(_BIN_MAGIC)
            fh.write(head.tobytes())
            fh.write(trace.timestamps.astype("<f8").tobytes())
            if has_w:
                fh.write(np.asarray(trace.weight, dtype="<f8").tobytes())
        return
    lines = [f"# horizon={format_float(trace.horizon)}"]
    if trace.uniform_weight:
        lines.append(f"# weight={format_float(trace.weight)}")
        lines.extend(format_float(t) for t in trace.timestamps)
    else:
        lines.extend(f"{format_float(t)} {format_float(w)}" for t, w in zip(trace.timestamps, trace.weight))
    path.write_text("\n".join(lines) + "\n")


def _load_binary(path: Path) -> PacketTrace:
    raw = path.read_bytes()
    if not raw.startswith(_BIN_MAGIC) or len(raw) < len(_BIN_MAGIC) + 32:
        raise TraceFormatError("not a binary trace file", path=path)
    head = np.frombuffer(raw, dtype="<f8", count=4, offset=len(_BIN_MAGIC))
    horizon, n, has_w, w = float(head[0]), int(head[1]), bool(head[2]), float(head[3])
    body = np.frombuffer(raw, dtype="<f8", offset=len(_BIN_MAGIC) + 32)
    if body.size != n * (2 if has_w else 1):
        raise TraceFormatError("binary trace truncated", path=path)
    ts = body[:n].copy()
    weight = body[n:].copy() if has_w else w
    return PacketTrace(ts, horizon, weight)


def load_trace(path, binary: bool = False, horizon: Optional[float] = None) -> PacketTrace:
    """Read a trace written by :func:`save_trace` or a user-supplied timestamp list.

    Files without a ``# horizon=`` header take the last timestamp as the
    horizon unless ``horizon`` is given.  Unsorted input is sorted.
    """
    path = Path(path)
    if binary:
        return _load_binary(path)
    header = {}
    times, weights = [], []
    ncols = None
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if text.startswith("#"):
                body = text[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    try:
                        header[key.strip()] = float(val)
                    except ValueError:
                        raise TraceFormatError(f"bad header value {val.strip()!r}", path=path, line=lineno)
                continue
            cols = text.split()
            if ncols is None:
                ncols = len(cols)
            if len(cols) != ncols or len(cols) not in (1, 2):
                raise TraceFormatError(f"expected {ncols or 1} column(s), got {len(cols)}", path=path, line=lineno)
            try:
                vals = [float(c) for c in cols]
            except ValueError:
                raise TraceFormatError(f"not a number: {text!r}", path=path, line=lineno)
            if not all(math.isfinite(v) for v in vals):
                raise TraceFormatError(f"non-finite value: {text!r}", path=path, line=lineno)
            times.append(vals[0])
            if ncols == 2:
                weights.append(vals[1])
    ts = np.array(times, dtype=float)
    if ts.size and ts.min() < 0:
        raise TraceFormatError("negative timestamp", path=path)
    h = horizon if horizon is not None else header.get("horizon")
    if h is None:
        if not ts.size:
            raise TraceFormatError("empty trace without a horizon header", path=path)
        h = float(ts.max())
    if ncols == 2:
        order = np.argsort(ts, kind="stable")
        return PacketTrace(ts[order], h, np.array(weights)[order])
    return PacketTrace(np.sort(ts, kind="stable"), h, header.get("weight", 1.0))

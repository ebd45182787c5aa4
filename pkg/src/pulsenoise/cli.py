"""Command-line interface: ``pulsenoise <command> ...``.

Commands write plot-ready text files and a ``<output>.manifest.json`` next
to each, recording the command, the flags, the configuration and the seed.
Manifests carry no timestamps, so reruns produce byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import __version__
from .distributions import (
    ExponentialLaw,
    LogUniformScale,
    PositiveCauchy,
    TruncatedPowerLaw,
    exponential_cdf,
    log_uniform_cdf,
    positive_cauchy_cdf,
    power_law_cdf,
    sample_exponential,
    sample_log_uniform,
    sample_positive_cauchy,
    sample_power_law,
)
from .errors import InvalidParameterError, PulseNoiseError
from .pulse_model import (
    PulseEnsemble,
    PulseKind,
    PulseShape,
    asymptotic_one_over_f,
    carson_spectrum_numeric,
    rect_spectrum_closed_form,
)
from .specfun import upper_incomplete_gamma
from .spectral import (
    SpectrumEstimate,
    bin_trace,
    fit_log_slope,
    harmonic_grid,
    load_spectrum,
    log_bin,
    periodogram_binned,
    periodogram_events,
    save_spectrum,
)
from .traffic_sim import (
    TrafficConfig,
    config_to_dict,
    empirical_one_over_f_prediction,
    file_pulse_spectrum,
    format_float,
    interpacket_histogram,
    load_config,
    load_trace,
    log_bin_edges,
    save_trace,
    simulate,
)

__all__ = ["main", "build_parser", "RunManifest", "run_selftest", "CheckResult"]

# harmonics reported by the events path when no --fmax is given
_DEFAULT_EVENT_HARMONICS = 100


@dataclass
class RunManifest:
    """Provenance record written next to every output file."""

    command: str
    flags: dict
    config: Optional[dict]
    seed: Optional[int]
    outputs: List[str]
    version: str = __version__
    source: Optional[dict] = None

    def write(self, out_path) -> Path:
        path = manifest_path(out_path)
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True, default=_jsonable) + "\n")
        return path


def _jsonable(obj):
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not serialisable: {obj!r}")


def manifest_path(out_path) -> Path:
    out_path = Path(out_path)
    return out_path.with_name(out_path.name + ".manifest.json")


def _read_source_manifest(path) -> Optional[dict]:
    mp = manifest_path(path)
    if not mp.exists():
        return None
    try:
        return json.loads(mp.read_text())
    except (OSError, json.JSONDecodeError):
        return None


def _flags(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}


# -- simulate -----------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.horizon is not None:
        changes["horizon"] = args.horizon
    if changes:
        cfg = cfg.replace(**changes)
    trace = simulate(cfg, workers=args.threads)
    save_trace(trace, args.out, binary=args.binary)
    RunManifest("simulate", _flags(args), config_to_dict(cfg), cfg.seed, [str(args.out)]).write(args.out)
    print(f"wrote {len(trace)} events over {format_float(cfg.horizon)} s to {args.out}")
    return 0


# -- spectrum -----------------------------------------------------------------


def cmd_spectrum(args) -> int:
    trace = load_trace(args.trace, binary=args.binary)
    if args.binned:
        if args.dt is None:
            raise InvalidParameterError("--binned needs --dt")
        est = periodogram_binned(bin_trace(trace, args.dt), segments=args.segments, f_max=args.fmax)
    else:
        seg_len = trace.horizon / args.segments
        f_max = args.fmax if args.fmax is not None else _DEFAULT_EVENT_HARMONICS / seg_len
        freqs = harmonic_grid(seg_len, f_max)
        if freqs.size == 0:
            raise InvalidParameterError("no harmonics of the segment length below --fmax")
        est = periodogram_events(trace, freqs, segments=args.segments)
    if args.fmin is not None:
        est = est.band(args.fmin, math.inf)
    if args.logbin:
        est = log_bin(est, args.logbin)
    save_spectrum(est, args.out)
    src = _read_source_manifest(args.trace)
    RunManifest(
        "spectrum",
        _flags(args),
        src.get("config") if src else None,
        src.get("seed") if src else None,
        [str(args.out)],
        source=src,
    ).write(args.out)
    print(f"wrote {len(est)} frequencies to {args.out}")
    return 0


# -- analytic -----------------------------------------------------------------


def _ensemble_from_args(args) -> PulseEnsemble:
    law = TruncatedPowerLaw(args.alpha, args.tmin, args.tmax)
    shape = PulseShape(PulseKind(args.shape), args.height)
    return PulseEnsemble(shape, args.beta, law, args.rate)


def _traffic_from_args(args) -> TrafficConfig:
    cfg = load_config(args.config) if args.config else TrafficConfig()
    changes = {}
    if args.file_size_scale is not None:
        changes["file_size_scale"] = args.file_size_scale
    if args.file_interarrival is not None:
        changes["mean_file_interarrival"] = args.file_interarrival
    if args.packet_size is not None:
        changes["packet_size"] = args.packet_size
    if args.tau_p_base is not None or args.tau_p_decades is not None:
        law = cfg.interpacket_law
        base = args.tau_p_base if args.tau_p_base is not None else law.minimum
        dec = args.tau_p_decades if args.tau_p_decades is not None else getattr(law, "decades", 0.0)
        changes["interpacket_law"] = LogUniformScale(base, dec)
    return cfg.replace(**changes) if changes else cfg


def cmd_analytic(args) -> int:
    if not (args.fmin > 0 and args.fmax > args.fmin):
        raise InvalidParameterError("need 0 < --fmin < --fmax")
    if args.nfreq < 1:
        raise InvalidParameterError("--nfreq must be >= 1")
    freqs = np.geomspace(args.fmin, args.fmax, args.nfreq)
    config = None
    if args.mode in ("empir1f", "filepulse"):
        cfg = _traffic_from_args(args)
        config = config_to_dict(cfg)
        fn = empirical_one_over_f_prediction if args.mode == "empir1f" else file_pulse_spectrum
        psd = fn(cfg, freqs)
    else:
        ens = _ensemble_from_args(args)
        config = {
            "alpha": ens.alpha,
            "beta": ens.beta,
            "t_min": ens.durations.t_min,
            "t_max": ens.durations.t_max,
            "rate": ens.rate,
            "height": ens.shape.height,
            "shape": ens.shape.kind.value,
        }
        fn = {
            "closed": rect_spectrum_closed_form,
            "carson": carson_spectrum_numeric,
            "asymptotic": asymptotic_one_over_f,
        }[args.mode]
        psd = fn(ens, freqs)
    est = SpectrumEstimate(freqs, np.maximum(np.atleast_1d(psd), 0.0), 1, math.nan)
    save_spectrum(est, args.out)
    RunManifest("analytic", _flags(args), config, None, [str(args.out)]).write(args.out)
    print(f"wrote {len(est)} frequencies to {args.out}")
    return 0


# -- histogram ----------------------------------------------------------------


def cmd_histogram(args) -> int:
    trace = load_trace(args.trace, binary=args.binary)
    if len(trace) < 2:
        # let the library raise its too-few-events error
        interpacket_histogram(trace, [1.0, 2.0])
    gaps = np.diff(trace.timestamps)
    pos = gaps[gaps > 0]
    lo = args.lo if args.lo is not None else (float(pos.min()) if pos.size else 1e-9)
    hi = args.hi if args.hi is not None else (float(pos.max()) if pos.size else lo)
    hi = max(hi * (1.0 + 1e-12), lo * 10.0 ** (1.0 / args.bins_per_decade))
    edges = log_bin_edges(lo, hi, args.bins_per_decade)
    counts = interpacket_histogram(trace, edges)
    centers = np.sqrt(edges[:-1] * edges[1:])
    lines = [f"# bins_per_decade={args.bins_per_decade} events={len(trace)}"]
    lines.extend(f"{format_float(c)} {int(n)}" for c, n in zip(centers, counts))
    Path(args.out).write_text("\n".join(lines) + "\n")
    src = _read_source_manifest(args.trace)
    RunManifest(
        "histogram",
        _flags(args),
        src.get("config") if src else None,
        src.get("seed") if src else None,
        [str(args.out)],
        source=src,
    ).write(args.out)
    print(f"wrote {counts.size} bins to {args.out}")
    return 0


# -- compare ------------------------------------------------------------------


@dataclass
class Comparison:
    n_points: int
    median_abs_log10_ratio: float
    max_abs_log10_ratio: float
    slope_a: Optional[float]
    slope_b: Optional[float]


def compare_spectra(a: SpectrumEstimate, b: SpectrumEstimate, f_lo: float, f_hi: float) -> Comparison:
    """Log-log interpolate ``b`` onto ``a``'s frequencies inside the band and compare."""
    if not (f_lo > 0 and f_hi > f_lo):
        raise InvalidParameterError("compare band needs 0 < flo < fhi")
    lo = max(f_lo, a.freqs.min() if len(a) else math.inf, b.freqs.min() if len(b) else math.inf)
    hi = min(f_hi, a.freqs.max() if len(a) else -math.inf, b.freqs.max() if len(b) else -math.inf)
    if not lo <= hi:
        raise InvalidParameterError(
            f"spectra do not overlap inside [{format_float(f_lo)}, {format_float(f_hi)}] Hz"
        )
    sel = (a.freqs >= lo) & (a.freqs <= hi) & (a.psd > 0)
    bpos = b.psd > 0
    if not np.any(sel) or np.count_nonzero(bpos) < 1:
        raise InvalidParameterError("no positive PSD values in the common band")
    fa = a.freqs[sel]
    lb = np.interp(np.log10(fa), np.log10(b.freqs[bpos]), np.log10(b.psd[bpos]))
    r = np.abs(np.log10(a.psd[sel]) - lb)

    def slope(est):
        try:
            return fit_log_slope(est, lo, hi).slope
        except PulseNoiseError:
            return None

    return Comparison(int(r.size), float(np.median(r)), float(r.max()), slope(a), slope(b))


def cmd_compare(args) -> int:
    a = load_spectrum(args.a)
    b = load_spectrum(args.b)
    res = compare_spectra(a, b, args.flo, args.fhi)
    limit = math.log10(args.max_ratio)
    ok = res.median_abs_log10_ratio <= limit
    if args.max_slope_diff is not None:
        if res.slope_a is None or res.slope_b is None:
            ok = False
        else:
            ok = ok and abs(res.slope_a - res.slope_b) <= args.max_slope_diff

    def fmt(x):
        return "n/a" if x is None else f"{x:.6g}"

    lines = [
        f"points                 {res.n_points}",
        f"median_abs_log10_ratio {fmt(res.median_abs_log10_ratio)}",
        f"max_abs_log10_ratio    {fmt(res.max_abs_log10_ratio)}",
        f"slope_a                {fmt(res.slope_a)}",
        f"slope_b                {fmt(res.slope_b)}",
        f"limit_log10_ratio      {fmt(limit)}",
        f"result                 {'PASS' if ok else 'FAIL'}",
    ]
    report = "\n".join(lines) + "\n"
    sys.stdout.write(report)
    if args.report:
        Path(args.report).write_text(report)
        RunManifest("compare", _flags(args), None, None, [str(args.report)]).write(args.report)
    return 0 if ok else 1


# -- selftest -----------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    seconds: float = 0.0


def _rel(x, ref):
    return abs(x - ref) / max(abs(ref), 1e-300)


def _check_recurrence(gamma) -> float:
    worst = 0.0
    for a in (-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0):
        for r in (0.1, 1.0, 3.0, 10.0, 100.0):
            for phi in (0.0, 0.25 * math.pi, 0.5 * math.pi, -0.5 * math.pi):
                z = r * complex(math.cos(phi), math.sin(phi))
                lhs = gamma(a + 1.0, z)
                rhs = a * gamma(a, z) + np.exp(a * np.log(z)) * np.exp(-z)
                worst = max(worst, _rel(rhs, lhs))
    return worst


def _check_gamma_one(gamma) -> float:
    worst = 0.0
    for z in (0.5, 1.0, 5.0, 1j, 10j, 1e3j, 2.0 + 3.0j, -30j):
        worst = max(worst, _rel(gamma(1.0, z), np.exp(-z)))
    return worst


def _check_closed_vs_quad(gamma) -> float:
    ens = PulseEnsemble(PulseShape(), 0.0, TruncatedPowerLaw(-2.0, 1e-4, 1.0), 1.0)
    f = np.geomspace(0.01, 1e6, 20)
    cf = rect_spectrum_closed_form(ens, f, gamma=gamma)
    nq = carson_spectrum_numeric(ens, f)
    return float(np.max(np.abs(cf - nq) / nq))


def _check_samplers() -> float:
    from scipy.stats import kstest

    u = np.random.default_rng(20240601).random(100_000)
    laws = [
        (lambda v: sample_power_law(TruncatedPowerLaw(-2.0, 1e-4, 1.0), v),
         lambda x: power_law_cdf(TruncatedPowerLaw(-2.0, 1e-4, 1.0), x)),
        (lambda v: sample_positive_cauchy(PositiveCauchy(4100.0), v),
         lambda x: positive_cauchy_cdf(PositiveCauchy(4100.0), x)),
        (lambda v: sample_log_uniform(LogUniformScale(11.6e-6, 3.0), v),
         lambda x: log_uniform_cdf(LogUniformScale(11.6e-6, 3.0), x)),
        (lambda v: sample_exponential(ExponentialLaw(0.101), v),
         lambda x: exponential_cdf(ExponentialLaw(0.101), x)),
    ]
    return max(kstest(draw(u), cdf).statistic for draw, cdf in laws)


def _check_slope(gamma) -> float:
    ens = PulseEnsemble(PulseShape(), 0.0, TruncatedPowerLaw(-2.0, 1e-4, 1.0), 1.0)
    f = np.geomspace(10.0 / (2 * math.pi), 0.1 / (2 * math.pi * 1e-4), 40)
    est = SpectrumEstimate(f, rect_spectrum_closed_form(ens, f, gamma=gamma))
    return abs(fit_log_slope(est, f[0], f[-1]).slope + 1.0)


def run_selftest(gamma: Optional[Callable] = None) -> List[CheckResult]:
    """Fast consistency checks; ``gamma`` swaps the incomplete gamma under test."""
    gamma = upper_incomplete_gamma if gamma is None else gamma
    checks = [
        ("gamma recurrence", lambda: _check_recurrence(gamma), 1e-9),
        ("gamma(1, z) = exp(-z)", lambda: _check_gamma_one(gamma), 1e-12),
        ("closed form vs quadrature", lambda: _check_closed_vs_quad(gamma), 1e-6),
        ("sampler KS distance", _check_samplers, 1e-2),
        ("alpha=-2 slope error", lambda: _check_slope(gamma), 5e-2),
    ]
    out = []
    for name, fn, tol in checks:
        t0 = time.perf_counter()
        try:
            val = float(fn())
            ok = bool(val <= tol)
        except (PulseNoiseError, ArithmeticError, ValueError):
            val, ok = math.nan, False
        out.append(CheckResult(name, ok, val, tol, time.perf_counter() - t0))
    return out


def cmd_selftest(args) -> int:
    results = run_selftest()
    width = max(len(r.name) for r in results)
    print(f"{'check':<{width}}  status  value       tolerance")
    for r in results:
        print(f"{r.name:<{width}}  {'pass' if r.passed else 'FAIL':<6}  {r.value:<10.3g}  {r.tolerance:.0e}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 0 if failed == 0 else 1


# -- parser -------------------------------------------------------------------


def _positive_int(text):
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return val


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pulsenoise", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a packet trace from a JSON config")
    s.add_argument("--config", required=True, type=Path)
    s.add_argument("--out", required=True, type=Path)
    s.add_argument("--seed", type=int)
    s.add_argument("--horizon", type=float, help="override the config horizon, seconds")
    s.add_argument("--binary", action="store_true", help="write little-endian float64 binary")
    s.add_argument("--threads", type=_positive_int, help="worker threads (default from PULSENOISE_THREADS)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("spectrum", help="periodogram of a trace")
    s.add_argument("--trace", required=True, type=Path)
    s.add_argument("--out", required=True, type=Path)
    s.add_argument("--segments", type=_positive_int, default=1)
    s.add_argument("--binned", action="store_true", help="bin the trace and use the FFT path")
    s.add_argument("--dt", type=float, help="bin width for --binned, seconds")
    s.add_argument("--logbin", type=_positive_int, metavar="K", help="log-bin to K points per decade")
    s.add_argument("--fmin", type=float)
    s.add_argument("--fmax", type=float)
    s.add_argument("--binary", action="store_true", help="read a binary trace")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("analytic", help="evaluate an analytic spectrum on a log grid")
    s.add_argument("--mode", required=True, choices=["closed", "carson", "asymptotic", "empir1f", "filepulse"])
    s.add_argument("--out", required=True, type=Path)
    s.add_argument("--alpha", type=float, default=-2.0)
    s.add_argument("--beta", type=float, default=0.0)
    s.add_argument("--tmin", type=float, default=1e-4)
    s.add_argument("--tmax", type=float, default=1.0)
    s.add_argument("--rate", type=float, default=1.0)
    s.add_argument("--height", type=float, default=1.0)
    s.add_argument("--shape", choices=[k.value for k in PulseKind], default="rectangular")
    s.add_argument("--fmin", type=float, default=0.01)
    s.add_argument("--fmax", type=float, default=1000.0)
    s.add_argument("--nfreq", type=int, default=200)
    s.add_argument("--config", type=Path, help="traffic config for empir1f/filepulse")
    s.add_argument("--file-size-scale", type=float)
    s.add_argument("--file-interarrival", type=float)
    s.add_argument("--packet-size", type=float)
    s.add_argument("--tau-p-base", type=float)
    s.add_argument("--tau-p-decades", type=float)
    s.set_defaults(func=cmd_analytic)

    s = sub.add_parser("histogram", help="log-binned inter-packet time histogram")
    s.add_argument("--trace", required=True, type=Path)
    s.add_argument("--out", required=True, type=Path)
    s.add_argument("--bins-per-decade", type=_positive_int, default=10)
    s.add_argument("--lo", type=float, help="lowest bin edge, seconds")
    s.add_argument("--hi", type=float, help="highest bin edge, seconds")
    s.add_argument("--binary", action="store_true", help="read a binary trace")
    s.set_defaults(func=cmd_histogram)

    s = sub.add_parser("compare", help="compare two spectrum files inside a band")
    s.add_argument("--a", required=True, type=Path)
    s.add_argument("--b", required=True, type=Path)
    s.add_argument("--flo", required=True, type=float)
    s.add_argument("--fhi", required=True, type=float)
    s.add_argument("--max-ratio", type=float, default=2.0, help="pass if median |A/B| factor <= R")
    s.add_argument("--max-slope-diff", type=float)
    s.add_argument("--report", type=Path)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("selftest", help="run the fast consistency checks")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (PulseNoiseError, ValueError, OSError) as exc:
        print(f"pulsenoise {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

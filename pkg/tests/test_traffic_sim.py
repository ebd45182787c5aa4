import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pulsenoise.distributions import LogUniformScale
from pulsenoise.errors import (
    EmptyTraceError,
    InvalidParameterError,
    ResourceLimitError,
    TraceFormatError,
)
from pulsenoise.traffic_sim import (
    FileRequest,
    FixedGap,
    PacketTrace,
    TrafficConfig,
    config_from_dict,
    config_to_dict,
    empirical_one_over_f_prediction,
    file_pulse_spectrum,
    files_to_pulse_signal,
    format_float,
    generate_file_arrivals,
    interpacket_histogram,
    load_config,
    load_trace,
    log_bin_edges,
    n_packets_for,
    packetize,
    save_config,
    save_trace,
    simulate,
)


class TestConfig:
    def test_defaults(self):
        cfg = TrafficConfig()
        assert cfg.file_size_scale == 4100
        assert cfg.mean_file_interarrival == 0.101
        assert cfg.packet_size == 1500
        assert cfg.tau_p_min == 11.6e-6
        assert cfg.tau_p_max == pytest.approx(11.6e-3, rel=1e-15)
        assert cfg.file_size_cap is None

    @pytest.mark.parametrize(
        "kw",
        [
            dict(horizon=0.0),
            dict(horizon=-1.0),
            dict(file_size_scale=0.0),
            dict(mean_file_interarrival=math.nan),
            dict(packet_size=-1.0),
            dict(seed=-1),
            dict(seed=1.5),
            dict(intra_file_gaps="uniform"),
            dict(weight_mode="bits"),
            dict(file_size_cap=0.0),
            dict(max_packets=0),
            dict(interpacket_law=3.0),
        ],
    )
    def test_rejects(self, kw):
        with pytest.raises(InvalidParameterError):
            TrafficConfig(**kw)

    def test_dict_round_trip(self):
        for cfg in (TrafficConfig(), TrafficConfig(interpacket_law=FixedGap(1e-3), file_size_cap=1e6, seed=4)):
            assert config_from_dict(json.loads(json.dumps(config_to_dict(cfg)))) == cfg

    def test_unknown_field(self):
        with pytest.raises(InvalidParameterError):
            config_from_dict({"horizon": 1.0, "colour": "red"})

    def test_file_round_trip(self, tmp_path):
        cfg = TrafficConfig(horizon=12.5, seed=9)
        save_config(cfg, tmp_path / "c.json")
        assert load_config(tmp_path / "c.json") == cfg

    def test_bad_json_has_line(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text('{\n  "horizon": 1,\n  "seed": ,\n}\n')
        with pytest.raises(TraceFormatError) as exc:
            load_config(p)
        assert exc.value.line == 3
        assert ":3:" in str(exc.value)


class TestPacketCount:
    def test_examples(self):
        assert n_packets_for(4500, 1500) == 3
        assert n_packets_for(100, 1500) == 1
        assert n_packets_for(0.0, 1500) == 1
        assert n_packets_for(1500, 1500) == 1
        assert n_packets_for(1501, 1500) == 2

    @given(size=st.floats(0.0, 1e12))
    def test_byte_conservation(self, size):
        n = n_packets_for(size, 1500.0)
        assert n >= 1
        if size >= 1500.0:
            assert (n - 1) * 1500.0 < size <= n * 1500.0
        else:
            assert n == 1


class TestFiles:
    def test_poisson_count(self):
        cfg = TrafficConfig(horizon=1010.0)
        files = generate_file_arrivals(cfg)
        assert abs(len(files) - 1e4) <= 3 * math.sqrt(1e4)

    def test_fields(self):
        files = generate_file_arrivals(TrafficConfig(horizon=50.0, seed=2))
        arr = np.array([f.arrival for f in files])
        assert np.all(np.diff(arr) > 0) and arr[0] >= 0 and arr[-1] <= 50.0
        for f in files:
            assert f.n_packets == n_packets_for(f.size, 1500.0)
            assert 11.6e-6 <= f.packet_gap_mean <= 11.6e-3

    def test_cap(self):
        files = generate_file_arrivals(TrafficConfig(horizon=100.0, file_size_cap=5000.0))
        assert max(f.size for f in files) <= 5000.0

    def test_explicit_rng(self):
        cfg = TrafficConfig(horizon=10.0)
        a = generate_file_arrivals(cfg, np.random.default_rng(1))
        b = generate_file_arrivals(cfg, np.random.default_rng(1))
        assert a == b

    def test_interarrival_mean(self):
        files = generate_file_arrivals(TrafficConfig(horizon=2000.0, seed=5))
        gaps = np.diff([f.arrival for f in files])
        assert gaps.mean() == pytest.approx(0.101, rel=0.03)


class TestPacketize:
    def test_single(self):
        f = FileRequest(3.0, 10.0, 1, 0.01)
        np.testing.assert_array_equal(packetize(f, np.random.default_rng(0)), [3.0])

    def test_uniform_stream(self):
        u = 1 - math.exp(-1)
        f = FileRequest(1.0, 4000.0, 3, 2.0)
        np.testing.assert_allclose(packetize(f, [u, u]), [1.0, 3.0, 5.0], rtol=1e-14)

    def test_fixed(self):
        f = FileRequest(1.0, 4000.0, 3, 2.0)
        np.testing.assert_array_equal(packetize(f, None, gaps="fixed"), [1.0, 3.0, 5.0])

    def test_horizon_truncation(self):
        f = FileRequest(1.0, 4000.0, 3, 2.0)
        np.testing.assert_array_equal(packetize(f, None, horizon=4.0, gaps="fixed"), [1.0, 3.0])
        out = packetize(FileRequest(0.0, 1e9, 10**6, 1.0), np.random.default_rng(0), horizon=100.0)
        assert out[-1] <= 100.0 and out.size < 200

    def test_erlang_concentration(self):
        n, tau = 10**4, 1e-3
        span = packetize(FileRequest(0.0, n * 1500.0, n, tau), np.random.default_rng(3))
        # sum of n-1 exponentials: mean (n-1) tau, sd sqrt(n-1) tau
        assert abs(span[-1] - (n - 1) * tau) <= 5 * math.sqrt(n - 1) * tau

    @given(n=st.integers(1, 5000), seed=st.integers(0, 2**32))
    @settings(max_examples=30)
    def test_sorted_and_counted(self, n, seed):
        out = packetize(FileRequest(2.0, 0.0, n, 1e-2), np.random.default_rng(seed))
        assert out.size == n and out[0] == 2.0
        assert np.all(np.diff(out) >= 0)

    def test_too_few_uniforms(self):
        with pytest.raises(InvalidParameterError):
            packetize(FileRequest(0.0, 4000.0, 3, 1.0), [0.5])


class TestSimulate:
    def test_deterministic(self):
        cfg = TrafficConfig(horizon=30.0, seed=11)
        a, b = simulate(cfg), simulate(cfg)
        assert np.array_equal(a.timestamps, b.timestamps)
        assert not np.array_equal(a.timestamps, simulate(cfg.replace(seed=12)).timestamps)

    def test_parallel_equals_sequential(self):
        cfg = TrafficConfig(horizon=30.0, seed=5)
        assert np.array_equal(simulate(cfg, workers=1).timestamps, simulate(cfg, workers=4).timestamps)

    def test_thread_env(self, monkeypatch):
        cfg = TrafficConfig(horizon=10.0, seed=5)
        ref = simulate(cfg, workers=1).timestamps
        monkeypatch.setenv("PULSENOISE_THREADS", "3")
        assert np.array_equal(simulate(cfg).timestamps, ref)

    def test_empty(self):
        tr = simulate(TrafficConfig(horizon=1e-9, mean_file_interarrival=1e6))
        assert len(tr) == 0

    @given(seed=st.integers(0, 10**6), horizon=st.floats(0.5, 20.0))
    @settings(max_examples=15, deadline=None)
    def test_sorted_and_contained(self, seed, horizon):
        tr = simulate(TrafficConfig(horizon=horizon, seed=seed))
        ts = tr.timestamps
        assert np.all(np.diff(ts) >= 0)
        if ts.size:
            assert ts[0] >= 0 and ts[-1] <= horizon

    def test_packet_total(self):
        # every packet of every file that fits inside the horizon is present
        cfg = TrafficConfig(horizon=20.0, seed=3, interpacket_law=FixedGap(1e-3), intra_file_gaps="fixed")
        files = generate_file_arrivals(cfg)
        expected = sum(min(f.n_packets, int((cfg.horizon - f.arrival) / 1e-3 + 1e-9) + 1) for f in files)
        assert abs(len(simulate(cfg)) - expected) <= 2

    def test_resource_limit(self):
        with pytest.raises(ResourceLimitError):
            simulate(TrafficConfig(horizon=100.0, max_packets=1000))

    def test_warmup_keeps_only_positive_times(self):
        tr = simulate(TrafficConfig(horizon=10.0, warmup=1.16, seed=1))
        assert tr.timestamps.min() >= 0.0

    def test_bytes_mode(self):
        tr = simulate(TrafficConfig(horizon=5.0, weight_mode="bytes"))
        assert tr.weight == 1500.0


class TestPulseSignal:
    def test_area_matches_packets(self):
        cfg = TrafficConfig(horizon=50.0, seed=2, file_size_cap=1e6)
        files = generate_file_arrivals(cfg)
        sig = files_to_pulse_signal(cfg, 1e-3)
        inside = sum(f.n_packets for f in files if f.arrival + f.n_packets * f.packet_gap_mean <= cfg.horizon)
        total = sig.values.sum() * sig.bin_width
        assert total >= inside - 1e-6
        assert total <= sum(f.n_packets for f in files) + 1e-6


class TestTraceIO:
    def test_text_round_trip_bytes(self, tmp_path):
        tr = simulate(TrafficConfig(horizon=5.0, seed=1))
        p1, p2 = tmp_path / "a.txt", tmp_path / "b.txt"
        save_trace(tr, p1)
        back = load_trace(p1)
        assert np.array_equal(back.timestamps, tr.timestamps)
        assert back.horizon == tr.horizon and back.weight == tr.weight
        save_trace(back, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_weighted_round_trip(self, tmp_path):
        tr = PacketTrace(np.array([0.1, 0.2, 0.7]), 1.0, np.array([1.0, 2.5, 1e-3]))
        save_trace(tr, tmp_path / "w.txt")
        back = load_trace(tmp_path / "w.txt")
        np.testing.assert_array_equal(back.weight, tr.weight)

    def test_binary_round_trip(self, tmp_path):
        tr = simulate(TrafficConfig(horizon=5.0, seed=1))
        save_trace(tr, tmp_path / "t.bin", binary=True)
        back = load_trace(tmp_path / "t.bin", binary=True)
        assert np.array_equal(back.timestamps, tr.timestamps)
        save_trace(back, tmp_path / "u.bin", binary=True)
        assert (tmp_path / "t.bin").read_bytes() == (tmp_path / "u.bin").read_bytes()

    def test_digits(self):
        # at least nine significant digits, and exact round trip
        for x in (0.123456789012, 987.654321, 1e-7 * math.pi):
            s = format_float(x)
            assert float(s) == x
            assert len(s.replace(".", "").lstrip("0")) >= 9

    def test_user_trace_without_header(self, tmp_path):
        p = tmp_path / "u.txt"
        p.write_text("0.5\n0.1\n2.0\n")
        tr = load_trace(p)
        np.testing.assert_array_equal(tr.timestamps, [0.1, 0.5, 2.0])
        assert tr.horizon == 2.0

    @pytest.mark.parametrize("body,line", [("# horizon=3\n0.1\nabc\n", 3), ("0.1 1\n0.2\n", 2), ("0.1\ninf\n", 2)])
    def test_malformed(self, tmp_path, body, line):
        p = tmp_path / "bad.txt"
        p.write_text(body)
        with pytest.raises(TraceFormatError) as exc:
            load_trace(p)
        assert exc.value.line == line

    def test_bad_binary(self, tmp_path):
        p = tmp_path / "bad.bin"
        p.write_bytes(b"hello")
        with pytest.raises(TraceFormatError):
            load_trace(p, binary=True)

    def test_trace_validation(self):
        with pytest.raises(InvalidParameterError):
            PacketTrace(np.array([0.2, 0.1]), 1.0)
        with pytest.raises(InvalidParameterError):
            PacketTrace(np.array([0.2, 1.5]), 1.0)


class TestHistogram:
    def test_equal_gaps(self):
        tr = PacketTrace(np.array([0.0, 1.0, 2.0, 3.0]), 3.0)
        counts = interpacket_histogram(tr, [0.5, 0.9, 1.1, 2.0])
        np.testing.assert_array_equal(counts, [0, 3, 0])

    def test_zero_gaps_first_bin(self):
        tr = PacketTrace(np.array([0.0, 0.0, 1.0]), 1.0)
        np.testing.assert_array_equal(interpacket_histogram(tr, [0.5, 2.0]), [2])

    def test_too_few(self):
        with pytest.raises(EmptyTraceError):
            interpacket_histogram(PacketTrace(np.empty(0), 1.0), [1.0, 2.0])
        with pytest.raises(EmptyTraceError):
            interpacket_histogram(PacketTrace(np.array([0.5]), 1.0), [1.0, 2.0])

    def test_bad_edges(self):
        tr = PacketTrace(np.array([0.0, 1.0]), 1.0)
        with pytest.raises(InvalidParameterError):
            interpacket_histogram(tr, [0.0, 1.0])
        with pytest.raises(InvalidParameterError):
            interpacket_histogram(tr, [2.0, 1.0])

    def test_log_edges(self):
        e = log_bin_edges(1e-3, 1.0, 2)
        np.testing.assert_allclose(e, 10.0 ** (np.arange(-6, 1) / 2))


class TestPredictions:
    def test_empir1f_values(self):
        cfg = TrafficConfig()
        v1 = empirical_one_over_f_prediction(cfg, 1.0)
        assert v1 == pytest.approx(4100 * math.log(10) / (0.101 * 1500 * 0.0116), rel=1e-12)
        assert v1 == pytest.approx(5.37e3, rel=1e-3)
        assert empirical_one_over_f_prediction(cfg, 10.0) == pytest.approx(v1 / 10, rel=1e-14)

    def test_empir1f_uses_law_maximum(self):
        cfg = TrafficConfig(interpacket_law=LogUniformScale(1e-5, 2.0))
        assert empirical_one_over_f_prediction(cfg, 1.0) == pytest.approx(
            4100 * math.log(10) / (0.101 * 1500 * 1e-3), rel=1e-12
        )

    def test_empir1f_rejects(self):
        with pytest.raises(InvalidParameterError):
            empirical_one_over_f_prediction(TrafficConfig(), 0.0)
        with pytest.raises(InvalidParameterError):
            empirical_one_over_f_prediction(TrafficConfig(interpacket_law=FixedGap(1e-3)), 1.0)

    def test_file_pulse_spectrum_low_frequency_limit(self):
        # f -> 0: 2 nu s <1/tau> / (pi p f), with <1/tau> = (1/b - 1/(b 10^D)) / (D ln 10)
        cfg = TrafficConfig()
        b, d = 11.6e-6, 3.0
        inv_tau = (1 / b - 1 / (b * 10**d)) / (d * math.log(10))
        f = 1e-4
        expected = 2 * (1 / 0.101) * 4100 * inv_tau / (math.pi * 1500 * f)
        assert file_pulse_spectrum(cfg, f) == pytest.approx(expected, rel=1e-3)

    def test_file_pulse_spectrum_fixed_gap_closed_form(self):
        tau = 1e-3
        cfg = TrafficConfig(interpacket_law=FixedGap(tau))
        f = np.array([0.1, 10.0, 300.0])
        w = 2 * math.pi * f
        expected = 4 / 0.101 / w**2 * (-np.expm1(-w * 4100 / 1500 * tau)) / tau**2
        np.testing.assert_allclose(file_pulse_spectrum(cfg, f), expected, rtol=1e-12)

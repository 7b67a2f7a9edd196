import numpy as np
import pytest

from mmwavesim.engine import (CausalityError, ConfigError, PhyMacConfig, RngStreams,
                              Simulator, normal_gaussian, phy_config_from_keys, us)


def test_fifo_tie_break():
    sim = Simulator()
    order = []
    sim.schedule(0, lambda: order.append("A"))
    sim.schedule(0, lambda: order.append("B"))
    sim.run(0)
    assert order == ["A", "B"]


def test_schedule_at_100us_fires_at_100000_ns():
    sim = Simulator()
    fired = []
    sim.schedule(us(100), lambda: fired.append(sim.now))
    sim.run(us(200))
    assert fired == [100_000]


def test_schedule_in_past_rejected():
    sim = Simulator()
    sim.schedule(10, lambda: None)
    sim.run(10)
    with pytest.raises(CausalityError):
        sim.schedule(5, lambda: None)


def test_run_empty_queue():
    sim = Simulator()
    stats = sim.run(0)
    assert stats.clock == 0
    assert stats.events_executed == 0


def test_event_causality():
    sim = Simulator()
    times = []
    sim.schedule(50, lambda: times.append(sim.now))
    sim.schedule(10, lambda: (times.append(sim.now),
                              sim.schedule(30, lambda: times.append(sim.now))))
    sim.run(100)
    assert times == sorted(times)


def test_cancel_event():
    sim = Simulator()
    fired = []
    h = sim.schedule(5, lambda: fired.append(1))
    h.cancel()
    sim.run(10)
    assert fired == []


def test_subframe_cadence_one_frame():
    # exactly subframes_per_frame starts per frame period
    cfg = PhyMacConfig()
    sim = Simulator()
    starts = []

    def tick():
        starts.append(sim.now)
        sim.schedule(sim.now + cfg.subframe_length_ns, tick)

    sim.schedule(0, tick)
    sim.run(cfg.frame_length_ns - 1)
    assert len(starts) == cfg.subframes_per_frame
    assert starts == [k * cfg.subframe_length_ns for k in range(10)]


class TestRngStreams:
    def test_same_seed_same_stream(self):
        a = RngStreams(42).stream("shadowing")
        b = RngStreams(42).stream("shadowing")
        assert [a.gen.random() for _ in range(5)] == [b.gen.random() for _ in range(5)]

    def test_distinct_streams_differ(self):
        s = RngStreams(42)
        a = s.stream("shadowing").gen.random()
        b = s.stream("fading").gen.random()
        assert a != b

    def test_adding_stream_does_not_perturb(self):
        s1 = RngStreams(7)
        first = [s1.stream("a").gen.random() for _ in range(3)]
        s2 = RngStreams(7)
        s2.stream("zzz").gen.random()  # extra stream created first
        second = [s2.stream("a").gen.random() for _ in range(3)]
        assert first == second


class TestNormalGaussian:
    def test_sigma_zero_returns_mu(self):
        st = RngStreams(1).stream("g")
        assert normal_gaussian(st, 3.25, 0.0) == 3.25

    def test_negative_sigma_rejected(self):
        st = RngStreams(1).stream("g")
        with pytest.raises(ValueError):
            normal_gaussian(st, 0.0, -1.0)

    def test_law_of_large_numbers(self):
        st = RngStreams(123).stream("lln")
        draws = np.array([normal_gaussian(st, 0.0, 8.7) for _ in range(100_000)])
        assert abs(draws.mean()) < 0.1
        assert abs(draws.std() - 8.7) / 8.7 < 0.02

    def test_determinism(self):
        a = normal_gaussian(RngStreams(5).stream("x"), 0, 1)
        b = normal_gaussian(RngStreams(5).stream("x"), 0, 1)
        assert a == b


class TestPhyMacConfig:
    def test_defaults_match_numerology(self):
        cfg = PhyMacConfig()
        assert cfg.subframes_per_frame == 10
        assert cfg.symbols_per_subframe == 24
        assert cfg.symbol_length_ns == 4160
        assert cfg.subframe_length_ns == 24 * 4160
        assert cfg.num_subbands == 72
        assert cfg.subcarriers_per_subband == 48
        assert cfg.num_ref_sc_per_symbol == 864
        assert cfg.data_subcarriers_per_symbol == 2592
        assert cfg.num_harq_processes == 20
        assert cfg.guard_symbols == 1
        assert cfg.data_symbols_per_subframe == 21

    def test_invariant_violations(self):
        with pytest.raises(ConfigError):
            PhyMacConfig(num_ref_sc_per_symbol=5000)
        with pytest.raises(ConfigError):
            PhyMacConfig(num_dl_ctrl_symbols=12, num_ul_ctrl_symbols=12)
        with pytest.raises(ConfigError):
            PhyMacConfig(num_subbands=0)

    def test_from_table1_keys(self):
        cfg = phy_config_from_keys({
            "SubframePerFrame": "10", "SymbolsPerSubframe": "24",
            "SymbolLength": "4.16", "NumSubbands": "72",
            "NumHarqProcesses": "20", "SubframeLength": "100",
        })
        assert cfg.symbol_length_ns == 4160
        assert cfg.num_harq_processes == 20

    def test_unknown_key_named_in_error(self):
        with pytest.raises(ConfigError, match="NotAKey"):
            phy_config_from_keys({"NotAKey": "3"})

    def test_inconsistent_subframe_length_rejected(self):
        with pytest.raises(ConfigError):
            phy_config_from_keys({"SymbolsPerSubframe": "24",
                                  "SymbolLength": "4.16",
                                  "SubframeLength": "150"})

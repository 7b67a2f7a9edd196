"""Deterministic discrete-event core: clock, event queue, named RNG streams
and the PHY/MAC numerology registry.

Time is kept as integer nanoseconds so that 250k+ subframes of 99.84 us
accumulate without floating-point drift.
"""

from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass, field, fields
from typing import Callable, Optional

import numpy as np

NS_PER_US = 1_000
NS_PER_MS = 1_000_000
NS_PER_S = 1_000_000_000

SPEED_OF_LIGHT = 299_792_458.0  # m/s


def us(value: float) -> int:
    """Microseconds -> integer-nanosecond sim time."""
    return int(round(value * NS_PER_US))


def ms(value: float) -> int:
    return int(round(value * NS_PER_MS))


def seconds(value: float) -> int:
    return int(round(value * NS_PER_S))


def to_seconds(t: int) -> float:
    return t / NS_PER_S


class CausalityError(ValueError):
    """Raised when an event is scheduled before the current clock."""


class ConfigError(ValueError):
    """Raised for invalid configuration values or keys."""


class SimulationInvariantError(RuntimeError):
    """A component violated a structural simulator invariant (a bug, not a model outcome)."""


@dataclass
class EventHandle:
    time: int
    seq: int
    fn: Optional[Callable[[], None]]

    def cancel(self) -> None:
        self.fn = None

    @property
    def active(self) -> bool:
        return self.fn is not None


@dataclass
class RunStats:
    clock: int = 0
    events_executed: int = 0


class Simulator:
    """Single-threaded event loop. Ties execute in insertion (FIFO) order."""

    def __init__(self) -> None:
        self._queue: list[tuple[int, int, EventHandle]] = []
        self._seq = 0
        self._now = 0
        self.events_executed = 0

    @property
    def now(self) -> int:
        return self._now

    def schedule(self, at: int, fn: Callable[[], None]) -> EventHandle:
        if at < self._now:
            raise CausalityError(f"cannot schedule at t={at} ns; clock is {self._now} ns")
        handle = EventHandle(at, self._seq, fn)
        heapq.heappush(self._queue, (at, self._seq, handle))
        self._seq += 1
        return handle

    def schedule_in(self, delay: int, fn: Callable[[], None]) -> EventHandle:
        return self.schedule(self._now + delay, fn)

    def run(self, until: int) -> RunStats:
        """Execute every event with time <= until, then set the clock to until."""
        queue = self._queue
        while queue and queue[0][0] <= until:
            at, _, handle = heapq.heappop(queue)
            fn = handle.fn
            if fn is None:
                continue
            handle.fn = None
            self._now = at
            fn()
            self.events_executed += 1
        if until > self._now:
            self._now = until
        return RunStats(clock=self._now, events_executed=self.events_executed)

    def peek_time(self) -> Optional[int]:
        while self._queue and self._queue[0][2].fn is None:
            heapq.heappop(self._queue)
        return self._queue[0][0] if self._queue else None


def _stream_key(stream_id: str) -> int:
    digest = hashlib.sha256(stream_id.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass
class RngStream:
    """A named, independently seeded random stream (Philox, counter-based)."""

    stream_id: str
    seed: int
    gen: np.random.Generator = field(repr=False, default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.gen is None:
            ss = np.random.SeedSequence([self.seed & 0xFFFFFFFFFFFFFFFF, _stream_key(self.stream_id)])
            self.gen = np.random.Generator(np.random.Philox(ss))


class RngStreams:
    """Factory/cache of named streams derived from one scenario seed.

    Streams with distinct ids never perturb each other, so adding a new
    stochastic concern leaves existing regression traces untouched.
    """

    def __init__(self, seed: int) -> None:
        self.seed = int(seed)
        self._streams: dict[str, RngStream] = {}

    def stream(self, stream_id: str) -> RngStream:
        st = self._streams.get(stream_id)
        if st is None:
            st = RngStream(stream_id, self.seed)
            self._streams[stream_id] = st
        return st


def normal_gaussian(stream: RngStream, mu: float, sigma: float) -> float:
    """One N(mu, sigma^2) draw; sigma = 0 degenerates to mu exactly."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0.0:
        return float(mu)
    return float(stream.gen.normal(mu, sigma))


@dataclass(frozen=True)
class PhyMacConfig:
    """TDD frame numerology and PHY/MAC latencies.

    The subframe length is defined as symbols_per_subframe * symbol_length
    (99.84 us with defaults); the nominal 100 us is not used for timing.
    """

    subframes_per_frame: int = 10
    symbols_per_subframe: int = 24
    symbol_length_ns: int = 4160
    num_subbands: int = 72
    subband_width_hz: float = 13.89e6
    subcarriers_per_subband: int = 48
    center_freq_hz: float = 28e9
    num_ref_sc_per_symbol: int = 864
    num_dl_ctrl_symbols: int = 1
    num_ul_ctrl_symbols: int = 1
    guard_period_ns: int = 4160
    mac_phy_data_latency: int = 2
    phy_mac_data_latency: int = 2
    num_harq_processes: int = 20

    def __post_init__(self) -> None:
        self.validate()

    @property
    def subframe_length_ns(self) -> int:
        return self.symbols_per_subframe * self.symbol_length_ns

    @property
    def frame_length_ns(self) -> int:
        return self.subframes_per_frame * self.subframe_length_ns

    @property
    def total_subcarriers(self) -> int:
        return self.num_subbands * self.subcarriers_per_subband

    @property
    def data_subcarriers_per_symbol(self) -> int:
        return self.total_subcarriers - self.num_ref_sc_per_symbol

    @property
    def bandwidth_hz(self) -> float:
        return self.num_subbands * self.subband_width_hz

    @property
    def guard_symbols(self) -> int:
        return int(round(self.guard_period_ns / self.symbol_length_ns))

    @property
    def data_symbols_per_subframe(self) -> int:
        return (self.symbols_per_subframe - self.num_dl_ctrl_symbols
                - self.num_ul_ctrl_symbols - self.guard_symbols)

    def subband_freqs_hz(self) -> np.ndarray:
        """Center frequency of each sub-band across the carrier bandwidth."""
        i = np.arange(self.num_subbands)
        return self.center_freq_hz + (i - (self.num_subbands - 1) / 2.0) * self.subband_width_hz

    def validate(self) -> None:
        counts = {
            "subframes_per_frame": self.subframes_per_frame,
            "symbols_per_subframe": self.symbols_per_subframe,
            "num_subbands": self.num_subbands,
            "subcarriers_per_subband": self.subcarriers_per_subband,
            "num_harq_processes": self.num_harq_processes,
        }
        for name, value in counts.items():
            if value < 1:
                raise ConfigError(f"{name} must be >= 1, got {value}")
        if self.symbol_length_ns <= 0:
            raise ConfigError("symbol_length_ns must be positive")
        if self.num_ref_sc_per_symbol > self.total_subcarriers:
            raise ConfigError("num_ref_sc_per_symbol exceeds total subcarriers")
        if self.num_dl_ctrl_symbols + self.num_ul_ctrl_symbols >= self.symbols_per_subframe:
            raise ConfigError("control symbols leave no room for data")
        if self.guard_period_ns % self.symbol_length_ns != 0:
            raise ConfigError("guard_period_ns must be a whole number of symbols")
        if self.data_symbols_per_subframe < 1:
            raise ConfigError("no data symbols left after control and guard")
        if self.mac_phy_data_latency < 0 or self.phy_mac_data_latency < 0:
            raise ConfigError("latencies must be non-negative")


# Table-1-style key names accepted by the scenario [phy] section.
TABLE1_KEYS = {
    "SubframePerFrame": ("subframes_per_frame", int),
    "SubframesPerFrame": ("subframes_per_frame", int),
    "SubframeLength": (None, float),  # microseconds; consistency-checked only
    "SymbolsPerSubframe": ("symbols_per_subframe", int),
    "SymbolLength": ("symbol_length_ns", "us"),
    "NumSubbands": ("num_subbands", int),
    "SubbandWidth": ("subband_width_hz", float),
    "SubcarriersPerSubband": ("subcarriers_per_subband", int),
    "CenterFreq": ("center_freq_hz", float),
    "NumRefScPerSymbol": ("num_ref_sc_per_symbol", int),
    "NumDlCtrlSymbols": ("num_dl_ctrl_symbols", int),
    "NumUlCtrlSymbols": ("num_ul_ctrl_symbols", int),
    "GuardPeriod": ("guard_period_ns", "us"),
    "MacPhyDataLatency": ("mac_phy_data_latency", int),
    "PhyMacDataLatency": ("phy_mac_data_latency", int),
    "NumHarqProcesses": ("num_harq_processes", int),
}


def phy_config_from_keys(values: dict[str, str]) -> PhyMacConfig:
    """Build a PhyMacConfig from Table-1-named scenario keys."""
    kwargs: dict[str, object] = {}
    stated_subframe_us: Optional[float] = None
    for key, raw in values.items():
        if key not in TABLE1_KEYS:
            raise ConfigError(f"unknown PHY config key: {key}")
        target, conv = TABLE1_KEYS[key]
        if target is None:
            stated_subframe_us = float(raw)
            continue
        if conv == "us":
            kwargs[target] = us(float(raw))
        else:
            kwargs[target] = conv(raw)  # type: ignore[operator]
    cfg = PhyMacConfig(**kwargs)  # type: ignore[arg-type]
    if stated_subframe_us is not None:
        # Table 1's 100 us is nominal; accept it when within one symbol of the
        # exact product, otherwise the file is internally inconsistent.
        exact = cfg.subframe_length_ns
        if abs(us(stated_subframe_us) - exact) > cfg.symbol_length_ns:
            raise ConfigError(
                f"SubframeLength {stated_subframe_us} us is inconsistent with "
                f"{cfg.symbols_per_subframe} x {cfg.symbol_length_ns} ns symbols")
    return cfg


def config_field_names() -> list[str]:
    return [f.name for f in fields(PhyMacConfig)]

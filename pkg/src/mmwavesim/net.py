"""End-to-end plumbing above the radio: fixed-delay core links, traffic
sources, and the remote-host TCP application wired through the cell."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .engine import NS_PER_S, Simulator


@dataclass
class DelayLink:
    """Point-to-point link with a one-way delay and optional finite rate
    (serialization is modeled with a busy cursor)."""

    sim: Simulator
    one_way_delay_ns: int
    rate_bps: float = 0.0   # 0 = infinite

    def __post_init__(self) -> None:
        if self.one_way_delay_ns < 0:
            raise ValueError("delay must be >= 0")
        self._busy_until = 0

    def send(self, payload: object, size_bytes: int,
             deliver: Callable[[object], None]) -> None:
        depart = self.sim.now
        if self.rate_bps > 0:
            depart = max(depart, self._busy_until)
            depart += int(size_bytes * 8.0 / self.rate_bps * NS_PER_S)
            self._busy_until = depart
        self.sim.schedule(depart + self.one_way_delay_ns,
                          lambda: deliver(payload))


class CbrSource:
    """Constant-rate packet generator feeding a callback."""

    def __init__(self, sim: Simulator, rate_bps: float, packet_bytes: int,
                 emit: Callable[[int, int], None]) -> None:
        if rate_bps <= 0 or packet_bytes <= 0:
            raise ValueError("rate and packet size must be positive")
        self.sim = sim
        self.packet_bytes = packet_bytes
        self.interval_ns = max(1, int(packet_bytes * 8.0 / rate_bps * NS_PER_S))
        self.emit = emit
        self._count = 0

    def start(self) -> None:
        self.sim.schedule_in(self.interval_ns, self._tick)

    def _tick(self) -> None:
        self.emit(self._count, self.packet_bytes)
        self._count += 1
        self.sim.schedule_in(self.interval_ns, self._tick)

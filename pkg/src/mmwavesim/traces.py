"""Schema-stable CSV trace writers. Every file carries a fixed header and
deterministic formatting so identical (seed, config) runs are byte-identical.
"""

from __future__ import annotations

import os
from typing import IO, Optional

TB_HEADER = ["time", "userId", "direction", "mcs", "tbBits", "effSinrDb",
             "outcome", "retxCount"]
ALLOC_HEADER = ["frame", "subframe", "startSym", "numSym", "dir", "kind",
                "userId", "mcs", "retx"]
RLC_HEADER = ["time", "flow", "enqueued", "dequeued", "occupancyBytes",
              "holDelayMs", "drops"]
TCP_HEADER = ["time", "cwndBytes", "ssthreshBytes", "rttMs", "goodputMbps", "state"]
SINR_HEADER = ["time", "userId", "state", "avgSinrDb"]
EVENT_HEADER = ["time", "userId", "event", "state"]


def fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


class CsvTrace:
    def __init__(self, path: str, header: list[str]) -> None:
        self.path = path
        self._f: IO[str] = open(path, "w", buffering=1 << 16)
        self._f.write(",".join(header) + "\n")

    def row(self, *values) -> None:
        self._f.write(",".join(fmt(v) for v in values) + "\n")

    def close(self) -> None:
        if not self._f.closed:
            self._f.close()


class TraceSet:
    """Optional per-run trace files, enabled per scenario flags."""

    def __init__(self, out_dir: str, enable: dict[str, bool]) -> None:
        os.makedirs(out_dir, exist_ok=True)
        self.out_dir = out_dir

        def maybe(name: str, filename: str, header: list[str]) -> Optional[CsvTrace]:
            return CsvTrace(os.path.join(out_dir, filename), header) \
                if enable.get(name, False) else None

        self.tb = maybe("tb", "phy_tb.csv", TB_HEADER)
        self.alloc = maybe("alloc", "alloc.csv", ALLOC_HEADER)
        self.rlc = maybe("rlc", "rlc.csv", RLC_HEADER)
        self.tcp = maybe("tcp", "tcp.csv", TCP_HEADER)
        self.sinr = maybe("sinr", "sinr.csv", SINR_HEADER)
        self.events = maybe("events", "channel_events.csv", EVENT_HEADER)

    def close(self) -> None:
        for t in (self.tb, self.alloc, self.rlc, self.tcp, self.sinr, self.events):
            if t is not None:
                t.close()

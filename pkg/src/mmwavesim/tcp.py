"""TCP New Reno sender and receiver operating on the simulator clock.

The sender models a byte stream: the application offers data as a fluid rate
(or unbounded), segments are (seq, length) pairs, and the receiver returns
cumulative ACK numbers. Delayed ACKs are disabled; one ACK per segment.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

from .engine import NS_PER_S, EventHandle, Simulator

DEFAULT_MSS = 1400
SEGMENT_HEADER_BYTES = 40
RTO_MIN_S = 0.2
RTO_MAX_S = 60.0


class TcpPhase(enum.Enum):
    SLOW_START = "SlowStart"
    CONGESTION_AVOIDANCE = "CongestionAvoidance"
    FAST_RECOVERY = "FastRecovery"


def rtt_update(srtt: Optional[float], rttvar: Optional[float], sample: float,
               rto_min: float = RTO_MIN_S) -> tuple[float, float, float]:
    """Jacobson/Karels smoothing (alpha=1/8, beta=1/4); rto floored."""
    if srtt is None:
        srtt = sample
        rttvar = sample / 2.0
    else:
        rttvar = 0.75 * rttvar + 0.25 * abs(srtt - sample)
        srtt = 0.875 * srtt + 0.125 * sample
    rto = max(srtt + 4.0 * rttvar, rto_min)
    return srtt, rttvar, min(rto, RTO_MAX_S)


class NewRenoSender:
    """New Reno congestion control over a byte stream.

    transmit(seq, length, is_retx) is called for every segment put on the
    wire; the caller owns delivery and feeds ACKs back via on_ack().
    """

    def __init__(self, sim: Simulator,
                 transmit: Callable[[int, int, bool], None],
                 mss: int = DEFAULT_MSS,
                 ssthresh_segments: int = 6000,
                 send_buffer_bytes: int = 5 * 1024 * 1024,
                 app_rate_bps: float = 0.0,
                 init_cwnd_segments: int = 10,
                 rto_min_s: float = RTO_MIN_S) -> None:
        self.sim = sim
        self.transmit = transmit
        self.mss = mss
        self.cwnd = float(init_cwnd_segments * mss)
        self.ssthresh = float(ssthresh_segments * mss)
        self.send_buffer = send_buffer_bytes
        self.app_rate_bps = app_rate_bps   # 0 = full buffer (unbounded)
        self.rto_min = rto_min_s

        self.phase = TcpPhase.SLOW_START
        self.snd_una = 0
        self.snd_nxt = 0
        self.dup_acks = 0
        self.recover = 0

        self.srtt: Optional[float] = None
        self.rttvar: Optional[float] = None
        self.rto = 1.0
        self._rto_timer: Optional[EventHandle] = None
        self._app_timer: Optional[EventHandle] = None
        self._send_times: deque[tuple[int, int, bool]] = deque()  # (seq_end, sent_at, retx)
        self._app_start: Optional[int] = None

        self.retransmissions = 0
        self.timeouts = 0
        self.rtt_samples: list[tuple[int, float]] = []
        self._rtt_sample_gap_ns = 5 * 1_000_000  # thin the recorded samples

    # -- application ---------------------------------------------------------

    def start(self) -> None:
        self._app_start = self.sim.now
        self.try_send()

    def _app_limit(self) -> Optional[int]:
        """Highest byte the application has offered so far (None = unbounded)."""
        if self.app_rate_bps <= 0:
            return None
        assert self._app_start is not None
        elapsed = (self.sim.now - self._app_start) / NS_PER_S
        return int(self.app_rate_bps * elapsed / 8.0)

    @property
    def flight(self) -> int:
        return self.snd_nxt - self.snd_una

    def _usable_window(self) -> int:
        return int(min(self.cwnd, self.send_buffer)) - self.flight

    def try_send(self) -> None:
        """Transmit as much new data as cwnd, send buffer and the application
        allow; parks a timer when rate-limited mid-window."""
        limit = self._app_limit()
        while True:
            usable = self._usable_window()
            if usable < 1:
                return
            avail = self.mss if limit is None else min(limit - self.snd_nxt, self.mss)
            if avail < self.mss:
                if limit is not None and usable >= self.mss:
                    self._park_app_timer()
                return
            self._send(self.snd_nxt, self.mss, is_retx=False)
            self.snd_nxt += self.mss

    def _park_app_timer(self) -> None:
        if self._app_timer is not None and self._app_timer.active:
            return
        assert self._app_start is not None
        need = self.snd_nxt + self.mss
        at = self._app_start + int(need * 8.0 / self.app_rate_bps * NS_PER_S) + 1
        self._app_timer = self.sim.schedule(max(at, self.sim.now), self._on_app_timer)

    def _on_app_timer(self) -> None:
        self._app_timer = None
        self.try_send()

    # -- wire ------------------------------------------------------------------

    def _send(self, seq: int, length: int, is_retx: bool) -> None:
        if is_retx:
            self.retransmissions += 1
        else:
            self._send_times.append((seq + length, self.sim.now, False))
        self.transmit(seq, length, is_retx)
        if self._rto_timer is None or not self._rto_timer.active:
            self._arm_rto()

    def _arm_rto(self) -> None:
        if self._rto_timer is not None:
            self._rto_timer.cancel()
        self._rto_timer = self.sim.schedule_in(int(self.rto * NS_PER_S), self._on_rto)

    def _cancel_rto(self) -> None:
        if self._rto_timer is not None:
            self._rto_timer.cancel()
            self._rto_timer = None

    # -- ACK clock ---------------------------------------------------------------

    def on_ack(self, ack_no: int) -> None:
        if ack_no > self.snd_una:
            self._on_new_ack(ack_no)
        elif ack_no == self.snd_una and self.flight > 0:
            self._on_dup_ack()
        self.try_send()

    def _sample_rtt(self, ack_no: int) -> None:
        sample: Optional[float] = None
        while self._send_times and self._send_times[0][0] <= ack_no:
            seq_end, sent_at, retx = self._send_times.popleft()
            if not retx:
                sample = (self.sim.now - sent_at) / NS_PER_S
        if sample is not None and sample >= 0:
            self.srtt, self.rttvar, self.rto = rtt_update(
                self.srtt, self.rttvar, sample, self.rto_min)
            if (not self.rtt_samples
                    or self.sim.now - self.rtt_samples[-1][0] >= self._rtt_sample_gap_ns):
                self.rtt_samples.append((self.sim.now, sample))

    def _on_new_ack(self, ack_no: int) -> None:
        acked = ack_no - self.snd_una
        self.snd_una = ack_no
        self._sample_rtt(ack_no)

        if self.phase == TcpPhase.FAST_RECOVERY:
            if ack_no >= self.recover:
                self.cwnd = self.ssthresh
                self.phase = TcpPhase.CONGESTION_AVOIDANCE
                self.dup_acks = 0
            else:
                # partial ACK: retransmit the next hole, deflate the window
                self._send(self.snd_una, min(self.mss, self.flight or self.mss), is_retx=True)
                self.cwnd = max(self.cwnd - acked + self.mss, float(self.mss))
        else:
            self.dup_acks = 0
            if self.cwnd < self.ssthresh:
                self.cwnd += self.mss
                if self.cwnd >= self.ssthresh:
                    self.phase = TcpPhase.CONGESTION_AVOIDANCE
            else:
                self.phase = TcpPhase.CONGESTION_AVOIDANCE
                self.cwnd += self.mss * self.mss / self.cwnd

        if self.flight == 0:
            self._cancel_rto()
        else:
            self._arm_rto()

    def _on_dup_ack(self) -> None:
        if self.phase == TcpPhase.FAST_RECOVERY:
            self.cwnd += self.mss
            return
        self.dup_acks += 1
        if self.dup_acks == 3:
            self.ssthresh = max(self.flight / 2.0, 2.0 * self.mss)
            self.cwnd = self.ssthresh + 3.0 * self.mss
            self.phase = TcpPhase.FAST_RECOVERY
            self.recover = self.snd_nxt
            self._send(self.snd_una, min(self.mss, self.flight), is_retx=True)

    def _on_rto(self) -> None:
        self._rto_timer = None
        if self.flight == 0:
            return
        self.timeouts += 1
        self.ssthresh = max(self.flight / 2.0, 2.0 * self.mss)
        self.cwnd = float(self.mss)
        self.phase = TcpPhase.SLOW_START
        self.dup_acks = 0
        self._send_times.clear()  # Karn: no samples across a timeout
        self._send(self.snd_una, min(self.mss, self.flight), is_retx=True)
        self.rto = min(self.rto * 2.0, RTO_MAX_S)
        self._arm_rto()


class TcpReceiver:
    """In-order byte-stream receiver; returns one cumulative ACK per segment."""

    def __init__(self) -> None:
        self.rcv_nxt = 0
        self._ooo: list[tuple[int, int]] = []  # sorted disjoint (start, end)
        self.bytes_delivered = 0
        self.segments_received = 0

    def on_segment(self, seq: int, length: int) -> int:
        self.segments_received += 1
        end = seq + length
        if end > self.rcv_nxt:
            if seq <= self.rcv_nxt:
                self.rcv_nxt = end
                self._drain_ooo()
            else:
                self._insert_ooo(seq, end)
        self.bytes_delivered = self.rcv_nxt
        return self.rcv_nxt

    def _insert_ooo(self, start: int, end: int) -> None:
        merged = []
        placed = False
        for s, e in self._ooo:
            if e < start or s > end:
                merged.append((s, e))
            else:
                start, end = min(s, start), max(e, end)
        for i, (s, e) in enumerate(merged):
            if start < s:
                merged.insert(i, (start, end))
                placed = True
                break
        if not placed:
            merged.append((start, end))
        self._ooo = merged

    def _drain_ooo(self) -> None:
        while self._ooo and self._ooo[0][0] <= self.rcv_nxt:
            s, e = self._ooo.pop(0)
            if e > self.rcv_nxt:
                self.rcv_nxt = e

"""Link-layer buffering between traffic sources and the MAC: saturation,
unacknowledged and (simplified) acknowledged modes, segmentation against
scheduler grants, ARQ re-delivery on HARQ exhaustion, and in-order
reassembly at the receiver.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

SEGMENT_HEADER_BYTES = 2
DEFAULT_AM_CAPACITY = 10 * 1024 * 1024
DEFAULT_UM_CAPACITY = 1 * 1024 * 1024
DEFAULT_ARQ_MAX_RETX = 4
DEFAULT_SM_BSR_BYTES = 4 * 1024 * 1024


class RlcMode(enum.Enum):
    SM = "sm"   # saturation: infinite backlog, fabricated payload
    UM = "um"
    AM = "am"


@dataclass
class _QueuedSdu:
    seq: int
    size: int
    arrival: int
    sdu: object = None
    offset: int = 0          # bytes already handed to MAC

    @property
    def remaining(self) -> int:
        return self.size - self.offset


@dataclass
class PduSegment:
    """One RLC PDU (possibly a segment of an SDU) as carried inside a TB."""

    seq: int
    offset: int
    length: int
    sdu_size: int
    arrival: int
    sdu: object = None
    retx_count: int = 0

    @property
    def wire_bytes(self) -> int:
        return self.length + SEGMENT_HEADER_BYTES


class RlcTxBuffer:
    """Sender-side queue for one flow. AM keeps a retransmission queue that
    is always served before new data."""

    def __init__(self, mode: RlcMode, capacity_bytes: Optional[int] = None,
                 arq_max_retx: int = DEFAULT_ARQ_MAX_RETX,
                 sm_bsr_bytes: int = DEFAULT_SM_BSR_BYTES) -> None:
        self.mode = mode
        if capacity_bytes is None:
            capacity_bytes = DEFAULT_AM_CAPACITY if mode == RlcMode.AM else DEFAULT_UM_CAPACITY
        self.capacity_bytes = capacity_bytes
        self.arq_max_retx = arq_max_retx
        self.sm_bsr_bytes = sm_bsr_bytes
        self.queue: deque[_QueuedSdu] = deque()
        self.retx_queue: deque[PduSegment] = deque()
        self._next_seq = 0
        self.drops = 0
        self.bytes_enqueued = 0
        self.bytes_dequeued = 0
        self.lost_sdus: list[PduSegment] = []

    # -- ingress -------------------------------------------------------------

    def enqueue(self, size_bytes: int, now: int, sdu: object = None) -> bool:
        """Append an SDU if it fits; SM fabricates payload and accepts nothing."""
        if self.mode == RlcMode.SM:
            return False
        if self._occupancy() + size_bytes > self.capacity_bytes:
            self.drops += 1
            return False
        self.queue.append(_QueuedSdu(self._next_seq, size_bytes, now, sdu))
        self._next_seq += 1
        self.bytes_enqueued += size_bytes
        return True

    # -- egress --------------------------------------------------------------

    def dequeue_for_grant(self, grant_bytes: int, now: int) -> list[PduSegment]:
        """Fill up to grant_bytes with PDU segments (2-byte header each),
        retransmissions first, segmenting the head SDU when needed."""
        out: list[PduSegment] = []
        left = grant_bytes
        while self.retx_queue and left > SEGMENT_HEADER_BYTES:
            seg = self.retx_queue[0]
            take = min(seg.length, left - SEGMENT_HEADER_BYTES)
            if take == seg.length:
                self.retx_queue.popleft()
                out.append(seg)
            else:
                out.append(PduSegment(seg.seq, seg.offset, take, seg.sdu_size,
                                      seg.arrival, seg.sdu, seg.retx_count))
                seg.offset += take
                seg.length -= take
            left -= take + SEGMENT_HEADER_BYTES
            self.bytes_dequeued += take

        if self.mode == RlcMode.SM:
            if left > SEGMENT_HEADER_BYTES:
                payload = left - SEGMENT_HEADER_BYTES
                out.append(PduSegment(self._next_seq, 0, payload, payload, now))
                self._next_seq += 1
                self.bytes_dequeued += payload
            return out

        while self.queue and left > SEGMENT_HEADER_BYTES:
            head = self.queue[0]
            take = min(head.remaining, left - SEGMENT_HEADER_BYTES)
            out.append(PduSegment(head.seq, head.offset, take, head.size,
                                  head.arrival, head.sdu))
            head.offset += take
            left -= take + SEGMENT_HEADER_BYTES
            self.bytes_dequeued += take
            if head.remaining == 0:
                self.queue.popleft()
        return out

    # -- ARQ -----------------------------------------------------------------

    def harq_drop_notification(self, segments: list[PduSegment]) -> list[PduSegment]:
        """Segments whose TB exhausted HARQ. AM re-queues them (up to the ARQ
        cap) ahead of new data; UM/SM surface the loss. Returns segments that
        are definitively lost."""
        lost: list[PduSegment] = []
        for seg in segments:
            if self.mode == RlcMode.AM and seg.retx_count < self.arq_max_retx:
                self.retx_queue.append(PduSegment(
                    seg.seq, seg.offset, seg.length, seg.sdu_size,
                    seg.arrival, seg.sdu, seg.retx_count + 1))
                self.bytes_dequeued -= seg.length
            else:
                lost.append(seg)
        self.lost_sdus.extend(lost)
        return lost

    # -- status ---------------------------------------------------------------

    def _occupancy(self) -> int:
        q = sum(s.remaining for s in self.queue)
        q += SEGMENT_HEADER_BYTES * len(self.queue)
        q += sum(s.length + SEGMENT_HEADER_BYTES for s in self.retx_queue)
        return q

    def buffer_status(self) -> int:
        """BSR occupancy in bytes, including pending segment headers.
        Saturation mode always reports the configured constant."""
        if self.mode == RlcMode.SM:
            return self.sm_bsr_bytes
        return self._occupancy()

    def head_of_line_arrival(self, now: int) -> int:
        if self.retx_queue:
            return self.retx_queue[0].arrival
        if self.queue:
            return self.queue[0].arrival
        return now


class RlcReassembly:
    """Receiver side: collects segments, completes SDUs and delivers them
    strictly in sequence order (gap-free unless a PDU was abandoned)."""

    def __init__(self, mode: RlcMode,
                 deliver: Optional[Callable[[object, int, int], None]] = None) -> None:
        self.mode = mode
        self._deliver = deliver
        self._pending: dict[int, tuple[int, int, object, int]] = {}  # seq -> (got, size, sdu, arrival)
        self._abandoned: set[int] = set()
        self._expected = 0
        self.bytes_received = 0
        self.bytes_delivered = 0
        self.sdus_delivered = 0
        self.sdus_lost = 0

    def on_segment(self, seg: PduSegment, now: int) -> None:
        if self.mode == RlcMode.SM:
            # saturation payload: no reassembly semantics, count it delivered
            self.bytes_received += seg.length
            self.bytes_delivered += seg.length
            self.sdus_delivered += 1
            if self._deliver is not None:
                self._deliver(seg.sdu, seg.length, now)
            return
        if seg.seq < self._expected or seg.seq in self._abandoned:
            return
        got, size, sdu, arrival = self._pending.get(
            seg.seq, (0, seg.sdu_size, seg.sdu, seg.arrival))
        got += seg.length
        sdu = sdu if sdu is not None else seg.sdu
        self._pending[seg.seq] = (got, size, sdu, arrival)
        self.bytes_received += seg.length
        self._advance(now)

    def abandon(self, seq: int) -> None:
        """Mark a sequence number as permanently lost so delivery can skip it."""
        if seq >= self._expected:
            self._abandoned.add(seq)
            self._pending.pop(seq, None)
            self.sdus_lost += 1

    def flush_abandoned(self, now: int) -> None:
        self._advance(now)

    def _advance(self, now: int) -> None:
        while True:
            if self._expected in self._abandoned:
                self._abandoned.discard(self._expected)
                self._expected += 1
                continue
            entry = self._pending.get(self._expected)
            if entry is None:
                return
            got, size, sdu, _ = entry
            if got < size:
                return
            del self._pending[self._expected]
            self.bytes_delivered += size
            self.sdus_delivered += 1
            if self._deliver is not None:
                self._deliver(sdu, size, now)
            self._expected += 1

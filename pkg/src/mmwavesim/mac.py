"""MAC layer: flow bookkeeping, multi-process stop-and-wait HARQ state, and
the two flexible-TTI TDMA schedulers (round-robin and earliest-deadline-first).

Every grant is a contiguous run of OFDM symbols. HARQ retransmissions are
placed before any new data and reuse the stored (symbol count, MCS) of the
original transmission.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .amc import MAC_HEADER_BYTES, Amc
from .engine import PhyMacConfig
from .error_model import SoftBuffer
from .phy import Direction, SlotAllocation, SlotKind, SubframeAllocation, TransportBlock

DEFAULT_MAX_RETX = 3
DEFAULT_QCI_DELAY_BUDGET_MS = 100.0

FlowKey = tuple[int, str]


@dataclass
class FlowState:
    user_id: int
    direction: Direction
    buffer_bytes: int = 0              # from BSR / local RLC occupancy
    cqi: Optional[int] = None
    qci_delay_budget_ns: int = int(DEFAULT_QCI_DELAY_BUDGET_MS * 1e6)
    head_of_line_arrival: int = 0

    @property
    def key(self) -> FlowKey:
        return (self.user_id, self.direction.value)


def select_mcs(flow: FlowState) -> int:
    """New-transmission MCS: the CQI-mapped index, conservatively 0 before
    any report exists. Retransmissions reuse their stored MCS elsewhere."""
    return 0 if flow.cqi is None else flow.cqi


@dataclass
class HarqProcessState:
    process_id: int
    pending_retx: bool = False
    awaiting_feedback: bool = False
    retx_scheduled: bool = False
    stored_num_symbols: int = 0
    stored_mcs: int = 0
    tx_count: int = 0
    soft: SoftBuffer = field(default_factory=SoftBuffer)
    tb: Optional[TransportBlock] = None

    @property
    def idle(self) -> bool:
        return not (self.pending_retx or self.awaiting_feedback)

    def clear(self) -> None:
        self.pending_retx = False
        self.awaiting_feedback = False
        self.retx_scheduled = False
        self.stored_num_symbols = 0
        self.stored_mcs = 0
        self.tx_count = 0
        self.tb = None
        self.soft.reset()


class HarqEntity:
    """All HARQ processes of one (user, direction)."""

    def __init__(self, user_id: int, direction: Direction, num_processes: int,
                 max_retx: int = DEFAULT_MAX_RETX) -> None:
        self.user_id = user_id
        self.direction = direction
        self.max_retx = max_retx
        self.processes = [HarqProcessState(i) for i in range(num_processes)]
        self.ignored_feedback = 0
        self.busy_count = 0       # processes not idle
        self.pending_count = 0    # processes with a retransmission pending

    def free_process(self) -> Optional[HarqProcessState]:
        if self.busy_count >= len(self.processes):
            return None
        for p in self.processes:
            if p.idle:
                return p
        return None

    def pending_retx(self) -> list[HarqProcessState]:
        if self.pending_count == 0:
            return []
        return [p for p in self.processes if p.pending_retx]

    def on_transmit(self, pid: int, tb: TransportBlock, num_symbols: int) -> None:
        p = self.processes[pid]
        if p.idle:
            self.busy_count += 1
        if p.pending_retx:
            self.pending_count -= 1
        p.awaiting_feedback = True
        p.pending_retx = False
        p.retx_scheduled = False
        p.stored_num_symbols = num_symbols
        p.stored_mcs = tb.mcs
        p.tx_count += 1
        p.tb = tb

    def _release(self, p: HarqProcessState) -> None:
        if p.pending_retx:
            self.pending_count -= 1
        p.clear()
        self.busy_count -= 1

    def feedback(self, pid: int, decoded: bool) -> Optional[TransportBlock]:
        """Apply ACK/NACK; returns the dropped TB when retransmissions are
        exhausted (so RLC ARQ can be notified), else None."""
        if pid < 0 or pid >= len(self.processes):
            raise ValueError(f"HARQ process id {pid} out of range")
        p = self.processes[pid]
        if not p.awaiting_feedback:
            self.ignored_feedback += 1
            return None
        p.awaiting_feedback = False
        if decoded:
            self._release(p)
            return None
        if p.tx_count > self.max_retx:
            dropped = p.tb
            self._release(p)
            return dropped
        p.pending_retx = True
        self.pending_count += 1
        return None


@dataclass
class PendingRetx:
    user_id: int
    direction: Direction
    process_id: int
    num_symbols: int
    mcs: int


@dataclass
class Grant:
    flow: FlowState
    num_symbols: int
    mcs: int
    is_retx: bool = False
    process_id: int = -1


class SchedulerBase:
    """Common allocation machinery: HARQ-first placement and the fixed
    subframe layout (DL ctrl | DL data.. | guard | UL data.. | UL ctrl)."""

    name = "base"

    def __init__(self, cfg: PhyMacConfig, amc: Amc,
                 fixed_tti_symbols: int = 0) -> None:
        self.cfg = cfg
        self.amc = amc
        self.fixed_tti = fixed_tti_symbols

    # -- hooks ---------------------------------------------------------------

    def _order_flows(self, flows: list[FlowState], now: int) -> list[FlowState]:
        raise NotImplementedError

    def _assign(self, ordered: list[FlowState], needs: dict[FlowKey, int],
                available: int) -> dict[FlowKey, int]:
        raise NotImplementedError

    # -- main entry ------------------------------------------------------------

    def required_symbols(self, flow: FlowState) -> int:
        if flow.buffer_bytes <= 0:
            return 0
        mcs = select_mcs(flow)
        need = self.amc.num_symbols_for_bits(
            mcs, 8 * (flow.buffer_bytes + MAC_HEADER_BYTES))
        if self.fixed_tti > 0:
            need = self.fixed_tti
        return min(need, self.amc.max_symbols)

    def schedule(self, frame_index: int, subframe_index: int, now: int,
                 flows: list[FlowState], retx: list[PendingRetx]) -> SubframeAllocation:
        cfg = self.cfg
        available = cfg.data_symbols_per_subframe

        grants: list[Grant] = []
        placed_retx: list[PendingRetx] = []
        for r in sorted(retx, key=lambda r: (r.user_id, r.direction.value, r.process_id)):
            if r.num_symbols <= available:
                available -= r.num_symbols
                placed_retx.append(r)

        eligible = [f for f in flows if self.required_symbols(f) > 0]
        if eligible and available > 0:
            ordered = self._order_flows(eligible, now)
            needs = {f.key: self.required_symbols(f) for f in ordered}
            shares = self._assign(ordered, needs, available)
            for f in ordered:
                s = shares.get(f.key, 0)
                if s > 0:
                    if self.fixed_tti > 0:
                        s = min(self.fixed_tti, s)
                    grants.append(Grant(f, s, select_mcs(f)))

        return self._layout(frame_index, subframe_index, placed_retx, grants)

    # -- layout ------------------------------------------------------------

    def _layout(self, frame_index: int, subframe_index: int,
                retx: list[PendingRetx], grants: list[Grant]) -> SubframeAllocation:
        cfg = self.cfg
        slots: list[SlotAllocation] = [SlotAllocation(
            0, cfg.num_dl_ctrl_symbols, Direction.DL, SlotKind.CTRL)]

        dl: list[SlotAllocation] = []
        ul: list[SlotAllocation] = []
        for r in retx:
            slot = SlotAllocation(0, r.num_symbols, r.direction, SlotKind.DATA,
                                  user_id=r.user_id, mcs=r.mcs,
                                  harq_process_id=r.process_id, is_retx=True)
            (dl if r.direction == Direction.DL else ul).append(slot)
        for g in grants:
            slot = SlotAllocation(0, g.num_symbols, g.flow.direction, SlotKind.DATA,
                                  user_id=g.flow.user_id, mcs=g.mcs,
                                  harq_process_id=-1, is_retx=False,
                                  tb_size_bits=self.amc.tb_size_bits(g.mcs, g.num_symbols))
            (dl if g.flow.direction == Direction.DL else ul).append(slot)

        ul_ctrl_start = cfg.symbols_per_subframe - cfg.num_ul_ctrl_symbols
        cursor = cfg.num_dl_ctrl_symbols
        for s in dl:
            s.start_symbol = cursor
            cursor += s.num_symbols
        if dl or ul:
            ul_total = sum(s.num_symbols for s in ul)
            guard_start = ul_ctrl_start - ul_total - cfg.guard_symbols
            slots_guard = SlotAllocation(guard_start, cfg.guard_symbols,
                                         Direction.UL, SlotKind.GUARD)
            cursor = guard_start + cfg.guard_symbols
            for s in ul:
                s.start_symbol = cursor
                cursor += s.num_symbols
            slots.extend(dl)
            slots.append(slots_guard)
            slots.extend(ul)
        slots.append(SlotAllocation(ul_ctrl_start, cfg.num_ul_ctrl_symbols,
                                    Direction.UL, SlotKind.CTRL))
        alloc = SubframeAllocation(frame_index, subframe_index, slots)
        alloc.validate(cfg)
        return alloc


class RoundRobinScheduler(SchedulerBase):
    """Even split with need-capping and one-symbol-at-a-time surplus
    redistribution; the starting flow rotates across subframes."""

    name = "rr"

    def __init__(self, cfg: PhyMacConfig, amc: Amc, fixed_tti_symbols: int = 0) -> None:
        super().__init__(cfg, amc, fixed_tti_symbols)
        self._cursor: Optional[FlowKey] = None

    def _order_flows(self, flows: list[FlowState], now: int) -> list[FlowState]:
        ordered = sorted(flows, key=lambda f: (f.user_id, f.direction.value))
        if self._cursor is not None:
            keys = [f.key for f in ordered]
            start = 0
            for i, k in enumerate(keys):
                if k > self._cursor:
                    start = i
                    break
            else:
                start = 0
            ordered = ordered[start:] + ordered[:start]
        self._cursor = ordered[0].key
        return ordered

    def _assign(self, ordered: list[FlowState], needs: dict[FlowKey, int],
                available: int) -> dict[FlowKey, int]:
        n = len(ordered)
        share, leftover = divmod(available, n)
        grant: dict[FlowKey, int] = {}
        for i, f in enumerate(ordered):
            grant[f.key] = share + (1 if i < leftover else 0)
        surplus = 0
        for f in ordered:
            if grant[f.key] > needs[f.key]:
                surplus += grant[f.key] - needs[f.key]
                grant[f.key] = needs[f.key]
        while surplus > 0:
            gave = False
            for f in ordered:
                if surplus == 0:
                    break
                if grant[f.key] < needs[f.key]:
                    grant[f.key] += 1
                    surplus -= 1
                    gave = True
            if not gave:
                break
        return grant


class EdfScheduler(SchedulerBase):
    """Earliest deadline first: flows sorted by head-of-line deadline derived
    from the QCI delay budget, greedily filled; ties to the lower user id."""

    name = "edf"

    def _order_flows(self, flows: list[FlowState], now: int) -> list[FlowState]:
        def deadline(f: FlowState) -> int:
            return f.head_of_line_arrival + f.qci_delay_budget_ns - now
        return sorted(flows, key=lambda f: (deadline(f), f.user_id, f.direction.value))

    def _assign(self, ordered: list[FlowState], needs: dict[FlowKey, int],
                available: int) -> dict[FlowKey, int]:
        grant: dict[FlowKey, int] = {}
        remaining = available
        for f in ordered:
            if remaining == 0:
                break
            s = min(needs[f.key], remaining)
            grant[f.key] = s
            remaining -= s
        return grant


def make_scheduler(name: str, cfg: PhyMacConfig, amc: Amc,
                   fixed_tti_symbols: int = 0) -> SchedulerBase:
    if name == "rr":
        return RoundRobinScheduler(cfg, amc, fixed_tti_symbols)
    if name == "edf":
        return EdfScheduler(cfg, amc, fixed_tti_symbols)
    raise ValueError(f"unknown scheduler: {name}")

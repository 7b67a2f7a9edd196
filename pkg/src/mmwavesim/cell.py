"""Single-cell radio stack: one eNB, its UEs, the per-link channels, the TDMA
scheduler, HARQ entities, RLC buffers and optional TCP endpoints, all driven
by one subframe-cadence event chain.

Cross-layer wiring is direct (in-process calls with modeled delays) rather
than protocol messaging: BSR/CQI reports reach the scheduler with a
one-subframe delay over ideal control symbols, HARQ feedback becomes visible
at the indication that follows TB delivery, and decoded TBs are handed to
the RLC exactly `phy_mac_data_latency` subframes after reception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .amc import MAC_HEADER_BYTES, Amc
from .antenna import AntennaArray
from .channel import ChannelConfig, LinkChannel, RayTraceRoute, load_ray_trace
from .engine import NS_PER_S, PhyMacConfig, RngStreams, Simulator, seconds, to_seconds
from .error_model import BlerTable, decode_tb_db, default_bler_table, mi_tables
from .mac import (FlowState, HarqEntity, PendingRetx, SchedulerBase, make_scheduler)
from .net import CbrSource, DelayLink
from .phy import (Direction, SlotAllocation, SlotKind, SubframeAllocation,
                  TransportBlock, compute_sinr, noise_power_dbm)
from .rlc import PduSegment, RlcMode, RlcReassembly, RlcTxBuffer
from .scenario import Scenario
from .scene import ChannelState, MobilityTrack, channel_state
from .tcp import SEGMENT_HEADER_BYTES as TCP_HEADER_BYTES
from .tcp import NewRenoSender, TcpReceiver
from .traces import TraceSet

ACK_BYTES = TCP_HEADER_BYTES


@dataclass
class DirStats:
    tb_transmissions: int = 0
    tb_errors: int = 0
    tb_first_tx: int = 0
    decoded_bits: int = 0
    harq_drops: int = 0
    mcs_hist: dict[int, int] = field(default_factory=dict)
    sinr_db_sum: float = 0.0
    sinr_count: int = 0

    def record_tx(self, mcs: int, decoded: bool, first: bool, wideband_sinr_db: float) -> None:
        self.tb_transmissions += 1
        if first:
            self.tb_first_tx += 1
        if not decoded:
            self.tb_errors += 1
        self.mcs_hist[mcs] = self.mcs_hist.get(mcs, 0) + 1
        self.sinr_db_sum += wideband_sinr_db
        self.sinr_count += 1

    @property
    def tb_error_rate(self) -> float:
        return self.tb_errors / self.tb_transmissions if self.tb_transmissions else 0.0

    @property
    def avg_sinr_db(self) -> float:
        return self.sinr_db_sum / self.sinr_count if self.sinr_count else float("nan")

    @property
    def modal_mcs(self) -> int:
        if not self.mcs_hist:
            return -1
        best = max(sorted(self.mcs_hist.items()), key=lambda kv: kv[1])
        return best[0]


class UeContext:
    def __init__(self, user_id: int, track: MobilityTrack, link: LinkChannel,
                 cfg: PhyMacConfig, max_retx: int) -> None:
        self.user_id = user_id
        self.track = track
        self.link = link
        self.harq = {
            Direction.DL: HarqEntity(user_id, Direction.DL, cfg.num_harq_processes, max_retx),
            Direction.UL: HarqEntity(user_id, Direction.UL, cfg.num_harq_processes, max_retx),
        }
        self.tx_rlc: dict[Direction, Optional[RlcTxBuffer]] = {
            Direction.DL: None, Direction.UL: None}
        self.rx_rlc: dict[Direction, Optional[RlcReassembly]] = {
            Direction.DL: None, Direction.UL: None}
        self.cqi: dict[Direction, Optional[int]] = {Direction.DL: None, Direction.UL: None}
        self.bsr_snapshot = 0
        self.bsr_hol = 0
        self.stats = {Direction.DL: DirStats(), Direction.UL: DirStats()}
        self.state_samples: dict[str, int] = {}
        self.app: Optional["TcpDownlinkApp"] = None

    def state_fraction(self, state: ChannelState) -> float:
        total = sum(self.state_samples.values())
        return self.state_samples.get(state.value, 0) / total if total else 0.0


class TcpDownlinkApp:
    """Remote host -> core links -> eNB RLC -> radio -> UE TCP receiver, with
    ACKs riding the uplink back through the core."""

    def __init__(self, sim: Simulator, ue: UeContext, scenario: Scenario) -> None:
        self.sim = sim
        self.ue = ue
        spec = scenario.tcp
        delay = seconds(spec.core_hop_delay_ms / 1e3)
        self.host_pgw = DelayLink(sim, delay)
        self.pgw_enb = DelayLink(sim, delay)
        self.enb_pgw = DelayLink(sim, delay)
        self.pgw_host = DelayLink(sim, delay)
        self.sender = NewRenoSender(
            sim, self._stage_segment, mss=spec.mss,
            ssthresh_segments=spec.ssthresh_segments,
            send_buffer_bytes=spec.buffer_bytes,
            app_rate_bps=scenario.traffic.rate_bps,
            init_cwnd_segments=spec.init_cwnd_segments,
            rto_min_s=spec.rto_min_s)
        self.receiver = TcpReceiver()
        self._outbox: list[tuple[int, int]] = []
        self._flush_pending = False
        self._acks_to_host: list[int] = []
        self._ack_flush_pending = False
        self._last_goodput_bytes = 0

    def start(self) -> None:
        self.sender.start()

    # -- downlink data path ----------------------------------------------

    def _stage_segment(self, seq: int, length: int, is_retx: bool) -> None:
        self._outbox.append((seq, length))
        if not self._flush_pending:
            self._flush_pending = True
            self.sim.schedule(self.sim.now, self._flush)

    def _flush(self) -> None:
        self._flush_pending = False
        batch, self._outbox = self._outbox, []
        if batch:
            self.host_pgw.send(batch, sum(l for _, l in batch),
                               lambda b: self.pgw_enb.send(
                                   b, sum(l for _, l in b), self._arrive_enb))

    def _arrive_enb(self, batch: list[tuple[int, int]]) -> None:
        buf = self.ue.tx_rlc[Direction.DL]
        assert buf is not None
        for seq, length in batch:
            buf.enqueue(length + TCP_HEADER_BYTES, self.sim.now, sdu=("D", seq, length))

    def on_dl_sdu(self, sdu: object, size: int, now: int) -> None:
        if not (isinstance(sdu, tuple) and sdu and sdu[0] == "D"):
            return
        _, seq, length = sdu
        ack = self.receiver.on_segment(seq, length)
        ul = self.ue.tx_rlc[Direction.UL]
        assert ul is not None
        ul.enqueue(ACK_BYTES, now, sdu=("A", ack))

    # -- uplink ACK path ----------------------------------------------------

    def on_ul_sdu(self, sdu: object, size: int, now: int) -> None:
        if not (isinstance(sdu, tuple) and sdu and sdu[0] == "A"):
            return
        self._acks_to_host.append(sdu[1])
        if not self._ack_flush_pending:
            self._ack_flush_pending = True
            self.sim.schedule(now, self._flush_acks)

    def _flush_acks(self) -> None:
        self._ack_flush_pending = False
        batch, self._acks_to_host = self._acks_to_host, []
        if batch:
            self.enb_pgw.send(batch, ACK_BYTES * len(batch),
                              lambda b: self.pgw_host.send(
                                  b, ACK_BYTES * len(b), self._arrive_host))

    def _arrive_host(self, batch: list[int]) -> None:
        for ack in batch:
            self.sender.on_ack(ack)

    def goodput_bytes_delta(self) -> int:
        cur = self.receiver.bytes_delivered
        delta = cur - self._last_goodput_bytes
        self._last_goodput_bytes = cur
        return delta


class Cell:
    """One eNB and its users under a TDMA variable-TTI frame."""

    def __init__(self, sim: Simulator, scenario: Scenario, streams: RngStreams,
                 traces: Optional[TraceSet] = None,
                 bler_table: Optional[BlerTable] = None) -> None:
        self.sim = sim
        self.scenario = scenario
        self.cfg = scenario.phy
        self.streams = streams
        self.traces = traces
        self.bler = bler_table if bler_table is not None else default_bler_table()
        self.amc = Amc(self.cfg)
        self.scheduler: SchedulerBase = make_scheduler(
            scenario.scheduler, self.cfg, self.amc, scenario.fixed_tti_symbols)

        self.subband_freqs = self.cfg.subband_freqs_hz()
        self._raytrace: Optional[RayTraceRoute] = None
        if scenario.channel.raytrace_file:
            self._raytrace = load_ray_trace(scenario.channel.raytrace_file)

        self.ues: list[UeContext] = []
        max_retx = scenario.max_retx if scenario.harq_enabled else 0
        for i, spec in enumerate(scenario.ues):
            track = spec.track()
            enb_array = AntennaArray(*scenario.enb_antenna)
            ue_array = AntennaArray(*scenario.ue_antenna)
            link = LinkChannel(
                f"link{i}", scenario.channel, enb_array, ue_array,
                self.subband_freqs, self.cfg.center_freq_hz,
                shadow_stream=streams.stream(f"shadow_{i}"),
                cluster_stream=streams.stream(f"cluster_{i}"),
                raytrace=self._raytrace)
            ue = UeContext(i, track, link, self.cfg, max_retx)
            self._setup_traffic(ue)
            self.ues.append(ue)

        self._decode_streams = [streams.stream(f"decode_{i}") for i in range(len(self.ues))]
        # per-subband (tx power / noise power) in linear terms, by direction
        cfg = self.cfg
        sb_split_db = 10.0 * math.log10(cfg.num_subbands)
        self._snr_factor = {
            Direction.DL: 10.0 ** ((scenario.enb_tx_power_dbm - sb_split_db - noise_power_dbm(
                cfg.subband_width_hz, scenario.ue_noise_figure_db)) / 10.0),
            Direction.UL: 10.0 ** ((scenario.ue_tx_power_dbm - sb_split_db - noise_power_dbm(
                cfg.subband_width_hz, scenario.enb_noise_figure_db)) / 10.0),
        }
        self._alloc_queue: dict[int, SubframeAllocation] = {}
        self._pending_delivery: dict[int, list[tuple[UeContext, Direction, TransportBlock]]] = {}
        self._pending_feedback: dict[int, list[tuple[UeContext, Direction, int, bool]]] = {}
        self._pending_cqi: dict[int, list[tuple[UeContext, Direction, int]]] = {}
        self._sf_index = 0
        self._end_sf = 0
        self._geom_period_sf = max(1, round(
            scenario.geometry_period_s * NS_PER_S / self.cfg.subframe_length_ns))
        self._sample_period_sf = max(1, round(
            scenario.sinr_sample_period_s * NS_PER_S / self.cfg.subframe_length_ns))
        self.unused_grants = 0

    # -- construction helpers ------------------------------------------------

    def _setup_traffic(self, ue: UeContext) -> None:
        s = self.scenario
        kind = s.traffic.type
        cap = {RlcMode.AM: s.am_capacity_bytes, RlcMode.UM: s.um_capacity_bytes,
               RlcMode.SM: 0}

        def tx(mode: RlcMode) -> RlcTxBuffer:
            return RlcTxBuffer(mode, cap[mode] or None, s.arq_max_retx, s.sm_bsr_bytes)

        if kind in ("full-buffer-dl", "cbr-dl"):
            mode = RlcMode.SM if kind == "full-buffer-dl" else s.dl_rlc_mode
            ue.tx_rlc[Direction.DL] = tx(mode)
            ue.rx_rlc[Direction.DL] = RlcReassembly(mode)
            if kind == "cbr-dl":
                src = CbrSource(self.sim, s.traffic.rate_bps, s.traffic.packet_bytes,
                                lambda n, size, u=ue: u.tx_rlc[Direction.DL].enqueue(
                                    size, self.sim.now))
                self.sim.schedule(0, src.start)
        elif kind in ("full-buffer-ul", "cbr-ul"):
            mode = RlcMode.SM if kind == "full-buffer-ul" else s.ul_rlc_mode
            ue.tx_rlc[Direction.UL] = tx(mode)
            ue.rx_rlc[Direction.UL] = RlcReassembly(mode)
            if kind == "cbr-ul":
                src = CbrSource(self.sim, s.traffic.rate_bps, s.traffic.packet_bytes,
                                lambda n, size, u=ue: u.tx_rlc[Direction.UL].enqueue(
                                    size, self.sim.now))
                self.sim.schedule(0, src.start)
        elif kind == "tcp-dl":
            app = TcpDownlinkApp(self.sim, ue, s)
            ue.app = app
            ue.tx_rlc[Direction.DL] = tx(s.dl_rlc_mode)
            ue.rx_rlc[Direction.DL] = RlcReassembly(s.dl_rlc_mode, deliver=app.on_dl_sdu)
            ue.tx_rlc[Direction.UL] = tx(s.ul_rlc_mode)
            ue.rx_rlc[Direction.UL] = RlcReassembly(s.ul_rlc_mode, deliver=app.on_ul_sdu)
            self.sim.schedule(0, app.start)
        elif kind == "none":
            pass
        else:
            raise ValueError(f"unhandled traffic type {kind}")

    # -- run ------------------------------------------------------------------

    def start(self, duration_s: float) -> None:
        self._end_sf = int(round(duration_s * NS_PER_S / self.cfg.subframe_length_ns))
        self._update_geometry()
        self._start_lt_timers()
        self.sim.schedule(0, self._on_subframe)

    def _start_lt_timers(self) -> None:
        if self._raytrace is not None:
            return
        for ue in self.ues:
            stream = self.streams.stream(f"lt_timer_{ue.user_id}")
            delay = ue.link.next_update_delay_ns(stream)
            self.sim.schedule(delay, lambda u=ue, s=stream: self._on_lt_timer(u, s))

    def _on_lt_timer(self, ue: UeContext, stream) -> None:
        if ue.link.long_term_update(self.sim.now):
            self._log_event(ue, "lt_update")
        self.sim.schedule_in(ue.link.next_update_delay_ns(stream),
                             lambda: self._on_lt_timer(ue, stream))

    # -- geometry ---------------------------------------------------------------

    def _update_geometry(self) -> None:
        now = self.sim.now
        s = self.scenario
        for ue in self.ues:
            pos = ue.track.position_at(now)
            heading = ue.track.heading_at(now)
            state = channel_state(s.enb_position, pos, s.buildings,
                                  s.channel.outage_distance_m)
            dist = s.enb_position.distance_to(pos)
            horiz = math.hypot(pos.x - s.enb_position.x, pos.y - s.enb_position.y)
            elev = math.atan2(s.enb_position.z - pos.z, max(horiz, 1e-6))
            speed = ue.track.speed_mps if heading is not None else 0.0
            if s.channel.awgn:
                speed, heading = 0.0, None
            ue.link.set_motion(speed, heading)
            changed = ue.link.update_geometry(dist, state, elev, now)
            if changed:
                self._log_event(ue, "state_change")

    def _log_event(self, ue: UeContext, event: str) -> None:
        if self.traces is not None and self.traces.events is not None:
            self.traces.events.row(to_seconds(self.sim.now), ue.user_id, event,
                                   ue.link.state.value)

    # -- subframe machinery ----------------------------------------------------

    def _on_subframe(self) -> None:
        n = self._sf_index
        now = self.sim.now
        cfg = self.cfg

        if n % self._geom_period_sf == 0 and n > 0:
            self._update_geometry()

        for ue, direction, tb in self._pending_delivery.pop(n, ()):  # decoded TBs
            self._deliver_tb(ue, direction, tb)
        for ue, direction, pid, decoded in self._pending_feedback.pop(n, ()):
            self._apply_feedback(ue, direction, pid, decoded)
        for ue, direction, cqi in self._pending_cqi.pop(n, ()):
            ue.cqi[direction] = cqi

        self._mac_indication(n)

        alloc = self._alloc_queue.pop(n, None)
        if alloc is not None:
            for slot in alloc.slots:
                if slot.kind == SlotKind.DATA:
                    self._process_data_slot(n, slot)

        if n % self._sample_period_sf == 0:
            self._sample_traces()

        for ue in self.ues:
            buf = ue.tx_rlc[Direction.UL]
            ue.bsr_snapshot = buf.buffer_status() if buf is not None else 0
            ue.bsr_hol = buf.head_of_line_arrival(now) if buf is not None else now

        self._sf_index += 1
        if self._sf_index < self._end_sf:
            self.sim.schedule(self._sf_index * cfg.subframe_length_ns, self._on_subframe)

    def _mac_indication(self, n: int) -> None:
        cfg = self.cfg
        now = self.sim.now
        target = n + cfg.mac_phy_data_latency
        if target >= self._end_sf:
            return
        budget_ns = int(self.scenario.qci_delay_budget_ms * 1e6)

        flows: list[FlowState] = []
        retx: list[PendingRetx] = []
        for ue in self.ues:
            for direction in (Direction.DL, Direction.UL):
                entity = ue.harq[direction]
                if entity.pending_count:
                    for p in entity.processes:
                        if p.pending_retx and not p.retx_scheduled:
                            retx.append(PendingRetx(ue.user_id, direction, p.process_id,
                                                    p.stored_num_symbols, p.stored_mcs))
                buf = ue.tx_rlc[direction]
                if buf is None:
                    continue
                if direction == Direction.UL:
                    buffer_bytes, hol = ue.bsr_snapshot, ue.bsr_hol
                else:
                    buffer_bytes, hol = buf.buffer_status(), buf.head_of_line_arrival(now)
                if buffer_bytes <= 0 or entity.free_process() is None:
                    continue
                flows.append(FlowState(ue.user_id, direction, buffer_bytes,
                                       ue.cqi[direction], budget_ns, hol))

        alloc = self.scheduler.schedule(
            target // cfg.subframes_per_frame, target % cfg.subframes_per_frame,
            now, flows, retx)
        for s in alloc.slots:
            if s.kind == SlotKind.DATA and s.is_retx:
                proc = self.ues[s.user_id].harq[s.direction].processes[s.harq_process_id]
                proc.retx_scheduled = True
        self._alloc_queue[target] = alloc
        if self.traces is not None and self.traces.alloc is not None:
            for s in alloc.slots:
                self.traces.alloc.row(alloc.frame_index, alloc.subframe_index,
                                      s.start_symbol, s.num_symbols, s.direction.value,
                                      s.kind.value,
                                      -1 if s.user_id is None else s.user_id,
                                      s.mcs, int(s.is_retx))

    # -- data slots --------------------------------------------------------------

    def _process_data_slot(self, n: int, slot: SlotAllocation) -> None:
        cfg = self.cfg
        ue = self.ues[slot.user_id]
        direction = slot.direction
        entity = ue.harq[direction]
        t_slot_ns = self.sim.now + slot.start_symbol * cfg.symbol_length_ns

        if slot.is_retx:
            p = entity.processes[slot.harq_process_id]
            p.retx_scheduled = False
            if not p.pending_retx or p.tb is None:
                return
            tb = p.tb
            tb.retx_count = p.tx_count
            entity.on_transmit(p.process_id, tb, slot.num_symbols)
        else:
            p = entity.free_process()
            if p is None:
                self.unused_grants += 1
                return
            buf = ue.tx_rlc[direction]
            if buf is None:
                self.unused_grants += 1
                return
            capacity = slot.tb_size_bits // 8 - MAC_HEADER_BYTES
            if capacity <= 0:
                self.unused_grants += 1
                return
            segments = buf.dequeue_for_grant(capacity, self.sim.now)
            if not segments:
                self.unused_grants += 1
                return
            tb = TransportBlock(
                size_bits=slot.tb_size_bits, mcs=slot.mcs, user_id=ue.user_id,
                direction=direction, harq_process_id=p.process_id,
                retx_count=0, payload=segments,
                payload_bytes=sum(s.length for s in segments))
            entity.on_transmit(p.process_id, tb, slot.num_symbols)

        self._receive_tb(n, ue, tb, p, t_slot_ns)

    def _receive_tb(self, n: int, ue: UeContext, tb: TransportBlock,
                    process, t_slot_ns: int) -> None:
        cfg = self.cfg
        direction = tb.direction
        # precomputed per-subband (tx power / noise) factor, single-cell: no interference
        snr_factor = self._snr_factor[direction]

        gains = ue.link.subband_gains(to_seconds(t_slot_ns))
        sinr = snr_factor * gains
        eff_db_all = mi_tables().effective_sinr_db_all(sinr)
        order = self.bler.curves[tb.mcs].modulation_order
        eff_db = eff_db_all[order]
        decoded = decode_tb_db(tb.mcs, eff_db, process.soft, self.bler,
                               self._decode_streams[ue.user_id])

        wideband_db = 10.0 * math.log10(max(float(sinr.sum()) / sinr.size, 1e-30))
        stats = ue.stats[direction]
        stats.record_tx(tb.mcs, decoded, tb.retx_count == 0, wideband_db)
        if decoded:
            stats.decoded_bits += tb.size_bits

        if self.traces is not None and self.traces.tb is not None:
            self.traces.tb.row(
                to_seconds(t_slot_ns), ue.user_id, direction.value, tb.mcs,
                tb.size_bits, round(eff_db, 4),
                "decoded" if decoded else "corrupted", tb.retx_count)

        due = n + cfg.phy_mac_data_latency
        self._pending_feedback.setdefault(due, []).append(
            (ue, direction, tb.harq_process_id, decoded))
        if decoded:
            self._pending_delivery.setdefault(due, []).append((ue, direction, tb))

        cqi = self.bler.cqi_from_effective_db(eff_db_all)
        self._pending_cqi.setdefault(n + 1, []).append((ue, direction, cqi))

    def _deliver_tb(self, ue: UeContext, direction: Direction, tb: TransportBlock) -> None:
        rx = ue.rx_rlc[direction]
        if rx is None:
            return
        for seg in tb.payload:
            rx.on_segment(seg, self.sim.now)

    def _apply_feedback(self, ue: UeContext, direction: Direction,
                        pid: int, decoded: bool) -> None:
        entity = ue.harq[direction]
        dropped = entity.feedback(pid, decoded)
        if dropped is not None:
            ue.stats[direction].harq_drops += 1
            buf = ue.tx_rlc[direction]
            rx = ue.rx_rlc[direction]
            if buf is not None:
                lost = buf.harq_drop_notification(dropped.payload)
                if rx is not None and lost:
                    for seg in lost:
                        rx.abandon(seg.seq)
                    rx.flush_abandoned(self.sim.now)

    # -- tracing ------------------------------------------------------------------

    def _sample_traces(self) -> None:
        now_s = to_seconds(self.sim.now)
        tr = self.traces
        s = self.scenario
        for ue in self.ues:
            ue.state_samples[ue.link.state.value] = \
                ue.state_samples.get(ue.link.state.value, 0) + 1
            if tr is not None and tr.sinr is not None:
                lt = ue.link.long_term_gain_linear()
                if ue.link.state == ChannelState.OUTAGE or lt <= 0:
                    sinr_db = -999.0
                else:
                    if s.traffic.type in ("full-buffer-ul", "cbr-ul"):
                        tx_power, nf = s.ue_tx_power_dbm, s.enb_noise_figure_db
                    else:
                        tx_power, nf = s.enb_tx_power_dbm, s.ue_noise_figure_db
                    p_sb = tx_power - 10.0 * math.log10(self.cfg.num_subbands)
                    noise = noise_power_dbm(self.cfg.subband_width_hz, nf)
                    sinr_db = p_sb + 10.0 * math.log10(lt) - noise
                tr.sinr.row(now_s, ue.user_id, ue.link.state.value, round(sinr_db, 4))
            if tr is not None and tr.rlc is not None:
                for direction, label in ((Direction.DL, "dl"), (Direction.UL, "ul")):
                    buf = ue.tx_rlc[direction]
                    rx = ue.rx_rlc[direction]
                    if buf is not None and buf.mode != RlcMode.SM:
                        hol = (self.sim.now - buf.head_of_line_arrival(self.sim.now)) / 1e6
                        tr.rlc.row(now_s, f"{label}{ue.user_id}", buf.bytes_enqueued,
                                   buf.bytes_dequeued, buf.buffer_status(),
                                   round(hol, 3), buf.drops)
                    if rx is not None:
                        tr.rlc.row(now_s, f"{label}{ue.user_id}:rx", rx.bytes_received,
                                   rx.bytes_delivered, 0, 0.0, rx.sdus_lost)
            if ue.app is not None and tr is not None and tr.tcp is not None:
                snd = ue.app.sender
                dt = s.sinr_sample_period_s
                goodput = ue.app.goodput_bytes_delta() * 8.0 / dt / 1e6
                rtt_ms = (snd.srtt or 0.0) * 1e3
                tr.tcp.row(now_s, int(snd.cwnd), int(snd.ssthresh),
                           round(rtt_ms, 3), round(goodput, 3), snd.phase.value)

    # -- results -------------------------------------------------------------------

    def delivered_bytes(self, user_id: int) -> int:
        ue = self.ues[user_id]
        total = 0
        for direction in (Direction.DL, Direction.UL):
            rx = ue.rx_rlc[direction]
            if rx is not None and ue.app is None:
                total += rx.bytes_delivered
            elif rx is not None and ue.app is not None and direction == Direction.DL:
                total += rx.bytes_delivered
        return total

"""Scenario execution: single runs, multi-drop aggregation with per-drop
seeds, and the pathloss-offset AMC sweep. Writes summary CSVs next to the
raw traces and hands figure rendering to the report module.
"""

from __future__ import annotations

import dataclasses
import math
import os
from dataclasses import dataclass, field
from typing import Optional

from .cell import Cell
from .engine import RngStreams, Simulator, seconds
from .phy import Direction
from .rlc import RlcMode
from .scenario import Scenario, UeSpec
from .scene import ChannelState, Position
from .traces import CsvTrace, TraceSet

USER_RATES_HEADER = ["userId", "deliveredBytes", "rateMbps", "losFraction"]
RUN_SUMMARY_HEADER = ["key", "value"]
DROP_USERS_HEADER = ["drop", "seed", "userId", "rateMbps", "losFraction"]
DROP_CELL_HEADER = ["drop", "seed", "cellThroughputMbps"]
CDF_HEADER = ["rateMbps", "cdf"]
SWEEP_HEADER = ["offsetDb", "avgSinrDb", "phyRateMbps", "rlcRateMbps",
                "modalMcs", "tbErrorRate"]


@dataclass
class DropSummary:
    seed: int
    duration_s: float
    per_user_rate_bps: list[float]
    los_fraction: list[float]
    tcp: Optional[dict] = None

    @property
    def cell_throughput_bps(self) -> float:
        return sum(self.per_user_rate_bps)


def resolve_placement(scenario: Scenario, streams: RngStreams) -> Scenario:
    """Materialize annulus placement into explicit UE positions (one draw
    pair per UE from the placement stream)."""
    if scenario.placement != "annulus":
        return scenario
    rng = streams.stream("placement").gen
    ues = []
    for _ in range(scenario.num_ues):
        r = rng.uniform(scenario.ue_min_distance_m, scenario.ue_max_distance_m)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        ues.append(UeSpec(position=Position(
            scenario.enb_position.x + r * math.cos(theta),
            scenario.enb_position.y + r * math.sin(theta),
            scenario.ue_height_m)))
    return dataclasses.replace(scenario, ues=ues, placement="explicit")


def run_scenario(scenario: Scenario, out_dir: str,
                 seed: Optional[int] = None) -> DropSummary:
    """Execute one simulation run, writing traces and summary files."""
    if seed is not None:
        scenario = dataclasses.replace(scenario, seed=seed)
    streams = RngStreams(scenario.seed)
    scenario = resolve_placement(scenario, streams)

    os.makedirs(out_dir, exist_ok=True)
    traces = TraceSet(out_dir, scenario.traces)
    sim = Simulator()
    cell = Cell(sim, scenario, streams, traces)
    cell.start(scenario.duration_s)
    sim.run(seconds(scenario.duration_s))
    traces.close()

    duration = scenario.duration_s
    rates = []
    los_frac = []
    for ue in cell.ues:
        delivered = cell.delivered_bytes(ue.user_id)
        rates.append(delivered * 8.0 / duration)
        los_frac.append(ue.state_fraction(ChannelState.LOS))

    tcp_summary = None
    for ue in cell.ues:
        if ue.app is not None:
            snd = ue.app.sender
            tcp_summary = {
                "goodput_bps": ue.app.receiver.bytes_delivered * 8.0 / duration,
                "retransmissions": snd.retransmissions,
                "timeouts": snd.timeouts,
                "rtt_samples": [(t, r) for t, r in snd.rtt_samples],
            }

    summary = DropSummary(scenario.seed, duration, rates, los_frac, tcp_summary)
    _write_run_summary(out_dir, scenario, cell, summary)
    return summary


def _write_run_summary(out_dir: str, scenario: Scenario, cell: Cell,
                       summary: DropSummary) -> None:
    users = CsvTrace(os.path.join(out_dir, "user_rates.csv"), USER_RATES_HEADER)
    for ue in cell.ues:
        delivered = cell.delivered_bytes(ue.user_id)
        users.row(ue.user_id, delivered,
                  delivered * 8.0 / summary.duration_s / 1e6,
                  round(summary.los_fraction[ue.user_id], 6))
    users.close()

    run = CsvTrace(os.path.join(out_dir, "run_summary.csv"), RUN_SUMMARY_HEADER)
    run.row("scenario", scenario.name)
    run.row("seed", scenario.seed)
    run.row("durationS", summary.duration_s)
    run.row("cellThroughputMbps", summary.cell_throughput_bps / 1e6)
    if summary.tcp is not None:
        run.row("tcpGoodputMbps", summary.tcp["goodput_bps"] / 1e6)
        run.row("tcpRetransmissions", summary.tcp["retransmissions"])
        run.row("tcpTimeouts", summary.tcp["timeouts"])
    run.close()

    if summary.tcp is not None and summary.tcp["rtt_samples"]:
        rtt = CsvTrace(os.path.join(out_dir, "tcp_rtt.csv"), ["time", "rttMs"])
        for t, r in summary.tcp["rtt_samples"]:
            rtt.row(t / 1e9, round(r * 1e3, 4))
        rtt.close()


def _drop_worker(args: tuple) -> tuple[int, DropSummary]:
    scenario, out_dir, drop_index = args
    summary = run_scenario(scenario, out_dir, seed=scenario.seed + drop_index)
    return drop_index, summary


def run_drops(scenario: Scenario, n: int, out_dir: str,
              workers: int = 1) -> list[DropSummary]:
    """n isolated runs with derived per-drop seeds; aggregates the empirical
    CDF of per-user rates."""
    if n < 1:
        raise ValueError("need at least one drop")
    os.makedirs(out_dir, exist_ok=True)
    jobs = [(scenario, os.path.join(out_dir, f"drop{d:03d}"), d) for d in range(n)]
    results: list[Optional[DropSummary]] = [None] * n
    if workers > 1 and n > 1:
        import multiprocessing as mp
        with mp.get_context("spawn").Pool(min(workers, n)) as pool:
            for d, summary in pool.imap_unordered(_drop_worker, jobs):
                results[d] = summary
    else:
        for job in jobs:
            d, summary = _drop_worker(job)
            results[d] = summary
    summaries = [r for r in results if r is not None]

    users = CsvTrace(os.path.join(out_dir, "drops_users.csv"), DROP_USERS_HEADER)
    cells = CsvTrace(os.path.join(out_dir, "drops_cell.csv"), DROP_CELL_HEADER)
    all_rates = []
    for d, s in enumerate(summaries):
        for uid, rate in enumerate(s.per_user_rate_bps):
            users.row(d, s.seed, uid, rate / 1e6, round(s.los_fraction[uid], 6))
            all_rates.append(rate / 1e6)
        cells.row(d, s.seed, s.cell_throughput_bps / 1e6)
    users.close()
    cells.close()

    cdf = CsvTrace(os.path.join(out_dir, "rate_cdf.csv"), CDF_HEADER)
    for i, rate in enumerate(sorted(all_rates)):
        cdf.row(rate, (i + 1) / len(all_rates))
    cdf.close()
    return summaries


@dataclass
class SweepPoint:
    offset_db: float
    avg_sinr_db: float
    phy_rate_bps: float
    rlc_rate_bps: float
    modal_mcs: int
    tb_error_rate: float


def sweep_pathloss(scenario: Scenario, offsets_db: list[float],
                   out_dir: str) -> list[SweepPoint]:
    """Re-run the scenario at each extra pathloss offset, recording average
    SINR, PHY rate (decoded TB bits/s), modal MCS and TB error rate."""
    if len(scenario.ues) != 1 and scenario.num_ues != 1:
        raise ValueError("pathloss sweep expects a single-UE scenario")
    os.makedirs(out_dir, exist_ok=True)
    direction = Direction.UL if scenario.traffic.type.endswith("ul") else Direction.DL

    points = []
    for offset in offsets_db:
        chan = dataclasses.replace(
            scenario.channel,
            pathloss_offset_db=scenario.channel.pathloss_offset_db + offset)
        sc = dataclasses.replace(scenario, channel=chan,
                                 traces={k: False for k in scenario.traces})
        streams = RngStreams(sc.seed)
        sc = resolve_placement(sc, streams)
        sim = Simulator()
        cell = Cell(sim, sc, streams, traces=None)
        cell.start(sc.duration_s)
        sim.run(seconds(sc.duration_s))
        stats = cell.ues[0].stats[direction]
        rx = cell.ues[0].rx_rlc[direction]
        delivered = rx.bytes_delivered if rx is not None else 0
        points.append(SweepPoint(
            offset_db=offset,
            avg_sinr_db=stats.avg_sinr_db,
            phy_rate_bps=stats.decoded_bits / sc.duration_s,
            rlc_rate_bps=delivered * 8.0 / sc.duration_s,
            modal_mcs=stats.modal_mcs,
            tb_error_rate=stats.tb_error_rate))

    table = CsvTrace(os.path.join(out_dir, "sweep.csv"), SWEEP_HEADER)
    for p in points:
        table.row(p.offset_db, round(p.avg_sinr_db, 4), p.phy_rate_bps / 1e6,
                  p.rlc_rate_bps / 1e6, p.modal_mcs, round(p.tb_error_rate, 6))
    table.close()
    return points

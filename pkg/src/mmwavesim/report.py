"""Figure rendering for run outputs: reads the CSVs a run produced and saves
matplotlib PNGs next to them. Purely cosmetic; all data lives in the CSVs.
"""

from __future__ import annotations

import csv
import os
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _read_csv(path: str) -> Optional[list[dict[str, str]]]:
    if not os.path.exists(path):
        return None
    with open(path, "r") as f:
        return list(csv.DictReader(f))


def _save(fig, out_dir: str, name: str) -> str:
    path = os.path.join(out_dir, name)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def render_run_figures(out_dir: str) -> list[str]:
    """Render whichever figures the available traces support."""
    written = []
    for fn in (_plot_sinr_trace, _plot_tcp, _plot_rate_cdf, _plot_sweep):
        path = fn(out_dir)
        if path:
            written.append(path)
    return written


def _plot_sinr_trace(out_dir: str) -> Optional[str]:
    rows = _read_csv(os.path.join(out_dir, "sinr.csv"))
    if not rows:
        return None
    fig, ax = plt.subplots(figsize=(7, 3.2))
    users = sorted({r["userId"] for r in rows}, key=int)
    for uid in users:
        t = [float(r["time"]) for r in rows if r["userId"] == uid]
        s = [float(r["avgSinrDb"]) for r in rows if r["userId"] == uid]
        ax.plot(t, s, lw=0.9, label=f"UE {uid}")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("average SINR [dB]")
    ax.grid(alpha=0.3)
    if len(users) > 1:
        ax.legend(fontsize=7, ncol=2)
    return _save(fig, out_dir, "sinr.png")


def _plot_tcp(out_dir: str) -> Optional[str]:
    rows = _read_csv(os.path.join(out_dir, "tcp.csv"))
    if not rows:
        return None
    t = [float(r["time"]) for r in rows]
    fig, axes = plt.subplots(4, 1, figsize=(7, 8), sharex=True)
    sinr_rows = _read_csv(os.path.join(out_dir, "sinr.csv"))
    if sinr_rows:
        axes[0].plot([float(r["time"]) for r in sinr_rows],
                     [float(r["avgSinrDb"]) for r in sinr_rows], lw=0.8)
    axes[0].set_ylabel("SINR [dB]")
    axes[1].plot(t, [float(r["goodputMbps"]) for r in rows], lw=0.8)
    axes[1].set_ylabel("goodput [Mbps]")
    axes[2].plot(t, [int(r["cwndBytes"]) / 1e6 for r in rows], lw=0.8)
    axes[2].set_ylabel("cwnd [MB]")
    rtt_rows = _read_csv(os.path.join(out_dir, "tcp_rtt.csv"))
    if rtt_rows:
        axes[3].plot([float(r["time"]) for r in rtt_rows],
                     [float(r["rttMs"]) for r in rtt_rows], ".", ms=1.5)
    axes[3].set_ylabel("RTT [ms]")
    axes[3].set_xlabel("time [s]")
    for ax in axes:
        ax.grid(alpha=0.3)
    return _save(fig, out_dir, "tcp.png")


def _plot_rate_cdf(out_dir: str) -> Optional[str]:
    rows = _read_csv(os.path.join(out_dir, "rate_cdf.csv"))
    if not rows:
        return None
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.step([float(r["rateMbps"]) for r in rows], [float(r["cdf"]) for r in rows],
            where="post")
    ax.set_xlabel("per-user rate [Mbps]")
    ax.set_ylabel("empirical CDF")
    ax.set_ylim(0, 1)
    ax.grid(alpha=0.3)
    return _save(fig, out_dir, "rate_cdf.png")


def _plot_sweep(out_dir: str) -> Optional[str]:
    rows = _read_csv(os.path.join(out_dir, "sweep.csv"))
    if not rows:
        return None
    sinr = [float(r["avgSinrDb"]) for r in rows]
    fig, ax1 = plt.subplots(figsize=(6, 3.5))
    ax1.plot(sinr, [float(r["phyRateMbps"]) for r in rows], "o-", ms=3)
    ax1.set_xlabel("average SINR [dB]")
    ax1.set_ylabel("PHY rate [Mbps]")
    ax1.grid(alpha=0.3)
    ax2 = ax1.twinx()
    ax2.plot(sinr, [int(r["modalMcs"]) for r in rows], "s--", ms=3, color="tab:orange")
    ax2.set_ylabel("modal MCS")
    return _save(fig, out_dir, "sweep.png")

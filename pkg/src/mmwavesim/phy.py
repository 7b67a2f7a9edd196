"""Frame-level PHY: slot/subframe allocation structures and their layout
rules, per-subband SINR with beamformed interference, and transport blocks.

Subframe layout convention: the DL control region occupies the first
symbol(s), the UL control region the last, and one guard symbol sits at the
top of the data region (reserved for the UL->DL turnaround, charged to
neither direction). DL data packs upward from the control region; UL data
packs downward against the guard.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .engine import PhyMacConfig, SimulationInvariantError

THERMAL_NOISE_DBM_HZ = -174.0


class Direction(enum.Enum):
    DL = "DL"
    UL = "UL"


class SlotKind(enum.Enum):
    CTRL = "CTRL"
    DATA = "DATA"
    GUARD = "GUARD"


@dataclass
class SlotAllocation:
    start_symbol: int
    num_symbols: int
    direction: Direction
    kind: SlotKind
    user_id: Optional[int] = None      # None = broadcast (control)
    mcs: int = 0
    harq_process_id: int = 0
    is_retx: bool = False
    tb_size_bits: int = 0

    def __post_init__(self) -> None:
        if self.num_symbols < 1:
            raise ValueError("slot needs at least one symbol")
        if self.kind == SlotKind.DATA and self.user_id is None:
            raise ValueError("DATA slots need a concrete user")

    @property
    def end_symbol(self) -> int:
        return self.start_symbol + self.num_symbols


@dataclass
class SubframeAllocation:
    frame_index: int
    subframe_index: int
    slots: list[SlotAllocation] = field(default_factory=list)

    def data_slots(self) -> list[SlotAllocation]:
        return [s for s in self.slots if s.kind == SlotKind.DATA]

    def validate(self, cfg: PhyMacConfig) -> None:
        """Structural checks; violations are scheduler bugs, not outcomes."""
        slots = sorted(self.slots, key=lambda s: s.start_symbol)
        if not slots:
            raise SimulationInvariantError("subframe has no control slots")
        first, last = slots[0], slots[-1]
        if not (first.kind == SlotKind.CTRL and first.direction == Direction.DL
                and first.start_symbol == 0
                and first.num_symbols == cfg.num_dl_ctrl_symbols):
            raise SimulationInvariantError("first slot must be the DL control region")
        if not (last.kind == SlotKind.CTRL and last.direction == Direction.UL
                and last.end_symbol == cfg.symbols_per_subframe
                and last.num_symbols == cfg.num_ul_ctrl_symbols):
            raise SimulationInvariantError("last slot must be the UL control region")
        prev_end = 0
        prev: Optional[SlotAllocation] = None
        for s in slots:
            if s.start_symbol < prev_end:
                raise SimulationInvariantError(
                    f"overlapping symbol ranges at symbol {s.start_symbol}")
            if s.end_symbol > cfg.symbols_per_subframe:
                raise SimulationInvariantError("slot extends past the subframe")
            if (prev is not None and prev.direction == Direction.UL
                    and s.direction == Direction.DL and s.kind == SlotKind.DATA
                    and prev.kind != SlotKind.GUARD):
                raise SimulationInvariantError("UL->DL transition without a guard symbol")
            if s.kind == SlotKind.DATA:
                if s.start_symbol < cfg.num_dl_ctrl_symbols:
                    raise SimulationInvariantError("DATA inside the DL control region")
                if s.end_symbol > cfg.symbols_per_subframe - cfg.num_ul_ctrl_symbols:
                    raise SimulationInvariantError("DATA inside the UL control region")
            prev_end = s.end_symbol
            prev = s
        total = sum(s.num_symbols for s in slots)
        if total > cfg.symbols_per_subframe:
            raise SimulationInvariantError("allocated symbols exceed the subframe")


@dataclass
class SinrReport:
    per_subband: np.ndarray
    timestamp: int

    def __post_init__(self) -> None:
        self.per_subband = np.asarray(self.per_subband, dtype=float)
        if np.any(self.per_subband < 0):
            raise ValueError("negative SINR entry")


@dataclass
class TransportBlock:
    size_bits: int
    mcs: int
    user_id: int
    direction: Direction
    harq_process_id: int
    retx_count: int = 0
    payload: list = field(default_factory=list)   # RLC segments (opaque here)
    payload_bytes: int = 0


def noise_power_dbm(subband_width_hz: float, noise_figure_db: float) -> float:
    return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(subband_width_hz) + noise_figure_db


def compute_sinr(signal_gains: np.ndarray, tx_power_dbm: float,
                 interferers: Sequence[tuple[np.ndarray, float]],
                 noise_figure_db: float, subband_width_hz: float,
                 num_subbands: int) -> np.ndarray:
    """Per-subband SINR (linear). Transmit power is split evenly across
    subbands; each interferer contributes its cross-link gain times its own
    per-subband power."""
    sig_mw = 10.0 ** ((tx_power_dbm - 10.0 * math.log10(num_subbands)) / 10.0)
    noise_mw = 10.0 ** (noise_power_dbm(subband_width_hz, noise_figure_db) / 10.0)
    denom = np.full(len(signal_gains), noise_mw)
    for gains, power_dbm in interferers:
        p_mw = 10.0 ** ((power_dbm - 10.0 * math.log10(num_subbands)) / 10.0)
        denom = denom + p_mw * np.asarray(gains)
    return sig_mw * np.asarray(signal_gains) / denom

"""Link-to-system mapping: BICM mutual-information curves, effective-SINR
compression (MIESM), per-MCS logistic BLER curves and wideband CQI selection,
plus the soft-combining accumulator used by HARQ.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from .amc import MCS_TABLE
from .engine import RngStream

CQI_TARGET_BLER = 0.10
_LN9 = math.log(9.0)

_ORDER_COLUMN = {2: "mi_qpsk", 4: "mi_16qam", 6: "mi_64qam"}


def _load_packaged_csv(name: str) -> list[dict[str, str]]:
    ref = resources.files("mmwavesim").joinpath("data").joinpath(name)
    with ref.open("r") as f:
        return list(csv.DictReader(f))


class MiTables:
    """Tabulated BICM capacity per modulation order, piecewise-linear in dB.

    The SNR grid is uniform, which the hot paths exploit for index-arithmetic
    interpolation instead of searching.
    """

    def __init__(self) -> None:
        rows = _load_packaged_csv("mi_tables.csv")
        self.snr_db = np.array([float(r["snr_db"]) for r in rows])
        self._mi = {order: np.array([float(r[col]) for r in rows])
                    for order, col in _ORDER_COLUMN.items()}
        steps = np.diff(self.snr_db)
        if not np.allclose(steps, steps[0]):
            raise ValueError("MI table SNR grid must be uniform")
        self._x0 = float(self.snr_db[0])
        self._dx = float(steps[0])
        self._n = len(self.snr_db)
        self._orders = (2, 4, 6)
        self._stack = np.vstack([self._mi[o] for o in self._orders])
        # uniform-grid inverse lookups (runtime path; public API interpolates
        # the raw table directly)
        self._inv: dict[int, tuple[float, float, np.ndarray]] = {}
        for o in self._orders:
            t = self._mi[o]
            grid = np.linspace(t[0], t[-1], 4096)
            self._inv[o] = (float(grid[0]), float(grid[1] - grid[0]),
                            np.interp(grid, t, self.snr_db))

    def mi(self, order: int, sinr_db: float | np.ndarray):
        """Mutual information in bits/symbol at the given SINR (dB)."""
        return np.interp(sinr_db, self.snr_db, self._mi[order])

    def mi_scalar(self, order: int, sinr_db: float) -> float:
        t = self._mi[order]
        pos = (sinr_db - self._x0) / self._dx
        if pos <= 0.0:
            return float(t[0])
        if pos >= self._n - 1:
            return float(t[-1])
        i = int(pos)
        frac = pos - i
        return float(t[i] + (t[i + 1] - t[i]) * frac)

    def mi_inverse_db(self, order: int, mi_value: float) -> float:
        """SINR (dB) at which the MI curve reaches `mi_value` (clipped to range)."""
        table = self._mi[order]
        mi_value = min(max(mi_value, table[0]), table[-1])
        return float(np.interp(mi_value, table, self.snr_db))

    def max_mi(self, order: int) -> float:
        return float(self._mi[order][-1])

    def _inv_fast(self, order: int, mi_value: float) -> float:
        m0, dm, snr = self._inv[order]
        pos = (mi_value - m0) / dm
        if pos <= 0.0:
            return float(snr[0])
        if pos >= len(snr) - 1:
            return float(snr[-1])
        i = int(pos)
        frac = pos - i
        return float(snr[i] + (snr[i + 1] - snr[i]) * frac)

    def effective_sinr_db_all(self, per_subband_linear: np.ndarray) -> dict[int, float]:
        """MIESM effective SINR (dB) for every modulation order, sharing the
        per-subband dB conversion (hot path)."""
        g = np.maximum(np.asarray(per_subband_linear, dtype=float), 1e-30)
        sinr_db = 10.0 * np.log10(g)
        n = sinr_db.size
        pos = np.clip((sinr_db - self._x0) / self._dx, 0.0, self._n - 1.000001)
        i = pos.astype(np.intp)
        frac = pos - i
        lo = self._stack[:, i]
        mean_mi = (lo + (self._stack[:, i + 1] - lo) * frac).sum(axis=1) / n
        return {o: self._inv_fast(o, float(mean_mi[k]))
                for k, o in enumerate(self._orders)}


_MI_TABLES: Optional[MiTables] = None


def mi_tables() -> MiTables:
    global _MI_TABLES
    if _MI_TABLES is None:
        _MI_TABLES = MiTables()
    return _MI_TABLES


def miesm_effective_sinr(per_subband_linear: np.ndarray, order: int) -> float:
    """Compress per-subband SINRs into one AWGN-equivalent SINR (linear) by
    averaging mutual information and inverting the MI curve."""
    g = np.asarray(per_subband_linear, dtype=float)
    if g.size == 0:
        raise ValueError("empty SINR report")
    t = mi_tables()
    with np.errstate(divide="ignore"):
        sinr_db = 10.0 * np.log10(np.maximum(g, 1e-30))
    mean_mi = float(np.mean(t.mi(order, sinr_db)))
    return 10.0 ** (t.mi_inverse_db(order, mean_mi) / 10.0)


@dataclass(frozen=True)
class BlerCurve:
    mcs: int
    modulation_order: int
    code_rate: float
    thresh_db: float
    slope_db: float

    def bler(self, sinr_db: float) -> float:
        x = (sinr_db - self.thresh_db) / self.slope_db
        if x > 60.0:
            return 0.0
        if x < -60.0:
            return 1.0
        return 1.0 / (1.0 + math.exp(x))

    @property
    def switch10_db(self) -> float:
        """SINR where this curve crosses the 10% target."""
        return self.thresh_db + self.slope_db * _LN9


class BlerTable:
    """Per-MCS AWGN BLER calibration, loaded from the packaged CSV (or a
    user-supplied file with the same schema)."""

    def __init__(self, path: Optional[str] = None) -> None:
        if path is None:
            rows = _load_packaged_csv("bler_curves.csv")
        else:
            with open(path, "r") as f:
                rows = list(csv.DictReader(f))
        self.curves: list[BlerCurve] = []
        for r in rows:
            self.curves.append(BlerCurve(
                mcs=int(r["mcs"]),
                modulation_order=int(r["modulation_order"]),
                code_rate=float(r["code_rate"]),
                thresh_db=float(r["thresh_db"]),
                slope_db=float(r["slope_db"]),
            ))
        self.curves.sort(key=lambda c: c.mcs)
        if [c.mcs for c in self.curves] != list(range(len(MCS_TABLE))):
            raise ValueError("BLER table must cover MCS 0..28 exactly")
        for c, e in zip(self.curves, MCS_TABLE):
            if c.modulation_order != e.modulation_order:
                raise ValueError(f"BLER table modulation mismatch at MCS {c.mcs}")
        self._thresh = np.array([c.thresh_db for c in self.curves])
        self._slope = np.array([c.slope_db for c in self.curves])
        self._orders = [c.modulation_order for c in self.curves]
        # bler(switch10) == target exactly, so qualification is a comparison
        self._switch10 = [c.switch10_db for c in self.curves]

    def bler(self, mcs: int, sinr_db: float) -> float:
        return self.curves[mcs].bler(sinr_db)

    def cqi_from_effective_db(self, eff_db_by_order: dict[int, float]) -> int:
        """Highest MCS whose curve meets the 10% target at its modulation
        order's effective SINR; 0 when none qualifies."""
        best = 0
        for mcs in range(len(self.curves) - 1, -1, -1):
            if eff_db_by_order[self._orders[mcs]] >= self._switch10[mcs]:
                best = mcs
                break
        return best

    def wideband_cqi(self, per_subband_linear: np.ndarray) -> int:
        """Highest MCS whose predicted BLER at the MIESM effective SINR meets
        the 10% target; 0 when none qualifies."""
        eff_db = mi_tables().effective_sinr_db_all(per_subband_linear)
        return self.cqi_from_effective_db(eff_db)


_BLER_TABLE: Optional[BlerTable] = None


def default_bler_table() -> BlerTable:
    global _BLER_TABLE
    if _BLER_TABLE is None:
        _BLER_TABLE = BlerTable()
    return _BLER_TABLE


@dataclass
class SoftBuffer:
    """Accumulated mutual information across HARQ transmissions of one TB."""

    order: int = 2
    acc_mi: float = 0.0
    tx_count: int = 0

    def add_db(self, eff_sinr_db: float, order: int) -> None:
        self.order = order
        self.acc_mi += mi_tables().mi_scalar(order, eff_sinr_db)
        self.tx_count += 1

    def add(self, eff_sinr_linear: float, order: int) -> None:
        self.add_db(10.0 * math.log10(max(eff_sinr_linear, 1e-30)), order)

    def equivalent_sinr_db(self) -> float:
        return mi_tables()._inv_fast(self.order, self.acc_mi)

    def reset(self) -> None:
        self.acc_mi = 0.0
        self.tx_count = 0


def decode_tb_db(mcs: int, eff_sinr_db: float, soft: SoftBuffer,
                 table: BlerTable, stream: RngStream) -> bool:
    """Accumulate this transmission into the soft buffer and draw the decode
    outcome from the per-MCS curve at the accumulated-MI-equivalent SINR.
    Returns True when decoded."""
    curve = table.curves[mcs]
    soft.add_db(eff_sinr_db, curve.modulation_order)
    bler = curve.bler(soft.equivalent_sinr_db())
    if bler <= 0.0:
        return True
    if bler >= 1.0:
        return False
    return bool(stream.gen.random() >= bler)


def decode_tb(mcs: int, eff_sinr_linear: float, soft: SoftBuffer,
              table: BlerTable, stream: RngStream) -> bool:
    return decode_tb_db(mcs, 10.0 * math.log10(max(eff_sinr_linear, 1e-30)),
                        soft, table, stream)

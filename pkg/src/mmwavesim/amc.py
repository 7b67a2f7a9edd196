"""Adaptive modulation and coding: the 29-level MCS ladder and transport
block sizing for variable-length TDMA slots.

Code rates are exact 1024ths so TB sizes stay integer-exact.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import PhyMacConfig

CRC_BITS = 24
MAC_HEADER_BYTES = 3   # charged once per transport block
RLC_HEADER_BYTES = 2   # charged per RLC PDU segment


@dataclass(frozen=True)
class McsEntry:
    index: int
    modulation_order: int   # bits per modulation symbol: 2, 4 or 6
    code_rate_1024: int     # numerator of rate n/1024

    @property
    def code_rate(self) -> float:
        return self.code_rate_1024 / 1024.0

    @property
    def spectral_efficiency(self) -> float:
        return self.modulation_order * self.code_rate


# QPSK 0-9, 16-QAM 10-16, 64-QAM 17-28; efficiency strictly increasing.
_LADDER = [
    (2, 78), (2, 157), (2, 193), (2, 251), (2, 308),
    (2, 379), (2, 449), (2, 526), (2, 602), (2, 679),
    (4, 340), (4, 378), (4, 434), (4, 490), (4, 553), (4, 616), (4, 640),
    (6, 438), (6, 466), (6, 517), (6, 567), (6, 616), (6, 666),
    (6, 719), (6, 772), (6, 822), (6, 873), (6, 910), (6, 948),
]

MCS_TABLE: list[McsEntry] = [McsEntry(i, q, r) for i, (q, r) in enumerate(_LADDER)]
MAX_MCS = len(MCS_TABLE) - 1

assert all(a.spectral_efficiency < b.spectral_efficiency
           for a, b in zip(MCS_TABLE, MCS_TABLE[1:]))


class Amc:
    """TB sizing bound to one numerology (data subcarriers per symbol)."""

    def __init__(self, cfg: PhyMacConfig) -> None:
        self.data_sc = cfg.data_subcarriers_per_symbol
        self.max_symbols = cfg.data_symbols_per_subframe

    def tb_size_bits(self, mcs: int, num_symbols: int) -> int:
        """Payload bits carried by `num_symbols` OFDM symbols at `mcs`
        (CRC already deducted), floored at 0."""
        if num_symbols < 1:
            raise ValueError("num_symbols must be >= 1")
        e = MCS_TABLE[mcs]
        raw = (self.data_sc * num_symbols * e.modulation_order * e.code_rate_1024) // 1024
        return max(raw - CRC_BITS, 0)

    def num_symbols_for_bits(self, mcs: int, bits: int) -> int:
        """Smallest symbol count whose TB holds `bits`; 0 when bits == 0."""
        if bits <= 0:
            return 0
        e = MCS_TABLE[mcs]
        per_1024 = self.data_sc * e.modulation_order * e.code_rate_1024
        # first estimate, then fix up around the floor boundary
        s = max(1, ((bits + CRC_BITS) * 1024) // per_1024)
        while self.tb_size_bits(mcs, s) < bits:
            s += 1
        while s > 1 and self.tb_size_bits(mcs, s - 1) >= bits:
            s -= 1
        return s

    def num_symbols_for_buffer(self, mcs: int, buffer_bytes: int) -> int:
        return self.num_symbols_for_bits(mcs, 8 * buffer_bytes)

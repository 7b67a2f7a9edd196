"""Uniform planar arrays: spatial signatures (steering vectors) and
azimuth-sector codebooks, half-wavelength element spacing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass
class AntennaArray:
    """elements_x x elements_y planar array; boresight along local +x,
    elements laid out on the local y (index m) and z (index n) axes."""

    elements_x: int
    elements_y: int
    orientation_rad: float = 0.0
    beamforming_vector: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.elements_x < 1 or self.elements_y < 1:
            raise ValueError("array needs at least one element per axis")

    @property
    def num_elements(self) -> int:
        return self.elements_x * self.elements_y

    def set_beamforming_vector(self, w: np.ndarray) -> None:
        w = np.asarray(w, dtype=complex).ravel()
        if w.shape[0] != self.num_elements:
            raise ValueError("beamforming vector length mismatch")
        n = np.linalg.norm(w)
        if not math.isclose(n, 1.0, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError("beamforming vector must be unit norm")
        self.beamforming_vector = w


def spatial_signature(array: AntennaArray, azimuth: float, elevation: float) -> np.ndarray:
    """Unit-norm steering vector for a plane wave from (azimuth, elevation).

    Azimuth is measured in the horizontal plane relative to the array
    orientation; elevation from the horizon. Broadside (0, 0) gives equal
    phases on all elements.
    """
    az = azimuth - array.orientation_rad
    dy = math.cos(elevation) * math.sin(az)
    dz = math.sin(elevation)
    m = np.arange(array.elements_x)
    n = np.arange(array.elements_y)
    phase = math.pi * (m[:, None] * dy + n[None, :] * dz)
    vec = np.exp(1j * phase).ravel()
    return vec / math.sqrt(array.num_elements)


def azimuth_codebook(array: AntennaArray, size: int) -> list[np.ndarray]:
    """Fixed-sector codebook: steering vectors at `size` uniformly spaced
    azimuths covering [-pi, pi), elevation 0."""
    if size < 1:
        raise ValueError("codebook size must be >= 1")
    step = 2.0 * math.pi / size
    return [spatial_signature(array, -math.pi + (k + 0.5) * step, 0.0) for k in range(size)]

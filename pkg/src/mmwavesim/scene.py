"""Geometric world model: node positions, box obstacles, waypoint mobility
and LoS/NLoS/outage determination from the straight line between endpoints.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .engine import NS_PER_S


class ChannelState(enum.Enum):
    LOS = "LoS"
    NLOS = "NLoS"
    OUTAGE = "Outage"


@dataclass(frozen=True)
class Position:
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for v in (self.x, self.y, self.z):
            if not math.isfinite(v):
                raise ValueError(f"non-finite coordinate in {self!r}")

    def distance_to(self, other: "Position") -> float:
        return math.dist((self.x, self.y, self.z), (other.x, other.y, other.z))


@dataclass(frozen=True)
class Building:
    """Axis-aligned box obstacle (closed on all faces)."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    zmin: float
    zmax: float

    def __post_init__(self) -> None:
        if not (self.xmin < self.xmax and self.ymin < self.ymax and self.zmin < self.zmax):
            raise ValueError(f"degenerate building bounds: {self}")

    def contains(self, p: Position) -> bool:
        return (self.xmin <= p.x <= self.xmax
                and self.ymin <= p.y <= self.ymax
                and self.zmin <= p.z <= self.zmax)


def segment_intersects_box(a: Position, b: Position, box: Building) -> bool:
    """True iff the closed segment a->b meets the closed box (slab test)."""
    t0, t1 = 0.0, 1.0
    for pa, pb, lo, hi in (
        (a.x, b.x, box.xmin, box.xmax),
        (a.y, b.y, box.ymin, box.ymax),
        (a.z, b.z, box.zmin, box.zmax),
    ):
        d = pb - pa
        if d == 0.0:
            if pa < lo or pa > hi:
                return False
            continue
        ta = (lo - pa) / d
        tb = (hi - pa) / d
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
        if t0 > t1:
            return False
    return True


def channel_state(tx: Position, rx: Position, buildings: Sequence[Building],
                  outage_dist: float) -> ChannelState:
    """Outage beyond the distance threshold; NLoS when the tx-rx line crosses
    any building; LoS otherwise."""
    if tx == rx:
        raise ValueError("tx and rx positions coincide")
    if tx.distance_to(rx) > outage_dist:
        return ChannelState.OUTAGE
    for b in buildings:
        if segment_intersects_box(tx, rx, b):
            return ChannelState.NLOS
    return ChannelState.LOS


@dataclass
class MobilityTrack:
    """Waypoint mobility: travels each leg at the configured speed, stationary
    before the first waypoint time and after arriving at the last waypoint.

    waypoints: list of (time_ns, Position), times strictly increasing.
    """

    waypoints: list[tuple[int, Position]]
    speed_mps: float = 0.0

    def __post_init__(self) -> None:
        if not self.waypoints:
            raise ValueError("track needs at least one waypoint")
        times = [t for t, _ in self.waypoints]
        if any(t1 <= t0 for t0, t1 in zip(times, times[1:])):
            raise ValueError("waypoint times must be strictly increasing")
        if self.speed_mps < 0:
            raise ValueError("speed must be >= 0")
        for (t0, p0), (t1, p1) in zip(self.waypoints, self.waypoints[1:]):
            dist = p0.distance_to(p1)
            if dist > 0 and self.speed_mps <= 0:
                raise ValueError("moving track requires positive speed")
            if dist > 0:
                travel = self.speed_mps * (t1 - t0) / NS_PER_S
                if travel + 1e-9 < dist:
                    raise ValueError(
                        f"waypoint at t={t1} ns unreachable: {dist:.3f} m leg, "
                        f"{travel:.3f} m travel budget")

    @staticmethod
    def static(p: Position) -> "MobilityTrack":
        return MobilityTrack(waypoints=[(0, p)], speed_mps=0.0)

    def _leg_index(self, t: int) -> int:
        i = 0
        for j, (wt, _) in enumerate(self.waypoints):
            if wt <= t:
                i = j
            else:
                break
        return i

    def position_at(self, t: int) -> Position:
        if t <= self.waypoints[0][0]:
            return self.waypoints[0][1]
        i = self._leg_index(t)
        if i == len(self.waypoints) - 1:
            return self.waypoints[-1][1]
        t0, p0 = self.waypoints[i]
        _, p1 = self.waypoints[i + 1]
        dist = p0.distance_to(p1)
        if dist == 0.0:
            return p0
        traveled = min(self.speed_mps * (t - t0) / NS_PER_S, dist)
        f = traveled / dist
        return Position(p0.x + f * (p1.x - p0.x),
                        p0.y + f * (p1.y - p0.y),
                        p0.z + f * (p1.z - p0.z))

    def heading_at(self, t: int) -> Optional[float]:
        """Azimuth of current motion in radians, or None when stationary."""
        if t < self.waypoints[0][0] or len(self.waypoints) == 1:
            return None
        i = self._leg_index(t)
        if i == len(self.waypoints) - 1:
            return None
        t0, p0 = self.waypoints[i]
        _, p1 = self.waypoints[i + 1]
        dist = p0.distance_to(p1)
        if dist == 0.0 or self.speed_mps * (t - t0) / NS_PER_S >= dist:
            return None
        return math.atan2(p1.y - p0.y, p1.x - p0.x)

    @property
    def is_static(self) -> bool:
        if len(self.waypoints) == 1:
            return True
        first = self.waypoints[0][1]
        return all(p == first for _, p in self.waypoints)

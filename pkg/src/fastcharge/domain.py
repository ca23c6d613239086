"""Planar geometry and the static entities of the charging network.

Coordinates are in miles on a flat plane; all distances use the Manhattan
(L1) metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class ConfigError(ValueError):
    """Raised when a scenario references missing entities or violates a domain."""


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite coordinate: ({self.x}, {self.y})")


@dataclass(frozen=True)
class Zone:
    """Axis-aligned rectangular traffic zone."""

    id: str
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError(f"zone {self.id!r} has an empty rectangle")

    @property
    def center(self) -> Point:
        return Point((self.xmin + self.xmax) / 2, (self.ymin + self.ymax) / 2)


@dataclass(frozen=True)
class StationSpec:
    id: str
    location: Point
    chargers: int
    base_price: float  # dollars per hour

    def __post_init__(self):
        if self.chargers < 1:
            raise ValueError(f"station {self.id!r} needs at least one charger")
        if self.base_price <= 0:
            raise ValueError(f"station {self.id!r} base price must be positive")


@dataclass(frozen=True)
class MobilityParams:
    speed: float = 50.0  # mph
    range_full: float = 200.0  # miles at SOC = 1
    charge_rate: float = 3.2  # miles of range per minute of charging
    detour_max: float = 10.0  # miles

    def __post_init__(self):
        for name in ("speed", "range_full", "charge_rate", "detour_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


def manhattan_distance(a: Point, b: Point) -> float:
    return abs(a.x - b.x) + abs(a.y - b.y)


def detour_distance(current: Point, dest: Point, station: Point) -> float:
    """Extra miles driven by going current -> station -> dest instead of direct."""
    extra = (
        manhattan_distance(current, station)
        + manhattan_distance(station, dest)
        - manhattan_distance(current, dest)
    )
    # L1 triangle inequality makes this nonnegative; clamp float noise
    return max(extra, 0.0)


def travel_time(dist: float, params: MobilityParams) -> float:
    """Minutes needed to drive `dist` miles at constant speed."""
    if dist < 0:
        raise ValueError("distance must be nonnegative")
    return dist / params.speed * 60.0

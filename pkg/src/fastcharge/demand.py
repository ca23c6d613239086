"""Charging-request generation from zonal origin-destination trip rates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .domain import ConfigError, MobilityParams, Point, Zone, manhattan_distance


@dataclass(frozen=True)
class ODPeriodRate:
    period_start: float  # minutes since midnight
    period_end: float
    origin_zone: str
    dest_zone: str
    rate: float  # trips per hour

    def __post_init__(self):
        if not self.period_start < self.period_end:
            raise ConfigError("period_start must precede period_end")
        if self.rate < 0:
            raise ConfigError("rate must be nonnegative")


@dataclass(frozen=True)
class DemandParams:
    penetration_multiplier: float = 1.0
    soc_mean: float = 0.6
    soc_sd: float = 0.2
    threshold_mean: float = 0.5
    threshold_sd: float = 0.1
    sim_start: float = 360.0
    sim_end: float = 1140.0

    def __post_init__(self):
        if self.penetration_multiplier < 0:
            raise ConfigError("penetration_multiplier must be nonnegative")
        if self.soc_sd < 0 or self.threshold_sd < 0:
            raise ConfigError("standard deviations must be nonnegative")
        if not self.sim_start < self.sim_end:
            raise ConfigError("sim_start must precede sim_end")


@dataclass(frozen=True)
class EVRequest:
    id: int
    spawn_time: float
    origin: Point
    dest: Point
    soc: float
    threshold: float
    reroutes_left: int = 1


def sample_truncated_normal(mean, sd, lo, hi, rng: np.random.Generator, size=None):
    """Draw from N(mean, sd) conditioned on [lo, hi] by CDF inversion.

    Returns a float when `size` is None, otherwise an ndarray.
    """
    if not lo < hi:
        raise ValueError(f"invalid truncation bounds [{lo}, {hi}]")
    if sd < 0:
        raise ValueError("sd must be nonnegative")
    if sd == 0:
        value = min(max(mean, lo), hi)
        return value if size is None else np.full(size, float(value))
    a = ndtr((lo - mean) / sd)
    b = ndtr((hi - mean) / sd)
    u = rng.uniform(a, b, size)
    out = np.clip(mean + sd * ndtri(u), lo, hi)
    return float(out) if size is None else out


def generate_requests(
    zones: Mapping[str, Zone] | Iterable[Zone],
    od_rates: Sequence[ODPeriodRate],
    demand_params: DemandParams,
    rng: np.random.Generator,
    reroute_max: int = 1,
) -> list[EVRequest]:
    """Sample every trip of the day, ordered by spawn time.

    Each OD pair and period is an independent homogeneous Poisson process,
    clipped to the simulation window. Attributes are drawn in blocks per
    OD/period so the stream is fully determined by the generator state.
    """
    if not isinstance(zones, Mapping):
        zones = {z.id: z for z in zones}
    for r in od_rates:
        for zid in (r.origin_zone, r.dest_zone):
            if zid not in zones:
                raise ConfigError(f"unknown zone id {zid!r} in od_rates")

    dp = demand_params
    blocks = []
    for r in od_rates:
        start = max(r.period_start, dp.sim_start)
        end = min(r.period_end, dp.sim_end)
        lam = r.rate * dp.penetration_multiplier / 60.0  # per minute
        if end <= start or lam <= 0:
            continue
        n = int(rng.poisson(lam * (end - start)))
        if n == 0:
            continue
        oz, dz = zones[r.origin_zone], zones[r.dest_zone]
        # conditional on the count, Poisson epochs are iid uniform on the interval
        t = rng.uniform(start, end, n)
        ox = rng.uniform(oz.xmin, oz.xmax, n)
        oy = rng.uniform(oz.ymin, oz.ymax, n)
        dx = rng.uniform(dz.xmin, dz.xmax, n)
        dy = rng.uniform(dz.ymin, dz.ymax, n)
        soc = sample_truncated_normal(dp.soc_mean, dp.soc_sd, 0.0, 1.0, rng, n)
        thr = sample_truncated_normal(dp.threshold_mean, dp.threshold_sd, 0.0, 1.0, rng, n)
        blocks.append(np.column_stack([t, ox, oy, dx, dy, soc, thr]))

    if not blocks:
        return []
    data = np.concatenate(blocks)
    data = data[np.argsort(data[:, 0], kind="stable")]
    return [
        EVRequest(
            id=i,
            spawn_time=float(row[0]),
            origin=Point(float(row[1]), float(row[2])),
            dest=Point(float(row[3]), float(row[4])),
            soc=float(row[5]),
            threshold=float(row[6]),
            reroutes_left=reroute_max,
        )
        for i, row in enumerate(data)
    ]


def needs_fast_charge(req: EVRequest, params: MobilityParams) -> bool:
    # projected SOC on arrival at the destination falls below the user's threshold
    projected = req.soc - manhattan_distance(req.origin, req.dest) / params.range_full
    return projected < req.threshold

"""Station choice: feasible choice sets and multinomial-logit sampling."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .domain import MobilityParams, Point, StationSpec, detour_distance, manhattan_distance

NO_CHARGE = None  # station_id marker for the leave-the-system alternative


class PriceTermMode(str, Enum):
    PAYMENT = "payment"  # locked hourly price x expected charging hours
    HOURLY_RATE = "hourly_rate"  # raw $/hr


@dataclass(frozen=True)
class ChoiceParams:
    beta_price: float = -2.7  # utils per dollar
    beta_detour: float = -3.2  # utils per mile
    beta_wait: float = -1.0  # utils per minute
    no_charge_utility: float = -50.0
    price_term_mode: PriceTermMode = PriceTermMode.HOURLY_RATE
    extra_charge_mean: float = 10.0  # minutes, mean of the random service component

    def __post_init__(self):
        object.__setattr__(self, "price_term_mode", PriceTermMode(self.price_term_mode))
        for name in ("beta_price", "beta_detour", "beta_wait"):
            if not getattr(self, name) < 0:
                raise ValueError(f"{name} must be negative")
        if not np.isfinite(self.no_charge_utility):
            raise ValueError("no_charge_utility must be finite")


@dataclass(frozen=True)
class Alternative:
    station_id: str | None
    price_term: float = 0.0
    detour: float = 0.0
    wait: float = 0.0

    @property
    def is_no_charge(self) -> bool:
        return self.station_id is NO_CHARGE


def build_choice_set(
    position: Point,
    dest: Point,
    soc: float,
    stations: Iterable[StationSpec],
    params: MobilityParams,
) -> list[str]:
    """Ids of stations both reachable on the current charge and within the detour budget."""
    reach = soc * params.range_full
    return [
        s.id
        for s in stations
        if manhattan_distance(position, s.location) <= reach
        and detour_distance(position, dest, s.location) <= params.detour_max
    ]


def utility(alt: Alternative, params: ChoiceParams) -> float:
    if alt.is_no_charge:
        return params.no_charge_utility
    return params.beta_price * alt.price_term + params.beta_detour * alt.detour + params.beta_wait * alt.wait


def mnl_probabilities(alts: Sequence[Alternative], params: ChoiceParams) -> np.ndarray:
    u = np.array([utility(a, params) for a in alts], dtype=float)
    return softmax(u)


def softmax(u: np.ndarray) -> np.ndarray:
    z = np.exp(u - u.max())
    return z / z.sum()


def sample_choice(alts: Sequence[Alternative], params: ChoiceParams, rng: np.random.Generator) -> Alternative:
    """Inverse-CDF draw over the logit probabilities, in listed order."""
    if len(alts) == 1:
        # still consume a uniform so the stream position does not depend on set size
        rng.random()
        return alts[0]
    p = mnl_probabilities(alts, params)
    u = rng.random()
    k = int(np.searchsorted(np.cumsum(p), u, side="right"))
    return alts[min(k, len(alts) - 1)]


def expected_wait(queue_len: int, busy: int, chargers: int, mean_service: float) -> float:
    """Queue-based wait estimate in minutes: zero while a charger is free."""
    if busy < chargers:
        return 0.0
    return queue_len * mean_service / chargers


def expected_charge_minutes(
    station: Point, dest: Point, soc_at_station: float, mobility: MobilityParams, extra_mean: float
) -> float:
    """Expected charging duration at a station: the deterministic top-up plus the mean extra charge."""
    needed = max(0.0, manhattan_distance(station, dest) - soc_at_station * mobility.range_full)
    return needed / mobility.charge_rate + extra_mean


def price_term(hourly_price: float, expected_minutes: float, params: ChoiceParams) -> float:
    if params.price_term_mode is PriceTermMode.HOURLY_RATE:
        return hourly_price
    return hourly_price * expected_minutes / 60.0

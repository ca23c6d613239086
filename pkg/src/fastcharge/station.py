"""Multi-server FCFS station queue with price lock-in."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol

import numpy as np

from .choice import expected_wait
from .domain import MobilityParams, Point, StationSpec, manhattan_distance
from .pricing import PriceState, PricingScheme, on_queue_change


class Admission(Enum):
    SERVE_IMMEDIATELY = "serve_immediately"
    QUEUED = "queued"


class Customer(Protocol):
    id: int
    arrival_time: float | None
    service_start: float | None
    service_end: float | None
    locked_price: float | None


@dataclass
class ServiceRecord:
    customer_id: int
    station_id: str
    arrival_time: float
    service_start: float
    service_end: float
    locked_price: float
    payment: float

    @property
    def wait(self) -> float:
        return self.service_start - self.arrival_time


def sample_service_time(
    soc_at_station: float,
    station: Point,
    dest: Point,
    params: MobilityParams,
    rng: np.random.Generator,
    extra_mean: float = 10.0,
) -> float:
    """Charging minutes: enough range to reach `dest`, plus an exponential extra.

    The total is capped so the battery never charges beyond full.
    """
    if not 0.0 <= soc_at_station <= 1.0:
        raise ValueError("soc_at_station must lie in [0, 1]")
    have = soc_at_station * params.range_full
    fixed = max(0.0, manhattan_distance(station, dest) - have) / params.charge_rate
    extra = rng.exponential(extra_mean) if extra_mean > 0 else 0.0
    cap = (params.range_full - have) / params.charge_rate
    return min(fixed + extra, cap)


@dataclass
class StationState:
    spec: StationSpec
    scheme: PricingScheme
    price: PriceState = None
    queue: deque = field(default_factory=deque)
    in_service: dict = field(default_factory=dict)  # customer id -> service end time
    arrivals: int = 0
    served: int = 0
    revenue: float = 0.0
    records: list[ServiceRecord] = field(default_factory=list)
    price_log: list[tuple[float, int, float]] = field(default_factory=list)
    arrival_times: list[float] = field(default_factory=list)
    keep_log: bool = True

    def __post_init__(self):
        if self.price is None:
            self.price = PriceState.at_base(self.spec.base_price)

    @property
    def id(self) -> str:
        return self.spec.id

    @property
    def chargers(self) -> int:
        return self.spec.chargers

    @property
    def has_free_charger(self) -> bool:
        return len(self.in_service) < self.spec.chargers

    def expected_wait(self, mean_service: float) -> float:
        return expected_wait(len(self.queue), len(self.in_service), self.spec.chargers, mean_service)

    def _reprice(self, now: float) -> None:
        on_queue_change(self.price, self.scheme, len(self.queue))
        if self.keep_log:
            self.price_log.append((now, len(self.queue), self.price.current))

    def arrive(self, customer: Customer, now: float) -> Admission:
        """Commit a customer to this station; the caller schedules service end on SERVE_IMMEDIATELY."""
        self.arrivals += 1
        if self.keep_log:
            self.arrival_times.append(now)
        customer.arrival_time = now
        customer.locked_price = self.price.current
        if self.has_free_charger:
            customer.service_start = now
            self.in_service[customer.id] = None
            return Admission.SERVE_IMMEDIATELY
        self.queue.append(customer)
        self._reprice(now)
        return Admission.QUEUED

    def set_service_end(self, customer: Customer, end: float) -> None:
        customer.service_end = end
        self.in_service[customer.id] = end

    def complete_service(self, customer: Customer, now: float) -> Customer | None:
        """Free the charger held by `customer`; start the queue head if any.

        Returns the customer whose service starts now, or None.
        """
        del self.in_service[customer.id]
        payment = customer.locked_price * (now - customer.service_start) / 60.0
        customer.payment = payment
        self.revenue += payment
        self.served += 1
        if self.keep_log:
            self.records.append(
                ServiceRecord(
                    customer.id, self.spec.id, customer.arrival_time, customer.service_start,
                    now, customer.locked_price, payment,
                )
            )
        if not self.queue:
            return None
        nxt = self.queue.popleft()
        nxt.service_start = now
        self.in_service[nxt.id] = None
        self._reprice(now)
        return nxt

    def check_invariants(self) -> None:
        if len(self.in_service) > self.spec.chargers:
            raise AssertionError(f"station {self.id}: more vehicles in service than chargers")
        if self.queue and len(self.in_service) < self.spec.chargers:
            raise AssertionError(f"station {self.id}: idle charger with a nonempty queue")
        if self.price.current < self.price.base:
            raise AssertionError(f"station {self.id}: price below base")

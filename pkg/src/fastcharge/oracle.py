"""Closed-form M/M/c results and a degenerate single-station run to check them against."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import Point, StationSpec
from .engine import EventKind, EventQueue
from .pricing import PricingScheme
from .station import Admission, StationState


class UnstableSystemError(ValueError):
    pass


@dataclass(frozen=True)
class MMcParams:
    lam: float  # arrivals per minute
    mu: float  # services per minute per server
    c: int

    def __post_init__(self):
        if self.lam <= 0 or self.mu <= 0:
            raise ValueError("lam and mu must be positive")
        if self.c < 1:
            raise ValueError("c must be at least 1")

    @property
    def rho(self) -> float:
        return self.lam / (self.c * self.mu)


def erlang_c(params: MMcParams) -> float:
    """Probability that an arriving customer has to wait."""
    rho = params.rho
    if rho >= 1:
        raise UnstableSystemError(f"utilization {rho:.4f} >= 1 has no steady state")
    a, c = params.lam / params.mu, params.c
    # a^n/n! accumulated iteratively to avoid overflowing factorials
    term, head = 1.0, 1.0
    for n in range(1, c):
        term *= a / n
        head += term
    tail = term * a / c / (1 - rho)
    return tail / (head + tail)


def mmc_metrics(params: MMcParams) -> tuple[float, float]:
    """Steady-state (Lq, Wq): mean queue length and mean wait in minutes."""
    pw = erlang_c(params)
    lq = pw * params.rho / (1 - params.rho)
    return lq, lq / params.lam


class _Job:
    __slots__ = ("id", "arrival_time", "service_start", "service_end", "locked_price", "payment")

    def __init__(self, i):
        self.id = i
        self.arrival_time = self.service_start = self.service_end = self.locked_price = None
        self.payment = 0.0


@dataclass
class MMcSimResult:
    lq: float
    wq: float
    p_wait: float
    arrivals: int
    horizon: float


def simulate_mmc(params: MMcParams, n_arrivals: int, seed: int = 0, warmup_frac: float = 0.02) -> MMcSimResult:
    """Drive one station with Poisson arrivals and exponential service, no choice or pricing.

    Queue length is time-averaged and waits are averaged over customers
    arriving after the warm-up fraction of the arrival stream.
    """
    rng = np.random.default_rng(seed)
    arrivals = np.cumsum(rng.exponential(1.0 / params.lam, n_arrivals))
    services = rng.exponential(1.0 / params.mu, n_arrivals)
    warm_idx = int(n_arrivals * warmup_frac)
    t_warm = arrivals[warm_idx] if warm_idx < n_arrivals else 0.0

    st = StationState(StationSpec("mmc", Point(0.0, 0.0), params.c, 1.0), PricingScheme(), keep_log=False)
    events = EventQueue()
    jobs: dict[int, _Job] = {}
    next_service = 0
    area, last_t = 0.0, t_warm
    wait_sum, waited, counted = 0.0, 0, 0

    def start(job, now):
        nonlocal next_service, wait_sum, waited, counted
        d = services[next_service]
        next_service += 1
        st.set_service_end(job, now + d)
        events.push(now + d, EventKind.SERVICE_END, job.id)
        if job.id >= warm_idx:
            w = now - job.arrival_time
            wait_sum += w
            waited += w > 0
            counted += 1

    events.push(arrivals[0], EventKind.STATION_ARRIVAL, 0)
    while events:
        ev = events.pop()
        now = ev.time
        if now > t_warm:
            area += len(st.queue) * (now - max(last_t, t_warm))
            last_t = now
        if ev.kind is EventKind.STATION_ARRIVAL:
            i = ev.customer
            if i + 1 < n_arrivals:
                events.push(arrivals[i + 1], EventKind.STATION_ARRIVAL, i + 1)
            job = _Job(i)
            jobs[i] = job
            if st.arrive(job, now) is Admission.SERVE_IMMEDIATELY:
                start(job, now)
        else:
            job = jobs.pop(ev.customer)
            nxt = st.complete_service(job, now)
            if nxt is not None:
                start(nxt, now)

    horizon = last_t - t_warm
    return MMcSimResult(
        lq=area / horizon if horizon > 0 else 0.0,
        wq=wait_sum / counted if counted else 0.0,
        p_wait=waited / counted if counted else 0.0,
        arrivals=n_arrivals,
        horizon=horizon,
    )

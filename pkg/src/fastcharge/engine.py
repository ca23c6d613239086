"""Event-driven simulation of EV users choosing, queueing at and leaving stations."""

from __future__ import annotations

import hashlib
import heapq
import struct
from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np

from .choice import (
    NO_CHARGE,
    Alternative,
    ChoiceParams,
    build_choice_set,
    expected_charge_minutes,
    price_term,
    sample_choice,
)
from .demand import DemandParams, EVRequest, ODPeriodRate, generate_requests, needs_fast_charge
from .domain import (
    ConfigError,
    MobilityParams,
    Point,
    StationSpec,
    Zone,
    detour_distance,
    manhattan_distance,
    travel_time,
)
from .pricing import PricingScheme
from .station import Admission, StationState, sample_service_time

AM_PEAK = (360.0, 600.0)
PM_PEAK = (900.0, 1140.0)


class EventKind(IntEnum):
    SPAWN = 0
    STATION_ARRIVAL = 1
    SERVICE_END = 2


class Status(str, Enum):
    PENDING = "pending"
    SERVED = "served"
    LOST = "lost"


class LostReason(str, Enum):
    EMPTY_CHOICE_SET = "empty_choice_set"
    BALKED_AT_SPAWN = "balked_at_spawn"
    BALKED_AT_ARRIVAL = "balked_at_arrival"


@dataclass(order=True)
class Event:
    time: float
    seq: int
    kind: EventKind = field(compare=False)
    customer: int = field(compare=False)
    station: str | None = field(compare=False, default=None)


class EventQueue:
    """Future event list ordered by (time, insertion sequence)."""

    def __init__(self):
        self._heap: list[Event] = []
        self._seq = 0

    def push(self, time: float, kind: EventKind, customer: int, station: str | None = None) -> Event:
        ev = Event(time, self._seq, kind, customer, station)
        self._seq += 1
        heapq.heappush(self._heap, ev)
        return ev

    def pop(self) -> Event:
        return heapq.heappop(self._heap)

    def peek_time(self) -> float:
        return self._heap[0].time

    def __len__(self):
        return len(self._heap)


@dataclass
class Scenario:
    """Fully resolved inputs for one simulation run."""

    zones: dict[str, Zone]
    stations: list[StationSpec]
    od_rates: list[ODPeriodRate]
    mobility: MobilityParams = field(default_factory=MobilityParams)
    demand: DemandParams = field(default_factory=DemandParams)
    choice: ChoiceParams = field(default_factory=ChoiceParams)
    pricing: PricingScheme = field(default_factory=PricingScheme)
    reroute_max: int = 1
    peak_windows: tuple[tuple[float, float], ...] = (AM_PEAK, PM_PEAK)
    bin_minutes: float = 10.0
    lost_value: float | None = None  # monetized value of a lost customer; None -> exact ratio

    def __post_init__(self):
        if isinstance(self.zones, (list, tuple)):
            self.zones = {z.id: z for z in self.zones}
        ids = [s.id for s in self.stations]
        if len(set(ids)) != len(ids):
            raise ConfigError("duplicate station ids")
        for r in self.od_rates:
            for zid in (r.origin_zone, r.dest_zone):
                if zid not in self.zones:
                    raise ConfigError(f"od_rates reference unknown zone {zid!r}")
        if self.reroute_max < 0:
            raise ConfigError("reroute_max must be nonnegative")


@dataclass
class EVAgent:
    request: EVRequest
    position: Point
    soc: float
    reroutes_left: int
    status: Status = Status.PENDING
    lost_reason: LostReason | None = None
    choice_set_size: int = 0
    station_id: str | None = None
    detour_total: float = 0.0
    relocations: int = 0
    arrival_time: float | None = None
    service_start: float | None = None
    service_end: float | None = None
    locked_price: float | None = None
    payment: float = 0.0

    @property
    def id(self) -> int:
        return self.request.id


@dataclass(frozen=True)
class CustomerOutcome:
    id: int
    spawn_time: float
    origin: Point
    dest: Point
    status: Status
    lost_reason: LostReason | None
    choice_set_size_at_spawn: int
    station_id: str | None
    detour_total: float
    wait: float
    total_time: float
    payment: float
    locked_price: float | None
    relocations: int

    @property
    def served(self) -> bool:
        return self.status is Status.SERVED


@dataclass
class StationSeries:
    """Per-minute samples of every station; rows follow `station_ids`."""

    station_ids: list[str]
    minutes: np.ndarray
    queue_len: np.ndarray
    price: np.ndarray
    cum_arrivals: np.ndarray


@dataclass
class SimulationResult:
    scenario: Scenario
    seed: int
    outcomes: list[CustomerOutcome]
    stations: list[StationState]
    series: StationSeries
    mean_service: float
    generated_requests: int
    event_hash: str


def rng_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent demand and behaviour generators derived from one master seed."""
    demand_ss, behaviour_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(demand_ss), np.random.default_rng(behaviour_ss)


def filtered_requests(scenario: Scenario, seed: int) -> tuple[list[EVRequest], int]:
    demand_rng, _ = rng_streams(seed)
    reqs = generate_requests(
        scenario.zones, scenario.od_rates, scenario.demand, demand_rng, scenario.reroute_max
    )
    return [r for r in reqs if needs_fast_charge(r, scenario.mobility)], len(reqs)


def mean_service_estimate(requests: list[EVRequest], mobility: MobilityParams, extra_mean: float) -> float:
    """Scenario-wide mean service time: mean top-up needed at the origin plus the extra charge."""
    if not requests:
        return extra_mean
    fixed = [
        max(0.0, manhattan_distance(r.origin, r.dest) - r.soc * mobility.range_full) / mobility.charge_rate
        for r in requests
    ]
    return float(np.mean(fixed)) + extra_mean


class Simulation:
    def __init__(self, scenario: Scenario, seed: int, check_invariants: bool = False):
        self.sc = scenario
        self.seed = seed
        self.check = check_invariants
        self.requests, self.generated = filtered_requests(scenario, seed)
        _, self.rng = rng_streams(seed)
        self.mean_service = mean_service_estimate(
            self.requests, scenario.mobility, scenario.choice.extra_charge_mean
        )
        self.specs = list(scenario.stations)
        self.stations = {s.id: StationState(s, scenario.pricing) for s in self.specs}
        self.station_list = [self.stations[s.id] for s in self.specs]
        self.agents: dict[int, EVAgent] = {}
        self.events = EventQueue()
        self.now = scenario.demand.sim_start
        self._hash = hashlib.blake2b(digest_size=16)
        self._commit_order = {s.id: [] for s in self.specs}
        self._start_order = {s.id: [] for s in self.specs}

        dp = scenario.demand
        self._minutes = np.arange(int(np.ceil(dp.sim_start)), int(np.floor(dp.sim_end)) + 1)
        shape = (len(self.specs), len(self._minutes))
        self._q = np.zeros(shape, dtype=np.int64)
        self._p = np.zeros(shape, dtype=float)
        self._a = np.zeros(shape, dtype=np.int64)
        self._next_sample = 0

    # -- bookkeeping -------------------------------------------------------

    def _sample_until(self, t: float) -> None:
        mins = self._minutes
        k = self._next_sample
        while k < len(mins) and mins[k] < t:
            for i, st in enumerate(self.station_list):
                self._q[i, k] = len(st.queue)
                self._p[i, k] = st.price.current
                self._a[i, k] = st.arrivals
            k += 1
        self._next_sample = k

    def _lose(self, agent: EVAgent, reason: LostReason) -> None:
        agent.status = Status.LOST
        agent.lost_reason = reason

    # -- choice ------------------------------------------------------------

    def _alternative(self, agent: EVAgent, st: StationState, detour: float) -> Alternative:
        mob, cp = self.sc.mobility, self.sc.choice
        loc = st.spec.location
        soc_there = max(0.0, agent.soc - manhattan_distance(agent.position, loc) / mob.range_full)
        minutes = expected_charge_minutes(loc, agent.request.dest, soc_there, mob, cp.extra_charge_mean)
        return Alternative(
            st.id,
            price_term(st.price.current, minutes, cp),
            detour,
            st.expected_wait(self.mean_service),
        )

    def _station_alternatives(self, agent: EVAgent, exclude: str | None = None) -> list[Alternative]:
        specs = [s for s in self.specs if s.id != exclude]
        ids = build_choice_set(agent.position, agent.request.dest, agent.soc, specs, self.sc.mobility)
        return [
            self._alternative(
                agent,
                self.stations[sid],
                detour_distance(agent.position, agent.request.dest, self.stations[sid].spec.location),
            )
            for sid in ids
        ]

    def _drive_to(self, agent: EVAgent, alt: Alternative) -> None:
        st = self.stations[alt.station_id]
        dist = manhattan_distance(agent.position, st.spec.location)
        agent.soc = max(0.0, agent.soc - dist / self.sc.mobility.range_full)
        agent.position = st.spec.location
        agent.detour_total += alt.detour
        agent.station_id = st.id
        self.events.push(self.now + travel_time(dist, self.sc.mobility), EventKind.STATION_ARRIVAL, agent.id, st.id)

    # -- transitions -------------------------------------------------------

    def handle_spawn(self, agent: EVAgent) -> None:
        alts = self._station_alternatives(agent)
        agent.choice_set_size = len(alts)
        if not alts:
            self._lose(agent, LostReason.EMPTY_CHOICE_SET)
            return
        pick = sample_choice(alts + [Alternative(NO_CHARGE)], self.sc.choice, self.rng)
        if pick.is_no_charge:
            self._lose(agent, LostReason.BALKED_AT_SPAWN)
        else:
            self._drive_to(agent, pick)

    def handle_station_arrival(self, agent: EVAgent, st: StationState) -> None:
        if st.has_free_charger or agent.reroutes_left <= 0:
            self._join(agent, st)
            return
        stay = self._alternative(agent, st, 0.0)
        alts = [stay] + self._station_alternatives(agent, exclude=st.id) + [Alternative(NO_CHARGE)]
        pick = sample_choice(alts, self.sc.choice, self.rng)
        if pick.is_no_charge:
            self._lose(agent, LostReason.BALKED_AT_ARRIVAL)
        elif pick.station_id == st.id:
            self._join(agent, st)
        else:
            agent.reroutes_left -= 1
            agent.relocations += 1
            self._drive_to(agent, pick)

    def _join(self, agent: EVAgent, st: StationState) -> None:
        self._commit_order[st.id].append(agent.id)
        if st.arrive(agent, self.now) is Admission.SERVE_IMMEDIATELY:
            self._start_service(agent, st)

    def _start_service(self, agent: EVAgent, st: StationState) -> None:
        self._start_order[st.id].append(agent.id)
        dur = sample_service_time(
            agent.soc, st.spec.location, agent.request.dest, self.sc.mobility, self.rng,
            self.sc.choice.extra_charge_mean,
        )
        st.set_service_end(agent, self.now + dur)
        self.events.push(self.now + dur, EventKind.SERVICE_END, agent.id, st.id)

    def handle_service_end(self, agent: EVAgent, st: StationState) -> None:
        agent.status = Status.SERVED
        nxt = st.complete_service(agent, self.now)
        if nxt is not None:
            self._start_service(nxt, st)

    # -- loop --------------------------------------------------------------

    def run(self) -> SimulationResult:
        for req in self.requests:
            self.agents[req.id] = EVAgent(req, req.origin, req.soc, req.reroutes_left)
            self.events.push(req.spawn_time, EventKind.SPAWN, req.id)

        last = -np.inf
        pack = struct.Struct("<dBq").pack
        while self.events:
            ev = self.events.pop()
            if ev.time < last:
                raise AssertionError("event processed out of time order")
            last = ev.time
            self._sample_until(ev.time)
            self.now = ev.time
            self._hash.update(pack(ev.time, ev.kind, ev.customer))
            agent = self.agents[ev.customer]
            if ev.kind is EventKind.SPAWN:
                self.handle_spawn(agent)
            elif ev.kind is EventKind.STATION_ARRIVAL:
                self.handle_station_arrival(agent, self.stations[ev.station])
            else:
                self.handle_service_end(agent, self.stations[ev.station])
            if self.check:
                self._check_event(ev)
        self._sample_until(np.inf)
        if self.check:
            self._check_final()
        return SimulationResult(
            scenario=self.sc,
            seed=self.seed,
            outcomes=[self._outcome(a) for a in self.agents.values()],
            stations=self.station_list,
            series=StationSeries([s.id for s in self.specs], self._minutes, self._q, self._p, self._a),
            mean_service=self.mean_service,
            generated_requests=self.generated,
            event_hash=self._hash.hexdigest(),
        )

    def _outcome(self, a: EVAgent) -> CustomerOutcome:
        served = a.status is Status.SERVED
        return CustomerOutcome(
            id=a.id,
            spawn_time=a.request.spawn_time,
            origin=a.request.origin,
            dest=a.request.dest,
            status=a.status,
            lost_reason=a.lost_reason,
            choice_set_size_at_spawn=a.choice_set_size,
            station_id=a.station_id if served else None,
            detour_total=a.detour_total if served else 0.0,
            wait=a.service_start - a.arrival_time if served else 0.0,
            total_time=a.service_end - a.arrival_time if served else 0.0,
            payment=a.payment if served else 0.0,
            locked_price=a.locked_price if served else None,
            relocations=a.relocations,
        )

    # -- invariant checks (test mode) --------------------------------------

    def _check_event(self, ev: Event) -> None:
        if ev.station is not None:
            self.stations[ev.station].check_invariants()
        agent = self.agents[ev.customer]
        if agent.soc < 0:
            raise AssertionError(f"customer {agent.id}: negative SOC")
        if agent.relocations > self.sc.reroute_max:
            raise AssertionError(f"customer {agent.id}: too many relocations")

    def _check_final(self) -> None:
        for st in self.station_list:
            st.check_invariants()
            if self._commit_order[st.id] != self._start_order[st.id]:
                raise AssertionError(f"station {st.id}: FCFS order violated")
            for _, q, p in st.price_log:
                if q == 0 and p != st.price.base:
                    raise AssertionError(f"station {st.id}: price above base with empty queue")
                if p < st.price.base:
                    raise AssertionError(f"station {st.id}: price below base")
            if abs(st.revenue - sum(r.payment for r in st.records)) > 1e-9:
                raise AssertionError(f"station {st.id}: revenue does not match payments")
        pending = [a.id for a in self.agents.values() if a.status is Status.PENDING]
        if pending:
            raise AssertionError(f"customers without an outcome: {pending[:5]}")


def run(scenario: Scenario, seed: int, check_invariants: bool = False) -> SimulationResult:
    """Simulate one replication; identical (scenario, seed) gives identical results."""
    return Simulation(scenario, seed, check_invariants).run()

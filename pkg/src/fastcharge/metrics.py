"""Evaluation metrics: waits, revenue, monetized utility, welfare, lost customers."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .choice import ChoiceParams
from .engine import CustomerOutcome, LostReason, SimulationResult, StationSeries

BUCKETS = ("1", "2", ">=3")


@dataclass
class RunSummary:
    total_requests: int
    served: int
    lost: int
    lost_pct: float
    lost_by_choice_set_size: dict
    empty_choice_set: int
    lost_by_reason: dict
    avg_wait: float
    avg_total_time: float
    no_served: bool
    total_revenue: float
    monetized_disutility_served_avg: float
    monetized_disutility_all_avg: float
    monetized_total_disutility: float
    social_welfare: float
    demand_supply_ratio: float
    mean_service_estimate: float
    peak_avg_queue: float
    avg_queue: float
    relocations: int
    station_revenue: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def demand_supply_ratio(n_requests: int, mean_service_min: float, total_chargers: int, window_min: float) -> float:
    """Offered charging-minutes over available charger-minutes."""
    if total_chargers <= 0 or window_min <= 0:
        raise ValueError("chargers and window must be positive")
    return n_requests * mean_service_min / (total_chargers * window_min)


def relative_lost_pct(lost_adj: int, lost_no_adj: int, total: int) -> float:
    if total <= 0:
        raise ValueError("total must be positive")
    return (lost_adj - lost_no_adj) / total * 100.0


def avg_wait(records: Iterable) -> float:
    waits = [r.wait for r in records]
    return float(np.mean(waits)) if waits else 0.0


def avg_total_time(records: Iterable) -> float:
    totals = [r.total_time for r in records]
    return float(np.mean(totals)) if totals else 0.0


def lost_customer_value(params: ChoiceParams, override: float | None = None) -> float:
    """Dollar value of leaving the system: the no-charge utility scaled by |price coefficient|."""
    if override is not None:
        return override
    return params.no_charge_utility / abs(params.beta_price)


def monetized_utility(outcome: CustomerOutcome, params: ChoiceParams, lost_value: float | None = None) -> float:
    if not outcome.served:
        return lost_customer_value(params, lost_value)
    detour_cost = params.beta_detour / params.beta_price * outcome.detour_total
    wait_cost = params.beta_wait / params.beta_price * outcome.wait
    return -(outcome.payment + detour_cost + wait_cost)


def social_welfare(total_revenue: float, monetized_total: float) -> float:
    return total_revenue + monetized_total


def payment_free_welfare(
    outcomes: Sequence[CustomerOutcome], params: ChoiceParams, lost_value: float | None = None
) -> float:
    """Welfare with payments cancelled against revenue: only detour, wait and loss costs remain."""
    lv = lost_customer_value(params, lost_value)
    terms = []
    for o in outcomes:
        if o.served:
            terms.append(-(params.beta_detour / params.beta_price * o.detour_total
                           + params.beta_wait / params.beta_price * o.wait))
        else:
            terms.append(lv)
    return math.fsum(terms)


def lost_breakdown(outcomes: Iterable[CustomerOutcome]) -> dict:
    """Lost counts and shares keyed by spawn choice-set size; empty sets fall in bucket "1"."""
    table = {b: {"total": 0, "lost": 0, "percent": 0.0} for b in BUCKETS}
    for o in outcomes:
        n = o.choice_set_size_at_spawn
        key = "1" if n <= 1 else "2" if n == 2 else ">=3"
        table[key]["total"] += 1
        table[key]["lost"] += not o.served
    for row in table.values():
        row["percent"] = 100.0 * row["lost"] / row["total"] if row["total"] else 0.0
    return table


def peak_avg_queue(series: StationSeries, windows: Sequence[tuple[float, float]]) -> float:
    """Mean queue length per station-minute over the union of the peak windows."""
    m = series.minutes
    mask = np.zeros(len(m), dtype=bool)
    for lo, hi in windows:
        mask |= (m >= lo) & (m < hi)
    if not mask.any() or series.queue_len.shape[0] == 0:
        return 0.0
    return float(series.queue_len[:, mask].mean())


def arrival_rate_series(arrival_times: Sequence[float], start: float, bin_minutes: float = 10.0):
    """Station arrivals per bin, with bin left edges; counts sum to len(arrival_times)."""
    if not arrival_times:
        return np.array([start]), np.zeros(1, dtype=int)
    nbins = max(1, int(math.floor((max(arrival_times) - start) / bin_minutes)) + 1)
    edges = start + bin_minutes * np.arange(nbins + 1)
    counts, _ = np.histogram(arrival_times, bins=edges)
    return edges[:-1], counts


def summarize(result: SimulationResult) -> RunSummary:
    sc = result.scenario
    cp = sc.choice
    outcomes = sorted(result.outcomes, key=lambda o: o.id)
    served = [o for o in outcomes if o.served]
    n = len(outcomes)
    lost = n - len(served)

    b = [monetized_utility(o, cp, sc.lost_value) for o in outcomes]
    b_served = [v for v, o in zip(b, outcomes) if o.served]
    total_b = math.fsum(b)
    revenue = math.fsum(o.payment for o in served)

    reasons = {r.value: 0 for r in LostReason}
    for o in outcomes:
        if not o.served:
            reasons[o.lost_reason.value] += 1

    window = sc.demand.sim_end - sc.demand.sim_start
    chargers = sum(s.chargers for s in sc.stations)
    ratio = demand_supply_ratio(n, result.mean_service, chargers, window) if chargers else 0.0

    q = result.series.queue_len
    return RunSummary(
        total_requests=n,
        served=len(served),
        lost=lost,
        lost_pct=100.0 * lost / n if n else 0.0,
        lost_by_choice_set_size=lost_breakdown(outcomes),
        empty_choice_set=reasons[LostReason.EMPTY_CHOICE_SET.value],
        lost_by_reason=reasons,
        avg_wait=avg_wait(served),
        avg_total_time=avg_total_time(served),
        no_served=not served,
        total_revenue=revenue,
        monetized_disutility_served_avg=-float(np.mean(b_served)) if b_served else 0.0,
        monetized_disutility_all_avg=-total_b / n if n else 0.0,
        monetized_total_disutility=total_b,
        social_welfare=social_welfare(revenue, total_b),
        demand_supply_ratio=ratio,
        mean_service_estimate=result.mean_service,
        peak_avg_queue=peak_avg_queue(result.series, sc.peak_windows),
        avg_queue=float(q.mean()) if q.size else 0.0,
        relocations=sum(o.relocations for o in outcomes),
        station_revenue={st.id: st.revenue for st in result.stations},
    )

"""Replications, demand sweeps and cross-replication aggregation."""

from __future__ import annotations

import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .config import ScenarioConfig
from .demo import calibrate_multiplier
from .engine import SimulationResult, run
from .metrics import RunSummary, relative_lost_pct, summarize


def _run_one(args) -> SimulationResult:
    cfg_data, seed = args
    return run(ScenarioConfig.model_validate(cfg_data).to_scenario(), seed)


def replication_seeds(cfg: ScenarioConfig, replications: int | None = None) -> list[int]:
    n = cfg.replications if replications is None else replications
    return [cfg.seed + r for r in range(n)]


def run_replications(cfg: ScenarioConfig, seeds: Sequence[int], jobs: int = 1) -> list[SimulationResult]:
    """One result per seed, in seed order regardless of how many workers run them."""
    if jobs <= 1 or len(seeds) <= 1:
        sc = cfg.to_scenario()
        return [run(sc, s) for s in seeds]
    data = cfg.model_dump(mode="json")
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, [(data, s) for s in seeds]))


def aggregate(summaries: Sequence[RunSummary]) -> dict:
    """Mean and sample standard deviation of every scalar metric."""
    rows = [s.to_dict() for s in summaries]
    out = {}
    for key, value in rows[0].items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            continue
        vals = [float(r[key]) for r in rows]
        out[key] = {
            "mean": statistics.fmean(vals),
            "sd": statistics.stdev(vals) if len(vals) > 1 else 0.0,
        }
    return out


@dataclass
class SweepRow:
    multiplier: float
    demand_supply_ratio: float
    total_requests: float
    lost_pct: float
    lost_pct_sd: float
    avg_wait: float
    scheme: str
    lost_pct_adj: float
    avg_wait_adj: float
    relative_lost_pct: float
    seeds: int


def multipliers_for_ratios(cfg: ScenarioConfig, ratios: Sequence[float]) -> list[float]:
    unit = calibrate_multiplier(cfg, 1.0)
    return [unit * r for r in ratios]


def sweep(cfg: ScenarioConfig, multipliers: Sequence[float], seeds: Sequence[int], jobs: int = 1) -> list[SweepRow]:
    """Lost-customer curve over demand levels.

    Each point runs the no-pricing baseline; when the config carries a
    pricing scheme it is run on the same seeds and compared by the relative
    lost-customer percentage.
    """
    kind = cfg.pricing.kind.value
    rows = []
    for m in multipliers:
        base_cfg = cfg.with_updates(demand={"penetration_multiplier": m}, pricing={"kind": "none"})
        base = [summarize(r) for r in run_replications(base_cfg, seeds, jobs)]
        if kind == "none":
            adj = base
        else:
            adj_cfg = cfg.with_updates(demand={"penetration_multiplier": m})
            adj = [summarize(r) for r in run_replications(adj_cfg, seeds, jobs)]
        rel = [
            relative_lost_pct(a.lost, b.lost, b.total_requests) if b.total_requests else 0.0
            for a, b in zip(adj, base)
        ]
        lost = [b.lost_pct for b in base]
        rows.append(SweepRow(
            multiplier=m,
            demand_supply_ratio=statistics.fmean(b.demand_supply_ratio for b in base),
            total_requests=statistics.fmean(b.total_requests for b in base),
            lost_pct=statistics.fmean(lost),
            lost_pct_sd=statistics.stdev(lost) if len(lost) > 1 else 0.0,
            avg_wait=statistics.fmean(b.avg_wait for b in base),
            scheme=kind,
            lost_pct_adj=statistics.fmean(a.lost_pct for a in adj),
            avg_wait_adj=statistics.fmean(a.avg_wait for a in adj),
            relative_lost_pct=statistics.fmean(rel),
            seeds=len(seeds),
        ))
    return rows

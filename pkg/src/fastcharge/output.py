"""CSV and JSON artifacts. Float formatting is fixed so reruns are byte-identical."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

from .engine import SimulationResult
from .metrics import RunSummary, arrival_rate_series, monetized_utility

CUSTOMER_COLUMNS = [
    "id", "spawn_time", "origin_x", "origin_y", "dest_x", "dest_y", "choice_set_size",
    "status", "lost_reason", "station_id", "wait_min", "total_min", "detour_mi",
    "payment_usd", "monetized_utility_usd",
]
SERIES_COLUMNS = ["station_id", "minute", "queue_len", "price_usd_per_hr", "cum_arrivals"]
ARRIVAL_RATE_COLUMNS = ["station_id", "bin_start", "arrivals"]


def _f(x: float) -> str:
    return repr(float(x))


def write_json(data, path: Path) -> None:
    path.write_text(json.dumps(data, indent=2) + "\n")


def write_summary(summary: RunSummary, path: Path) -> None:
    write_json(summary.to_dict(), path)


def write_customers(result: SimulationResult, path: Path) -> None:
    cp, lv = result.scenario.choice, result.scenario.lost_value
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CUSTOMER_COLUMNS)
        for o in sorted(result.outcomes, key=lambda o: o.id):
            w.writerow([
                o.id, _f(o.spawn_time), _f(o.origin.x), _f(o.origin.y), _f(o.dest.x), _f(o.dest.y),
                o.choice_set_size_at_spawn, o.status.value,
                o.lost_reason.value if o.lost_reason else "", o.station_id or "",
                _f(o.wait), _f(o.total_time), _f(o.detour_total), _f(o.payment),
                _f(monetized_utility(o, cp, lv)),
            ])


def write_timeseries(result: SimulationResult, path: Path) -> None:
    s = result.series
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_COLUMNS)
        for i, sid in enumerate(s.station_ids):
            for k, minute in enumerate(s.minutes):
                w.writerow([sid, int(minute), int(s.queue_len[i, k]), _f(s.price[i, k]), int(s.cum_arrivals[i, k])])


def write_arrival_rates(result: SimulationResult, path: Path) -> None:
    sc = result.scenario
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ARRIVAL_RATE_COLUMNS)
        for st in result.stations:
            starts, counts = arrival_rate_series(st.arrival_times, sc.demand.sim_start, sc.bin_minutes)
            for b, c in zip(starts, counts):
                w.writerow([st.id, _f(b), int(c)])


def write_run(result: SimulationResult, summary: RunSummary, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    write_summary(summary, outdir / "summary.json")
    write_customers(result, outdir / "customers.csv")
    write_timeseries(result, outdir / "timeseries.csv")
    write_arrival_rates(result, outdir / "arrival_rates.csv")


def write_sweep(rows: Sequence, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    dicts = [asdict(r) for r in rows]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(dicts[0]), lineterminator="\n")
        w.writeheader()
        for d in dicts:
            w.writerow({k: _f(v) if isinstance(v, float) else v for k, v in d.items()})

"""Command-line entry point: run, sweep, validate, gen-demo."""

from __future__ import annotations

import argparse
import shutil
import sys
from importlib import resources
from pathlib import Path

from .config import ConfigError, dump_config, load_config
from .demo import build_demo
from .metrics import summarize
from .oracle import MMcParams, UnstableSystemError, mmc_metrics, simulate_mmc
from .output import write_json, write_run, write_sweep
from .pricing import SchemeKind
from .runner import aggregate, multipliers_for_ratios, replication_seeds, run_replications, sweep


def bundled_scenario(name: str = "congested_demo") -> Path:
    return Path(str(resources.files("fastcharge") / "scenarios" / f"{name}.json"))


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "scheme", None):
        cfg = cfg.with_updates(pricing={"kind": args.scheme})
    return cfg


def cmd_run(args) -> int:
    cfg = _load(args)
    if args.seed is not None:
        cfg = cfg.with_updates(seed=args.seed)
    out = Path(args.out or cfg.output.dir)
    seeds = replication_seeds(cfg, args.replications)
    results = run_replications(cfg, seeds, args.jobs)
    summaries = []
    for k, res in enumerate(results):
        summary = summarize(res)
        summaries.append(summary)
        write_run(res, summary, out / f"rep_{k:03d}")
    agg = aggregate(summaries)
    write_json({"seeds": seeds, "metrics": agg}, out / "aggregate.json")
    for key in ("total_requests", "lost_pct", "avg_wait", "total_revenue", "social_welfare", "peak_avg_queue"):
        print(f"{key:>22s}  {agg[key]['mean']:.4f} +/- {agg[key]['sd']:.4f}")
    print(f"wrote {len(results)} replication(s) to {out}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if args.ratios:
        mults = multipliers_for_ratios(cfg, _floats(args.ratios))
    elif args.multipliers:
        mults = _floats(args.multipliers)
    else:
        print("sweep needs --ratios or --multipliers", file=sys.stderr)
        return 2
    seeds = [cfg.seed + k for k in range(args.seeds)]
    rows = sweep(cfg, mults, seeds, args.jobs)
    path = Path(args.out or cfg.output.dir) / "sweep.csv"
    write_sweep(rows, path)
    print(f"{'multiplier':>11s} {'ratio':>7s} {'lost%':>7s} {'wait':>7s} {'rel_lost%':>10s}")
    for r in rows:
        print(f"{r.multiplier:11.5f} {r.demand_supply_ratio:7.3f} {r.lost_pct:7.2f} {r.avg_wait:7.2f} "
              f"{r.relative_lost_pct:10.3f}")
    print(f"wrote {path}")
    return 0


def cmd_validate(args) -> int:
    params = MMcParams(args.lam, args.mu, args.servers)
    lq, wq = mmc_metrics(params)
    sim = simulate_mmc(params, int(args.arrivals), seed=args.seed)
    ok = True
    print(f"{'metric':>6s} {'simulated':>11s} {'erlang_c':>11s} {'rel_err':>9s}")
    for name, s, a in (("Lq", sim.lq, lq), ("Wq", sim.wq, wq)):
        err = abs(s - a) / a
        ok &= err <= args.tol
        print(f"{name:>6s} {s:11.5f} {a:11.5f} {err:9.4f}")
    print("PASS" if ok else "FAIL", f"(tolerance {args.tol:.0%})")
    return 0 if ok else 1


def cmd_gen_demo(args) -> int:
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.preset:
        shutil.copyfile(bundled_scenario(args.preset), out)
    else:
        cfg = build_demo(
            target_ratio=args.target_ratio,
            grid=args.grid,
            cell=args.cell,
            n_stations=args.stations,
            seed=args.layout_seed,
            mass_sigma=args.mass_sigma,
            max_chargers=args.max_chargers,
        )
        dump_config(cfg, out)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fastcharge", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario and write summary/customer/time-series files")
    r.add_argument("config")
    r.add_argument("--seed", type=int)
    r.add_argument("--replications", type=int)
    r.add_argument("--scheme", choices=[k.value for k in SchemeKind])
    r.add_argument("--out")
    r.add_argument("--jobs", type=int, default=1)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="lost customers across demand levels")
    s.add_argument("config")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--ratios", help="comma-separated demand:supply targets")
    g.add_argument("--multipliers", help="comma-separated penetration multipliers")
    s.add_argument("--seeds", type=int, default=10)
    s.add_argument("--scheme", choices=[k.value for k in SchemeKind])
    s.add_argument("--out")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate", help="single-station M/M/c run against Erlang-C")
    v.add_argument("--lam", type=float, default=1.5)
    v.add_argument("--mu", type=float, default=1.0)
    v.add_argument("--servers", type=int, default=2)
    v.add_argument("--arrivals", type=float, default=1_000_000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=0.05)
    v.set_defaults(func=cmd_validate)

    d = sub.add_parser("gen-demo", help="write a synthetic grid scenario")
    d.add_argument("--out", required=True)
    d.add_argument("--preset", choices=["congested_demo"], help="copy a bundled scenario instead")
    d.add_argument("--grid", type=int, default=4)
    d.add_argument("--cell", type=float, default=15.0)
    d.add_argument("--stations", type=int, default=20)
    d.add_argument("--layout-seed", type=int, default=0)
    d.add_argument("--mass-sigma", type=float, default=0.8)
    d.add_argument("--max-chargers", type=int, default=6)
    d.add_argument("--target-ratio", type=float)
    d.set_defaults(func=cmd_gen_demo)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnstableSystemError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

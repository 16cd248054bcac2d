"""Command-line front end.

Subcommands bind a scenario JSON file to the pipeline and write
machine-readable outputs into --out:

    plan        one cold planning cycle      -> solution.json
    episode     closed-loop simulation       -> episode.json, metrics.json
    montecarlo  randomized trials            -> trials.csv, aggregate.json, timing.json
    bench       runtime profile              -> runtime_hist.csv, bench.json

Exit codes: 0 success, 1 planning/episode failure, 2 configuration error.
"""

import argparse
import csv
import json
import logging
import os
import sys

log = logging.getLogger("fcplanner")


def _parse_set(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        key, val = item.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="fcplanner",
        description="Frenet corridor path planning scenarios",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="scenario JSON file")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a planner or harness knob (repeatable)")
    common.add_argument("--single-thread", action="store_true",
                        help="pin numeric libraries to one thread")

    sub.add_parser("plan", parents=[common])
    ep = sub.add_parser("episode", parents=[common])
    ep.add_argument("--planner", choices=("fcp", "astar"), default="fcp")
    mc = sub.add_parser("montecarlo", parents=[common])
    mc.add_argument("--trials", type=int, default=50)
    mc.add_argument("--planner", choices=("fcp", "astar"), default="fcp")
    bench = sub.add_parser("bench", parents=[common])
    bench.add_argument("--runs", type=int, default=1000)
    return ap


def _write_json(payload, out_dir, name):
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.info("wrote %s", path)


def _load(args):
    from .harness import load_scenario

    sc = load_scenario(args.scenario)
    overrides = _parse_set(getattr(args, "set", None))
    if overrides:
        merged = dict(sc.overrides)
        merged.update(overrides)
        sc.overrides = merged
        # surface unknown keys before any heavy work starts
        from .harness.episode import PipelineConfig
        PipelineConfig.from_overrides(merged)
    return sc


def _cmd_plan(args) -> int:
    import numpy as np

    from .decision import DecisionGovernor
    from .frenet import build_reference
    from .harness.episode import PipelineConfig, _ego_frenet, plan_cycle

    sc = _load(args)
    cfg = PipelineConfig.from_overrides(sc.overrides, risk_mode=sc.risk_mode)
    cfg.processor = cfg.processor.with_ego(sc.ego.length, sc.ego.width)
    half_w = sc.ego.width / 2
    ref = build_reference(sc.reference)
    governor = DecisionGovernor(sc.road_lb + half_w, sc.road_ub - half_w,
                                ego_width=0.0, clearance=cfg.clearance,
                                risk_mode=cfg.risk_mode, hysteresis=cfg.hysteresis)
    state = _ego_frenet(ref, sc)
    rng = np.random.default_rng(args.seed)
    draws = rng.normal(size=(len(sc.obstacles), 3))
    perceived = [
        o.as_raw(0.0, dx=draws[i, 0] * sc.noise_pos,
                 dy=draws[i, 1] * sc.noise_pos,
                 dyaw=draws[i, 2] * sc.noise_yaw)
        for i, o in enumerate(sc.obstacles)
    ]
    path, corridor, sol, cause = plan_cycle(
        ref, sc.road_lb + half_w, sc.road_ub - half_w, perceived, state,
        cfg, governor,
    )
    if cause is not None or sol is None:
        log.error("planning failed: %s", cause or "no solution")
        _write_json({"scenario": sc.name, "failed": True, "cause": cause},
                    args.out, "solution.json")
        return 1
    payload = sol.to_dict(corridor)
    payload["scenario"] = sc.name
    payload["seed"] = args.seed
    _write_json(payload, args.out, "solution.json")
    return 0


def _cmd_episode(args) -> int:
    from .harness import compute_metrics, run_episode

    sc = _load(args)
    ep = run_episode(sc, planner=args.planner, seed=args.seed)
    report = compute_metrics(ep)
    _write_json(ep.to_dict(), args.out, "episode.json")
    _write_json(report.to_dict(), args.out, "metrics.json")
    if ep.aborted:
        log.error("episode aborted: %s", ep.abort_cause)
        return 1
    log.info("episode finished: %d cycles, passed=%s", report.cycles, report.passed)
    return 0


def _cmd_montecarlo(args) -> int:
    from .harness import monte_carlo

    sc = _load(args)
    result = monte_carlo(sc, trials=args.trials, seed=args.seed,
                         planner=args.planner)
    rows = result["trials"]
    fieldnames = list(rows[0].keys())
    csv_path = os.path.join(args.out, "trials.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    log.info("wrote %s", csv_path)
    _write_json(result["aggregate"], args.out, "aggregate.json")
    _write_json(result["timing"], args.out, "timing.json")
    return 0


def _cmd_bench(args) -> int:
    from .harness import bench_solves

    sc = _load(args)
    result = bench_solves(sc, runs=args.runs, seed=args.seed)
    edges = result.pop("hist_edges")
    counts = result.pop("hist_counts")
    times = result.pop("times")
    hist_path = os.path.join(args.out, "runtime_hist.csv")
    with open(hist_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "count"])
        for i, c in enumerate(counts):
            writer.writerow([f"{edges[i]:.6f}", f"{edges[i + 1]:.6f}", int(c)])
    log.info("wrote %s (%d samples)", hist_path, len(times))
    _write_json(result, args.out, "bench.json")
    print(f"runs={result['runs']} mean={result['mean']:.4f}s "
          f"max={result['max']:.4f}s p95={result['p95']:.4f}s")
    return 0


def main(argv=None) -> int:
    level = os.environ.get("FCP_LOG_LEVEL", "info").lower()
    if level not in ("error", "info", "debug"):
        print(f"invalid FCP_LOG_LEVEL {level!r}", file=sys.stderr)
        return 2
    logging.basicConfig(level=getattr(logging, level.upper()),
                        format="%(levelname)s %(message)s")

    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    if getattr(args, "single_thread", False):
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                    "NUMEXPR_NUM_THREADS"):
            os.environ[var] = "1"

    try:
        os.makedirs(args.out, exist_ok=True)
        if args.command == "plan":
            return _cmd_plan(args)
        if args.command == "episode":
            return _cmd_episode(args)
        if args.command == "montecarlo":
            return _cmd_montecarlo(args)
        if args.command == "bench":
            return _cmd_bench(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return 2
    return 2


def run():
    raise SystemExit(main())


if __name__ == "__main__":
    run()

"""Command line entry point: ``map run | topo | gen-requests``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .harness import ScenarioError, Scenario, aggregate_json, csv_text, emit_results, run_scenario, solutions_json
from .request import RequestError, save_requests
from .topology import TopologyError, build_grid, build_random, save_topology

EXIT_OK, EXIT_CONFIG, EXIT_RUN = 0, 1, 2


def _cmd_run(args) -> int:
    try:
        s = Scenario.load(args.config)
        if args.seed is not None:
            s.base_seed = args.seed
        if args.mapping_limit is not None:
            s = dataclasses.replace(s, mapping_limit=args.mapping_limit)
        if args.algorithms:
            s = dataclasses.replace(s, algorithms=tuple(a.strip() for a in args.algorithms.split(",") if a.strip()))
        if args.no_timing:
            s.record_timing = False
    except (ScenarioError, TopologyError, RequestError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run_scenario(s, keep_solutions=args.solutions is not None)
        emit_results(report, args.out_csv, args.out_json)
        if args.solutions:
            Path(args.solutions).write_text(solutions_json(report))
    except (TopologyError, RequestError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - surfaced as a run failure exit code
        print(f"run error: {exc}", file=sys.stderr)
        return EXIT_RUN
    if args.out_csv is None:
        sys.stdout.write(csv_text(report))
    if args.out_json is None:
        sys.stdout.write(aggregate_json(report))
    return EXIT_OK


def _cmd_topo(args) -> int:
    try:
        if args.grid:
            rows, cols = (int(x) for x in args.grid.lower().split("x"))
            topo = build_grid(rows, cols)
        else:
            n, p = args.random.split(",")
            topo = build_random(int(n), float(p), args.seed)
    except (ValueError, TopologyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    save_topology(topo, args.out)
    return EXIT_OK


def _cmd_gen_requests(args) -> int:
    try:
        s = Scenario.load(args.config)
        testbed = s.build_topology(args.seed)
        gen = dataclasses.replace(s, request_file=None, request_count=args.count)
        reqs = gen.build_requests(testbed, args.seed)
    except (ScenarioError, TopologyError, RequestError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    save_requests(reqs, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="map", description="Wireless testbed request mapper")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write metrics")
    run.add_argument("--config", required=True)
    run.add_argument("--out-csv")
    run.add_argument("--out-json")
    run.add_argument("--solutions", help="write per-run served placements and channels as JSON")
    run.add_argument("--seed", type=int, help="override the scenario base seed")
    run.add_argument("--mapping-limit", type=int)
    run.add_argument("--algorithms", help="comma-separated subset of ga,bf")
    run.add_argument("--no-timing", action="store_true", help="write wall_ms as 0 for byte-stable output")
    run.set_defaults(func=_cmd_run)

    topo = sub.add_parser("topo", help="write a generated testbed topology")
    shape = topo.add_mutually_exclusive_group(required=True)
    shape.add_argument("--grid", metavar="RxC")
    shape.add_argument("--random", metavar="N,P")
    topo.add_argument("--seed", type=int, default=0)
    topo.add_argument("--out", required=True)
    topo.set_defaults(func=_cmd_topo)

    gen = sub.add_parser("gen-requests", help="write a generated request batch")
    gen.add_argument("--config", required=True)
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_gen_requests)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

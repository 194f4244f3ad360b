"""Scenario runner: repeated seeded runs of the GA and/or brute force, with metrics."""

from __future__ import annotations

import csv
import io
import json
import logging
import statistics
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .brute_force import DEFAULT_SEARCH_CAP, SearchSpaceTooLarge, brute_force_optimum
from .ga import GAConfig, MapperSolution, compute_candidates, run_mapper
from .request import GeneratorParams, NodeKind, Request, generate_requests, load_requests, validate_request
from .topology import (
    DEFAULT_INTERFACE_TYPES,
    InterfaceType,
    TestbedTopology,
    build_grid,
    build_random,
    eight_node_path,
    load_topology,
)

log = logging.getLogger(__name__)

ALGORITHMS = ("bf", "ga")
CSV_HEADER = ("seed", "algorithm", "served", "fitness", "feasible", "wall_ms")


class ScenarioError(ValueError):
    """The scenario description is invalid."""


@dataclass
class TopologySpec:
    kind: str = "grid"  # grid | random | file | crc8
    rows: int = 3
    cols: int = 3
    n: int = 9
    edge_prob: float = 0.3
    seed: int | None = None  # random only; None draws a fresh topology per repetition
    path: str | None = None

    def build(self, interface_types: Sequence[InterfaceType], rep_seed: int) -> TestbedTopology:
        if self.kind == "grid":
            return build_grid(self.rows, self.cols, interface_types)
        if self.kind == "random":
            seed = self.seed if self.seed is not None else rep_seed
            return build_random(self.n, self.edge_prob, seed, interface_types)
        if self.kind == "file":
            return load_topology(self.path)
        if self.kind == "crc8":
            return load_topology(eight_node_path())
        raise ScenarioError(f"unknown topology kind {self.kind!r}")

    def label(self) -> str:
        if self.kind == "grid":
            return f"grid{self.rows}x{self.cols}"
        if self.kind == "random":
            return f"random{self.n}p{self.edge_prob:g}"
        return self.kind if self.kind != "file" else Path(self.path).stem


@dataclass
class Scenario:
    topology: TopologySpec = field(default_factory=TopologySpec)
    interface_types: tuple[InterfaceType, ...] = DEFAULT_INTERFACE_TYPES
    request_count: int = 5
    generator: GeneratorParams = field(default_factory=GeneratorParams)
    request_file: str | None = None
    mapping_limit: int | None = None
    virtualization: bool = False
    ga: GAConfig = field(default_factory=GAConfig)
    repetitions: int = 10
    base_seed: int = 0
    algorithms: tuple[str, ...] = ("ga",)
    bf_cap: int = DEFAULT_SEARCH_CAP
    record_timing: bool = True

    def __post_init__(self):
        if self.repetitions < 1:
            raise ScenarioError("repetitions must be >= 1")
        algs = tuple(sorted(set(self.algorithms)))
        if not algs:
            raise ScenarioError("select at least one algorithm")
        bad = set(algs) - set(ALGORITHMS)
        if bad:
            raise ScenarioError(f"unknown algorithm(s): {sorted(bad)}")
        self.algorithms = algs
        if self.mapping_limit is not None and self.mapping_limit < 1:
            raise ScenarioError("mapping_limit must be a positive integer")
        if self.request_file is None and self.request_count < 1:
            raise ScenarioError("request count must be >= 1")

    @property
    def generator_params(self) -> GeneratorParams:
        kind = NodeKind.VIRTUAL if self.virtualization else NodeKind.PHYSICAL
        return replace(self.generator, node_kind=kind)

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "Scenario":
        data = dict(data)
        try:
            topo = dict(data.pop("topology", {"kind": "grid"}))
            if "path" in topo and base_dir is not None:
                topo["path"] = str((base_dir / topo["path"]).resolve())
            kwargs = {"topology": TopologySpec(**topo)}
            if "interface_types" in data:
                kwargs["interface_types"] = tuple(
                    InterfaceType(int(t["id"]), int(t["max_channels"])) for t in data.pop("interface_types")
                )
            reqs = dict(data.pop("requests", {}))
            if "file" in reqs:
                path = Path(reqs.pop("file"))
                kwargs["request_file"] = str((base_dir / path).resolve() if base_dir else path)
            if "count" in reqs:
                kwargs["request_count"] = int(reqs.pop("count"))
            if "generator" in reqs:
                kwargs["generator"] = GeneratorParams.from_dict(reqs.pop("generator"))
            if reqs:
                raise ScenarioError(f"unknown request keys: {sorted(reqs)}")
            if "ga" in data:
                kwargs["ga"] = GAConfig.from_dict(data.pop("ga"))
            if "algorithms" in data:
                kwargs["algorithms"] = tuple(data.pop("algorithms"))
            for key in ("mapping_limit", "virtualization", "repetitions", "base_seed", "bf_cap", "record_timing"):
                if key in data:
                    kwargs[key] = data.pop(key)
            if data:
                raise ScenarioError(f"unknown scenario keys: {sorted(data)}")
            return cls(**kwargs)
        except (TypeError, KeyError) as exc:
            raise ScenarioError(f"malformed scenario: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path}: not valid JSON ({exc})") from exc
        return cls.from_dict(data, base_dir=path.parent)

    def build_topology(self, rep_seed: int) -> TestbedTopology:
        return self.topology.build(self.interface_types, rep_seed)

    def build_requests(self, testbed: TestbedTopology, rep_seed: int) -> list[Request]:
        if self.request_file is not None:
            reqs = load_requests(self.request_file)
            for r in reqs:
                validate_request(r, testbed)
            return reqs
        return generate_requests(self.request_count, testbed, rep_seed, self.generator_params)


@dataclass
class RunRow:
    seed: int
    algorithm: str
    served: int | None
    fitness: float | None
    feasible: bool | None
    wall_ms: float
    skipped: bool = False
    served_ids: tuple[int, ...] = ()
    penalty_free: bool = False


@dataclass
class MetricsReport:
    rows: list[RunRow]
    aggregates: dict
    solutions: dict[tuple[int, str], MapperSolution] = field(default_factory=dict, repr=False)


def _row(seed: int, alg: str, sol: MapperSolution, wall_ms: float) -> RunRow:
    return RunRow(
        seed,
        alg,
        sol.served_count,
        sol.fitness.total,
        sol.feasible,
        wall_ms,
        served_ids=tuple(s.request_id for s in sol.served),
        penalty_free=sol.fitness.feasible,
    )


def _stats(rows: list[RunRow]) -> dict:
    done = [r for r in rows if not r.skipped]
    served = [r.served for r in done]
    return {
        "runs": len(rows),
        "skipped": len(rows) - len(done),
        "mean_served": statistics.fmean(served) if served else None,
        "var_served": statistics.pvariance(served) if served else None,
        "mean_fitness": statistics.fmean(r.fitness for r in done) if done else None,
        "feasible_rate": sum(r.feasible for r in done) / len(done) if done else None,
        "mean_wall_ms": statistics.fmean(r.wall_ms for r in done) if done else None,
    }


def aggregate(rows: Sequence[RunRow]) -> dict:
    by_alg = {alg: [r for r in rows if r.algorithm == alg] for alg in ALGORITHMS}
    out: dict = {"per_algorithm": {alg: _stats(rs) for alg, rs in by_alg.items() if rs}}
    ga = {r.seed: r for r in by_alg["ga"]}
    bf = {r.seed: r for r in by_alg["bf"] if not r.skipped}
    pairs = [(ga[s], bf[s]) for s in sorted(ga) if s in bf]
    if pairs:
        out["compared_runs"] = len(pairs)
        out["served_match_rate"] = sum(g.served == b.served for g, b in pairs) / len(pairs)
        out["optimality_rate"] = sum(g.fitness == b.fitness for g, b in pairs) / len(pairs)
    else:
        out["compared_runs"] = 0
        out["served_match_rate"] = None
        out["optimality_rate"] = None
    # no-slicing baseline serves exactly one request per slot
    out["slicing_revenue"] = out["per_algorithm"]["ga"]["mean_served"] if ga else None
    return out


def run_scenario(s: Scenario, keep_solutions: bool = False) -> MetricsReport:
    rows: list[RunRow] = []
    solutions: dict[tuple[int, str], MapperSolution] = {}
    for k in range(s.repetitions):
        seed = s.base_seed + k
        testbed = s.build_topology(seed)
        requests = s.build_requests(testbed, seed)
        candidates = compute_candidates(requests, testbed, s.mapping_limit)
        cfg = replace(s.ga, seed=seed)
        for alg in s.algorithms:
            t0 = time.perf_counter()
            try:
                if alg == "ga":
                    sol = run_mapper(requests, testbed, s.mapping_limit, cfg, candidates=candidates)
                else:
                    sol = brute_force_optimum(requests, testbed, s.mapping_limit, cfg, candidates=candidates, cap=s.bf_cap)
            except SearchSpaceTooLarge as exc:
                log.warning("seed %d: brute force skipped (%s)", seed, exc)
                rows.append(RunRow(seed, alg, None, None, None, 0.0, skipped=True))
                continue
            wall_ms = (time.perf_counter() - t0) * 1e3 if s.record_timing else 0.0
            rows.append(_row(seed, alg, sol, wall_ms))
            if keep_solutions:
                solutions[(seed, alg)] = sol
            log.info("seed %d %s: served %d fitness %.6g", seed, alg, sol.served_count, sol.fitness.total)
    rows.sort(key=lambda r: (r.seed, r.algorithm))
    return MetricsReport(rows, aggregate(rows), solutions)


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.6g}"


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.6g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_round_floats(v) for v in obj]
    return obj


def csv_text(report: MetricsReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in report.rows:
        if r.skipped:
            feasible = "skipped"
        else:
            feasible = "true" if r.feasible else "false"
        w.writerow([r.seed, r.algorithm, "" if r.served is None else r.served, _fmt(r.fitness), feasible, _fmt(r.wall_ms)])
    return buf.getvalue()


def aggregate_json(report: MetricsReport) -> str:
    return json.dumps(_round_floats(report.aggregates), indent=2, sort_keys=False) + "\n"


def emit_results(report: MetricsReport, csv_path: str | Path | None = None, json_path: str | Path | None = None) -> None:
    if csv_path is not None:
        Path(csv_path).write_text(csv_text(report))
    if json_path is not None:
        Path(json_path).write_text(aggregate_json(report))


def solutions_json(report: MetricsReport) -> str:
    out = [
        {"seed": seed, "algorithm": alg, **sol.to_dict()}
        for (seed, alg), sol in sorted(report.solutions.items())
    ]
    return json.dumps(out, indent=1) + "\n"


def scenario_dict(s: Scenario) -> dict:
    """JSON-ready form of a scenario (round-trips through Scenario.from_dict)."""
    gen = asdict(s.generator)
    gen["node_kind"] = s.generator.node_kind.value
    reqs = {"file": s.request_file} if s.request_file else {"count": s.request_count, "generator": gen}
    return {
        "topology": {k: v for k, v in asdict(s.topology).items() if v is not None},
        "interface_types": [{"id": t.id, "max_channels": t.max_channels} for t in s.interface_types],
        "requests": reqs,
        "mapping_limit": s.mapping_limit,
        "virtualization": s.virtualization,
        "ga": asdict(s.ga),
        "repetitions": s.repetitions,
        "base_seed": s.base_seed,
        "algorithms": list(s.algorithms),
        "bf_cap": s.bf_cap,
        "record_timing": s.record_timing,
    }

"""Genetic-algorithm stage: choose which requests to serve and with which placement.

A chromosome carries one gene per request: a serve bit and an index into that
request's candidate placements. Fitness is minimized:

    total = large_number * (resource_conflicts + channel_conflicts)
            + sum over rejected requests of (w1 / priority_rank + w2 * duration_slots)
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field, fields
from typing import NamedTuple, Sequence

import numpy as np

from .conflicts import (
    assign_channels,
    claim_mask,
    count_channel_conflicts,
    count_conflicts,
    masked_resource_conflicts,
)
from .isomorphism import PlacementMapping, candidate_array
from .request import Request
from .topology import TestbedTopology

log = logging.getLogger(__name__)


@dataclass
class GAConfig:
    population_size: int = 60
    crossover_prob: float = 0.8
    mutation_prob: float = 0.2
    max_generations: int = 500
    stall_generations: int = 50
    stall_rel_tolerance: float = 1e-6
    w1: float = 1.0
    w2: float = 1.0
    large_number: float = 1e6
    elitism_count: int = 1
    seed: int = 0
    channel_precheck: bool = True

    def __post_init__(self):
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        for name in ("crossover_prob", "mutation_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.max_generations < 1 or self.stall_generations < 1:
            raise ValueError("max_generations and stall_generations must be >= 1")
        if self.w1 < 0 or self.w2 < 0:
            raise ValueError("w1 and w2 must be non-negative")
        if not 0 <= self.elitism_count <= self.population_size:
            raise ValueError("elitism_count must lie in [0, population_size]")

    @classmethod
    def from_dict(cls, data: dict) -> "GAConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown GA config keys: {sorted(unknown)}")
        return cls(**data)

    def check_dominance(self, requests: Sequence[Request]) -> None:
        """large_number must outweigh every possible rejection sum."""
        if not requests:
            return
        bound = len(requests) * (self.w1 + self.w2 * max(r.duration_slots for r in requests))
        if not self.large_number > bound:
            raise ValueError(f"large_number {self.large_number} does not dominate the rejection bound {bound}")


class Gene(NamedTuple):
    serve: bool
    mapping_index: int | None


@dataclass(frozen=True)
class Chromosome:
    genes: tuple[Gene, ...]

    def __len__(self) -> int:
        return len(self.genes)

    def served(self) -> list[int]:
        return [i for i, g in enumerate(self.genes) if g.serve]

    def key(self) -> tuple[int, ...]:
        """Genotype as seen by the fitness function (unserved genes collapse to -1)."""
        return tuple(g.mapping_index if g.serve else -1 for g in self.genes)


@dataclass(frozen=True)
class FitnessBreakdown:
    rejection_cost: float
    resource_conflicts: int
    channel_conflicts: int
    total: float

    @property
    def conflicts(self) -> int:
        return self.resource_conflicts + self.channel_conflicts

    @property
    def feasible(self) -> bool:
        return self.conflicts == 0


@dataclass
class ServedRequest:
    request_id: int
    mapping: PlacementMapping
    channels: dict[int, list[int]]


@dataclass
class MapperSolution:
    served: list[ServedRequest]
    fitness: FitnessBreakdown
    generations_run: int
    feasible: bool
    chromosome: Chromosome | None = None
    history: list[float] = field(default_factory=list)

    @property
    def served_count(self) -> int:
        return len(self.served)

    def to_dict(self) -> dict:
        return {
            "served": [
                {
                    "request_id": s.request_id,
                    "assignment": list(s.mapping.assignment),
                    "channels": {str(t): c for t, c in sorted(s.channels.items())},
                }
                for s in self.served
            ],
            "fitness": {
                "rejection_cost": self.fitness.rejection_cost,
                "resource_conflicts": self.fitness.resource_conflicts,
                "channel_conflicts": self.fitness.channel_conflicts,
                "total": self.fitness.total,
            },
            "generations_run": self.generations_run,
            "feasible": self.feasible,
        }


def _make_breakdown(rej: float, res: int, ch: int, large_number: float) -> FitnessBreakdown:
    return FitnessBreakdown(rej, res, ch, large_number * (res + ch) + rej)


def _rejection_sum(costs: Sequence[float], served: Sequence[bool]) -> float:
    # fixed summation order: identical floats across every evaluation path
    rej = 0.0
    for cost, s in zip(costs, served):
        if not s:
            rej += cost
    return rej


def evaluate_fitness(
    c: Chromosome,
    requests: Sequence[Request],
    candidate_mappings: Sequence[Sequence[PlacementMapping]],
    testbed: TestbedTopology,
    cfg: GAConfig,
) -> FitnessBreakdown:
    """Reference fitness: conflicts recounted from explicit claims."""
    active = [(requests[i], candidate_mappings[i][c.genes[i].mapping_index]) for i in c.served()]
    report = count_conflicts(active, testbed)
    costs = [r.rejection_cost(cfg.w1, cfg.w2) for r in requests]
    rej = _rejection_sum(costs, [g.serve for g in c.genes])
    return _make_breakdown(rej, report.resource_conflicts, report.channel_conflicts, cfg.large_number)


class CandidateSet(Sequence[PlacementMapping]):
    """Candidate placements of one request, stored as a (K, N_r) int array."""

    def __init__(self, request_id: int, assignments: np.ndarray):
        self.request_id = request_id
        self.assignments = assignments

    def __len__(self) -> int:
        return len(self.assignments)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return [self[i] for i in range(*idx.indices(len(self)))]
        return PlacementMapping(self.request_id, tuple(int(x) for x in self.assignments[idx]))


def compute_candidates(
    requests: Sequence[Request], testbed: TestbedTopology, mapping_limit: int | None = None
) -> list[CandidateSet]:
    return [CandidateSet(r.id, candidate_array(r, testbed, mapping_limit)) for r in requests]


class MappingProblem:
    """Requests, their candidate placements and the testbed, compiled for fast evaluation.

    Resource conflicts use per-placement unit bitmasks; channel conflicts depend
    only on which requests are served and are cached per served set.
    """

    def __init__(
        self,
        requests: Sequence[Request],
        candidates: Sequence[Sequence[PlacementMapping] | CandidateSet],
        testbed: TestbedTopology,
        cfg: GAConfig,
    ):
        if len(requests) != len(candidates):
            raise ValueError("one candidate list per request is required")
        self.requests = list(requests)
        self.candidates = list(candidates)
        self.testbed = testbed
        self.cfg = cfg
        self.n = len(self.requests)
        self.n_candidates = [len(c) for c in self.candidates]
        self.costs = [r.rejection_cost(cfg.w1, cfg.w2) for r in self.requests]
        self._masks: dict[tuple[int, int], int] = {}
        self._channel_cache: dict[tuple[int, ...], int] = {}
        self.channels_never_conflict = cfg.channel_precheck and count_channel_conflicts(self.requests, testbed) == 0
        self._cache: dict[tuple[int, ...], FitnessBreakdown] = {}

    def assignment(self, i: int, idx: int) -> tuple[int, ...]:
        cand = self.candidates[i]
        if isinstance(cand, CandidateSet):
            return tuple(int(x) for x in cand.assignments[idx])
        return tuple(cand[idx].assignment)

    def mapping(self, i: int, idx: int) -> PlacementMapping:
        return PlacementMapping(self.requests[i].id, self.assignment(i, idx))

    def mask(self, i: int, idx: int) -> int:
        key = (i, idx)
        m = self._masks.get(key)
        if m is None:
            m = claim_mask(self.requests[i], self.assignment(i, idx), self.testbed)
            self._masks[key] = m
        return m

    def channel_conflicts(self, served: tuple[int, ...]) -> int:
        if self.channels_never_conflict:
            return 0
        ch = self._channel_cache.get(served)
        if ch is None:
            ch = count_channel_conflicts([self.requests[i] for i in served], self.testbed)
            self._channel_cache[served] = ch
        return ch

    def rejection(self, served_flags: Sequence[bool]) -> float:
        return _rejection_sum(self.costs, served_flags)

    def evaluate(self, c: Chromosome) -> FitnessBreakdown:
        key = c.key()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        served = tuple(i for i, k in enumerate(key) if k >= 0)
        res = masked_resource_conflicts(self.mask(i, key[i]) for i in served)
        ch = self.channel_conflicts(served)
        rej = self.rejection([k >= 0 for k in key])
        fb = _make_breakdown(rej, res, ch, self.cfg.large_number)
        self._cache[key] = fb
        return fb

    def solution(self, c: Chromosome, generations_run: int, history: list[float] | None = None) -> MapperSolution:
        fb = self.evaluate(c)
        served_idx = c.served()
        served = []
        if fb.feasible:
            chans = assign_channels([self.requests[i] for i in served_idx], self.testbed)
            for i in served_idx:
                rid = self.requests[i].id
                served.append(ServedRequest(rid, self.mapping(i, c.genes[i].mapping_index), chans[rid]))
        else:
            for i in served_idx:
                rid = self.requests[i].id
                served.append(ServedRequest(rid, self.mapping(i, c.genes[i].mapping_index), {}))
        return MapperSolution(served, fb, generations_run, fb.feasible, c, history or [])


def _random_gene(k: int, rng: random.Random) -> Gene:
    serve = rng.random() < 0.5
    if k == 0:
        return Gene(False, None)
    return Gene(serve, rng.randrange(k))


def initialize_population(
    requests: Sequence[Request],
    candidate_mappings: Sequence[Sequence[PlacementMapping]],
    cfg: GAConfig,
    rng: random.Random | None = None,
) -> list[Chromosome]:
    rng = rng if rng is not None else random.Random(cfg.seed)
    sizes = [len(c) for c in candidate_mappings]
    return [Chromosome(tuple(_random_gene(k, rng) for k in sizes)) for _ in range(cfg.population_size)]


def crossover(a: Chromosome, b: Chromosome, rng: random.Random) -> tuple[Chromosome, Chromosome]:
    """Single-point crossover with the cut drawn uniformly from [1, n-1]."""
    n = len(a)
    if n < 2:
        return a, b
    cut = rng.randint(1, n - 1)
    return Chromosome(a.genes[:cut] + b.genes[cut:]), Chromosome(b.genes[:cut] + a.genes[cut:])


def mutate(c: Chromosome, sizes: Sequence[int], rng: random.Random) -> Chromosome:
    """Pick one gene; toggle its serve bit or redraw its placement, each with probability 0.5."""
    i = rng.randrange(len(c))
    k = sizes[i]
    g = c.genes[i]
    if rng.random() < 0.5:
        new = Gene(not g.serve and k > 0, g.mapping_index)
    else:
        new = Gene(g.serve, rng.randrange(k) if k else None)
    return Chromosome(c.genes[:i] + (new,) + c.genes[i + 1 :])


def _tournament(population: Sequence[Chromosome], totals: Sequence[float], rng: random.Random) -> Chromosome:
    i = rng.randrange(len(population))
    j = rng.randrange(len(population))
    return population[i] if totals[i] <= totals[j] else population[j]


def ga_step(
    population: Sequence[Chromosome],
    totals: Sequence[float],
    sizes: Sequence[int],
    cfg: GAConfig,
    rng: random.Random,
) -> list[Chromosome]:
    """One generation: elitism, binary tournament, crossover, mutation."""
    size = len(population)
    ranked = sorted(range(size), key=lambda i: (totals[i], i))
    nxt = [population[i] for i in ranked[: cfg.elitism_count]]
    while len(nxt) < size:
        a = _tournament(population, totals, rng)
        b = _tournament(population, totals, rng)
        if rng.random() < cfg.crossover_prob:
            a, b = crossover(a, b, rng)
        for child in (a, b):
            if rng.random() < cfg.mutation_prob:
                child = mutate(child, sizes, rng)
            if len(nxt) < size:
                nxt.append(child)
    return nxt


def repair(c: Chromosome, problem: MappingProblem) -> Chromosome:
    """Drop served requests greedily until the chromosome has no conflicts.

    Each round removes the request whose removal leaves the fewest conflicts;
    ties go to the cheaper rejection, then the lower request id.
    """
    while not problem.evaluate(c).feasible:
        best = None
        for i in c.served():
            genes = list(c.genes)
            genes[i] = Gene(False, genes[i].mapping_index)
            trial = Chromosome(tuple(genes))
            rank = (problem.evaluate(trial).conflicts, problem.costs[i], problem.requests[i].id)
            if best is None or rank < best[0]:
                best = (rank, trial)
        c = best[1]
    return c


def _relative_improvement(prev: float, cur: float) -> float:
    if prev == cur:
        return 0.0
    if prev == 0.0:
        return float("inf")
    return (prev - cur) / abs(prev)


def run_ga(problem: MappingProblem) -> MapperSolution:
    cfg = problem.cfg
    rng = random.Random(cfg.seed)
    sizes = problem.n_candidates
    if problem.n == 0:
        return problem.solution(Chromosome(()), 0)
    population = initialize_population(problem.requests, problem.candidates, cfg, rng)
    totals = [problem.evaluate(c).total for c in population]
    best_i = min(range(len(population)), key=lambda i: (totals[i], i))
    best, best_total = population[best_i], totals[best_i]
    history = [best_total]
    stall = 0
    gen = 0
    while gen < cfg.max_generations:
        population = ga_step(population, totals, sizes, cfg, rng)
        totals = [problem.evaluate(c).total for c in population]
        gen += 1
        i = min(range(len(population)), key=lambda i: (totals[i], i))
        rel = _relative_improvement(best_total, totals[i])
        if totals[i] < best_total:
            best, best_total = population[i], totals[i]
        history.append(best_total)
        stall = stall + 1 if rel < cfg.stall_rel_tolerance else 0
        if stall >= cfg.stall_generations:
            break
    # large_number dominance: an infeasible best means no feasible chromosome was ever seen
    if not problem.evaluate(best).feasible:
        log.debug("best chromosome infeasible after %d generations; repairing", gen)
        best = repair(best, problem)
    return problem.solution(best, gen, history)


def run_mapper(
    requests: Sequence[Request],
    testbed: TestbedTopology,
    mapping_limit: int | None = None,
    cfg: GAConfig | None = None,
    candidates: Sequence[Sequence[PlacementMapping]] | None = None,
) -> MapperSolution:
    """Both stages: enumerate placements (unless given), then run the GA."""
    cfg = cfg or GAConfig()
    cfg.check_dominance(requests)
    if candidates is None:
        candidates = compute_candidates(requests, testbed, mapping_limit)
    return run_ga(MappingProblem(requests, candidates, testbed, cfg))

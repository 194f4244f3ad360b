"""Exhaustive search over every serve/placement combination.

Every chromosome of the cross product {off, placement 0..k_r-1} per request is
scored. Scoring is vectorized: unit claims are packed into uint64 words, so the
resource conflicts of a combination are ``sum(popcount(claims)) - popcount(OR)``.
Channel conflicts and rejection cost depend only on the served subset and come
from lookup tables filled by the same routines the GA uses.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .ga import Chromosome, GAConfig, Gene, MapperSolution, MappingProblem, compute_candidates
from .isomorphism import PlacementMapping
from .request import Request
from .topology import TestbedTopology

DEFAULT_SEARCH_CAP = 10**8
CHUNK_ROWS = 1 << 16


class SearchSpaceTooLarge(RuntimeError):
    def __init__(self, size: int, cap: int):
        super().__init__(f"search space of {size} combinations exceeds the cap of {cap}")
        self.size = size
        self.cap = cap


def search_space_size(candidate_counts: Sequence[int]) -> int:
    return math.prod(k + 1 for k in candidate_counts)


def _pack(mask: int, words: int) -> list[int]:
    return [(mask >> (64 * w)) & 0xFFFFFFFFFFFFFFFF for w in range(words)]


class _Enumerator:
    """Walks the cross product over placeable requests in lexicographic chunks."""

    def __init__(self, problem: MappingProblem):
        self.problem = problem
        tb = problem.testbed
        self.words = max(1, -(-(tb.n_nodes * tb.n_interface_types) // 64))
        # requests without placements are always off and add no dimension
        self.active = [i for i, k in enumerate(problem.n_candidates) if k > 0]
        self.n = len(self.active)
        # option 0 is "off", option j + 1 is placement j
        self.opt_masks = []
        self.opt_claims = []
        for i in self.active:
            masks = [0] + [problem.mask(i, j) for j in range(problem.n_candidates[i])]
            self.opt_masks.append(np.array([_pack(m, self.words) for m in masks], dtype=np.uint64))
            self.opt_claims.append(np.array([m.bit_count() for m in masks], dtype=np.int64))
        self.sizes = [problem.n_candidates[i] + 1 for i in self.active]
        n_sub = 1 << self.n
        self.channel_table = np.zeros(n_sub, dtype=np.int64)
        self.rejection_table = np.zeros(n_sub, dtype=np.float64)
        self.served_table = np.zeros(n_sub, dtype=np.int64)
        for sub in range(n_sub):
            served = tuple(i for b, i in enumerate(self.active) if sub >> b & 1)
            flags = [False] * problem.n
            for i in served:
                flags[i] = True
            self.channel_table[sub] = problem.channel_conflicts(served)
            self.rejection_table[sub] = problem.rejection(flags)
            self.served_table[sub] = len(served)
        self.best_key = None
        self.best_genes = None

    def run(self) -> tuple[int, ...]:
        self._descend(0, (), 0, np.zeros(self.words, dtype=np.uint64), 0)
        return self.best_genes

    def _descend(self, depth: int, prefix: tuple[int, ...], subset: int, union: np.ndarray, claimed: int):
        rest = math.prod(self.sizes[depth:])
        if rest <= CHUNK_ROWS or depth == self.n:
            self._chunk(depth, prefix, subset, union, claimed)
            return
        for o in range(self.sizes[depth]):
            self._descend(
                depth + 1,
                prefix + (o,),
                subset | ((o > 0) << depth),
                union | self.opt_masks[depth][o],
                claimed + int(self.opt_claims[depth][o]),
            )

    def _chunk(self, depth: int, prefix: tuple[int, ...], subset: int, union: np.ndarray, claimed: int):
        w = self.words
        u = union.reshape(1, w)
        c = np.array([claimed], dtype=np.int64)
        s = np.array([subset], dtype=np.int64)
        for i in range(depth, self.n):
            k = self.sizes[i]
            u = (u[:, None, :] | self.opt_masks[i][None, :, :]).reshape(-1, w)
            c = (c[:, None] + self.opt_claims[i][None, :]).ravel()
            on = (np.arange(k) > 0).astype(np.int64) << i
            s = (s[:, None] | on[None, :]).ravel()
        res = c - np.bitwise_count(u).sum(axis=1, dtype=np.int64)
        conf = res + self.channel_table[s]
        total = self.problem.cfg.large_number * conf + self.rejection_table[s]
        # lexicographic chunk order: the first row among ties is the smallest gene vector
        cand = np.flatnonzero(total == total.min())
        cand = cand[conf[cand] == conf[cand].min()]
        served = self.served_table[s[cand]]
        row = int(cand[np.argmax(served)])
        key = (float(total[row]), int(conf[row]), -int(self.served_table[s[row]]))
        if self.best_key is None or key < self.best_key:
            self.best_key = key
            self.best_genes = prefix + tuple(int(x) for x in np.unravel_index(row, self.sizes[depth:]))


def brute_force_optimum(
    requests: Sequence[Request],
    testbed: TestbedTopology,
    mapping_limit: int | None = None,
    cfg: GAConfig | None = None,
    candidates: Sequence[Sequence[PlacementMapping]] | None = None,
    cap: int = DEFAULT_SEARCH_CAP,
) -> MapperSolution:
    """Minimum-fitness chromosome by exhaustive search.

    Ties are broken by fewer conflicts, then more served requests, then the
    lexicographically smallest gene vector (off < placement 0 < placement 1 ...).
    Raises SearchSpaceTooLarge when the product of (candidates + 1) exceeds ``cap``.
    """
    cfg = cfg or GAConfig()
    if candidates is None:
        candidates = compute_candidates(requests, testbed, mapping_limit)
    problem = MappingProblem(requests, candidates, testbed, cfg)
    size = search_space_size(problem.n_candidates)
    if size > cap:
        raise SearchSpaceTooLarge(size, cap)
    if problem.n == 0:
        return problem.solution(Chromosome(()), 0)
    enum = _Enumerator(problem)
    values = [0] * problem.n
    for i, v in zip(enum.active, enum.run()):
        values[i] = v
    genes = tuple(
        Gene(v > 0, v - 1 if v > 0 else (0 if k else None)) for v, k in zip(values, problem.n_candidates)
    )
    return problem.solution(Chromosome(genes), 0)

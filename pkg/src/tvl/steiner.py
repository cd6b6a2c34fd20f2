"""Steiner triple systems, the random tripartition reduction onto coloured
bipartite graphs, and the matching pipeline chasing the (n-4)/3 bound.

Points are labelled 0..n-1.  A reduction assigns each point to one of three
parts; part-A and part-B points become the two vertex sides, part-C points
become colours, and a crossing triple becomes an edge carrying its C point
as the colour.  Pair-uniqueness of the system forces the colouring proper,
and any rainbow matching in the reduced graph pulls back to a matching of
pairwise disjoint triples.
"""

from __future__ import annotations

import json
import math
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .core import ColouredBipartiteGraph, RainbowMatching
from .solvers import (
    greedy_rainbow_matching,
    local_switch_augment,
    max_rainbow_matching_exact,
)

__all__ = [
    "TripleSystem",
    "Partition",
    "PipelineConfig",
    "SeedOutcome",
    "BrouwerReport",
    "bose_sts",
    "tripartition_reduce",
    "matching_from_rainbow",
    "brouwer_pipeline",
    "sts_to_json",
    "sts_from_json",
]

Partition = tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]


@dataclass(frozen=True)
class TripleSystem:
    """Triple system in which every pair of points lies in exactly one
    triple.  Requires n = 1 or 3 (mod 6) and exactly n(n-1)/6 triples."""

    n: int
    triples: tuple[frozenset[int], ...]

    @classmethod
    def build(cls, n: int, triples) -> "TripleSystem":
        ts = cls(n, tuple(frozenset(t) for t in triples))
        ts.validate()
        return ts

    def validate(self) -> None:
        if self.n % 6 not in (1, 3):
            raise ValueError(f"order {self.n} is not 1 or 3 mod 6")
        if len(self.triples) != self.n * (self.n - 1) // 6:
            raise ValueError(
                f"{len(self.triples)} triples, expected {self.n * (self.n - 1) // 6}"
            )
        seen: set[frozenset[int]] = set()
        for t in self.triples:
            if len(t) != 3 or not all(0 <= p < self.n for p in t):
                raise ValueError(f"bad triple {sorted(t)}")
            for p in t:
                for q in t:
                    if p < q:
                        pair = frozenset((p, q))
                        if pair in seen:
                            raise ValueError(f"pair {sorted(pair)} covered twice")
                        seen.add(pair)
        if len(seen) != self.n * (self.n - 1) // 2:
            raise ValueError("some pair of points is uncovered")

    @property
    def triple_set(self) -> frozenset[frozenset[int]]:
        return frozenset(self.triples)


def bose_sts(m: int) -> TripleSystem:
    """Order-3m system over Z_m x {0,1,2} for odd m >= 3: one triple per
    column, and one per unordered pair within a level, closed off at the
    next level through the halved sum (the standard idempotent quasigroup
    x*y = (x+y)(m+1)/2 mod m)."""
    if m % 2 == 0 or m < 3:
        raise ValueError("the construction needs an odd m >= 3")
    half = (m + 1) // 2

    def pt(x: int, level: int) -> int:
        return x + m * level

    triples: list[frozenset[int]] = []
    for x in range(m):
        triples.append(frozenset((pt(x, 0), pt(x, 1), pt(x, 2))))
    for x in range(m):
        for y in range(x + 1, m):
            z = ((x + y) * half) % m
            for lvl in range(3):
                triples.append(
                    frozenset((pt(x, lvl), pt(y, lvl), pt(z, (lvl + 1) % 3)))
                )
    return TripleSystem.build(3 * m, triples)


def tripartition_reduce(
    s: TripleSystem,
    seed: int,
    balanced: bool = False,
    max_resample: int = 100_000,
) -> tuple[ColouredBipartiteGraph, Partition]:
    """Randomly three-part the points and read off the crossing triples as
    coloured edges.  For n = 1 (mod 6) the highest-labelled point is deleted
    first so the remaining count is divisible by 3.  With balanced=True the
    partition is redrawn until the three parts have equal size."""
    points = list(range(s.n))
    if s.n % 6 == 1:
        points.pop()
    rng = random.Random(seed)
    for _ in range(max_resample):
        labels = {p: rng.randrange(3) for p in points}
        sizes = [sum(1 for v in labels.values() if v == k) for k in range(3)]
        if not balanced or sizes[0] == sizes[1] == sizes[2]:
            break
    else:
        raise ValueError(f"no balanced partition within {max_resample} draws")
    part_a = tuple(p for p in points if labels[p] == 0)
    part_b = tuple(p for p in points if labels[p] == 1)
    part_c = tuple(p for p in points if labels[p] == 2)
    a_index = {p: i for i, p in enumerate(part_a)}
    b_index = {p: i for i, p in enumerate(part_b)}
    c_index = {p: i for i, p in enumerate(part_c)}
    kept = set(points)
    edges: list[tuple[int, int, int]] = []
    for t in s.triples:
        if not t <= kept:
            continue
        in_a = [p for p in t if labels[p] == 0]
        in_b = [p for p in t if labels[p] == 1]
        in_c = [p for p in t if labels[p] == 2]
        if len(in_a) == len(in_b) == len(in_c) == 1:
            edges.append((a_index[in_a[0]], b_index[in_b[0]], c_index[in_c[0]]))
    graph = ColouredBipartiteGraph.build(len(part_a), len(part_b), edges)
    return graph, (part_a, part_b, part_c)


def matching_from_rainbow(
    s: TripleSystem,
    matching: RainbowMatching,
    partition: Partition,
) -> tuple[tuple[int, int, int], ...]:
    """Pull a rainbow matching of a reduction back to disjoint triples, one
    per edge."""
    part_a, part_b, part_c = partition
    triple_set = s.triple_set
    out: list[tuple[int, int, int]] = []
    used: set[int] = set()
    for a, b, c in matching.edges:
        triple = frozenset((part_a[a], part_b[b], part_c[c]))
        if triple not in triple_set:
            raise ValueError(f"edge ({a},{b},{c}) does not come from a triple")
        if triple & used:
            raise ValueError("pulled-back triples overlap")
        used |= triple
        out.append(tuple(sorted(triple)))
    return tuple(sorted(out))


@dataclass(frozen=True)
class PipelineConfig:
    balanced: bool = True
    exact_limit: int = 12
    heuristic_rounds: int = 300
    threads: int = 1


@dataclass(frozen=True)
class SeedOutcome:
    seed: int
    part_sizes: tuple[int, int, int]
    matching_size: int
    optimal: bool


@dataclass(frozen=True)
class BrouwerReport:
    n: int
    target: int
    best_size: int
    best_seed: int
    best_triples: tuple[tuple[int, int, int], ...]
    outcomes: tuple[SeedOutcome, ...] = field(repr=False)

    @property
    def achieved(self) -> bool:
        return self.best_size >= self.target

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "target": self.target,
            "best_size": self.best_size,
            "best_seed": self.best_seed,
            "achieved": self.achieved,
            "best_triples": [list(t) for t in self.best_triples],
            "seeds": [
                {
                    "seed": o.seed,
                    "part_sizes": list(o.part_sizes),
                    "size": o.matching_size,
                    "optimal": o.optimal,
                }
                for o in self.outcomes
            ],
        }


def _solve_reduction(
    s: TripleSystem, seed: int, config: PipelineConfig
) -> tuple[SeedOutcome, RainbowMatching, Partition]:
    graph, partition = tripartition_reduce(s, seed, balanced=config.balanced)
    if max(graph.a_size, graph.b_size) <= config.exact_limit:
        res = max_rainbow_matching_exact(graph)
        matching, optimal = res.witness, res.optimal
    else:
        matching = greedy_rainbow_matching(graph)
        matching = local_switch_augment(
            graph, matching, rounds=config.heuristic_rounds, seed=seed
        )
        optimal = False
    sizes = (len(partition[0]), len(partition[1]), len(partition[2]))
    return SeedOutcome(seed, sizes, len(matching.edges), optimal), matching, partition


def brouwer_pipeline(
    s: TripleSystem,
    seeds: int,
    config: PipelineConfig | None = None,
) -> BrouwerReport:
    """Solve reductions across seeds 0..seeds-1 and report the best
    pulled-back matching against the ceil((n-4)/3) target.  Best is by size
    with ties to the lowest seed; the scan stops early once a reduction
    yields a perfect matching, which nothing later could beat."""
    config = config or PipelineConfig()
    target = math.ceil((s.n - 4) / 3)
    perfect = (s.n - (1 if s.n % 6 == 1 else 0)) // 3
    outcomes: list[SeedOutcome] = []
    best: tuple[SeedOutcome, RainbowMatching, Partition] | None = None

    def consume(item: tuple[SeedOutcome, RainbowMatching, Partition]) -> bool:
        nonlocal best
        outcomes.append(item[0])
        if best is None or item[0].matching_size > best[0].matching_size:
            best = item
        return item[0].matching_size >= perfect

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            futures = [
                pool.submit(_solve_reduction, s, seed, config)
                for seed in range(seeds)
            ]
            for fut in futures:  # seed order keeps aggregation deterministic
                if consume(fut.result()):
                    break
    else:
        for seed in range(seeds):
            if consume(_solve_reduction(s, seed, config)):
                break
    assert best is not None
    outcome, matching, partition = best
    triples = matching_from_rainbow(s, matching, partition)
    return BrouwerReport(
        n=s.n,
        target=target,
        best_size=outcome.matching_size,
        best_seed=outcome.seed,
        best_triples=triples,
        outcomes=tuple(outcomes),
    )


def sts_to_json(s: TripleSystem) -> str:
    payload = {"n": s.n, "triples": sorted(sorted(t) for t in s.triples)}
    return json.dumps(payload, separators=(",", ":"))


def sts_from_json(text: str) -> TripleSystem:
    payload = json.loads(text)
    return TripleSystem.build(payload["n"], payload["triples"])

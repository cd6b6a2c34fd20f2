"""Robustly expanding subgraphs: extraction by the min-degree / split
process, adversarial expansion verification, and short disjoint connecting
paths.  An (alpha, delta_cap)-expander keeps |N_{G-K}(U)| >= alpha|U| for
every U of at most two thirds of the vertices and every subgraph K of max
degree at most delta_cap.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

__all__ = [
    "SimpleGraph",
    "ExpanderParams",
    "VerificationReport",
    "Violation",
    "extract_expander",
    "verify_expansion",
    "disjoint_short_paths",
    "count_labelled_4cycles",
    "EXACT_VERIFY_LIMIT",
]

EXACT_VERIFY_LIMIT = 14


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected graph without loops or parallel edges.  labels maps local
    vertex indices back to the caller's world (identity by default); induced
    subgraphs carry labels through."""

    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    labels: tuple[int, ...] = ()

    @classmethod
    def from_edges(
        cls,
        vertex_count: int,
        edges: Iterable[tuple[int, int]],
        labels: Sequence[int] | None = None,
    ) -> "SimpleGraph":
        norm = []
        seen = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise ValueError(f"edge ({u},{v}) out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"parallel edge {key}")
            seen.add(key)
            norm.append(key)
        if labels is None:
            labels = tuple(range(vertex_count))
        else:
            labels = tuple(labels)
            if len(labels) != vertex_count:
                raise ValueError("labels must cover every vertex")
        return cls(vertex_count=vertex_count, edges=tuple(sorted(norm)), labels=labels)

    @cached_property
    def adjacency(self) -> tuple[frozenset[int], ...]:
        adj: list[set[int]] = [set() for _ in range(self.vertex_count)]
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return tuple(frozenset(s) for s in adj)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.adjacency)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def average_degree(self) -> float:
        if self.vertex_count == 0:
            return 0.0
        return 2 * len(self.edges) / self.vertex_count

    @property
    def min_degree(self) -> int:
        return min(self.degrees, default=0)

    @property
    def max_degree(self) -> int:
        return max(self.degrees, default=0)

    def induced(self, vertices: Iterable[int]) -> "SimpleGraph":
        keep = sorted(set(vertices))
        index = {v: i for i, v in enumerate(keep)}
        edges = [
            (index[u], index[v])
            for u, v in self.edges
            if u in index and v in index
        ]
        labels = tuple(self.labels[v] for v in keep)
        return SimpleGraph.from_edges(len(keep), edges, labels)

    def neighbourhood(self, vertices: Iterable[int]) -> set[int]:
        inside = set(vertices)
        out: set[int] = set()
        for v in inside:
            out |= self.adjacency[v]
        return out - inside


@dataclass(frozen=True)
class ExpanderParams:
    alpha: float
    delta_cap: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.delta_cap < 0:
            raise ValueError("delta_cap must be non-negative")


@dataclass(frozen=True)
class Violation:
    witness_set: tuple[int, ...]
    killed: tuple[int, ...]
    surviving_neighbours: int
    required: float


@dataclass(frozen=True)
class VerificationReport:
    mode: str
    alpha: float
    delta_cap: float
    checked_sets: int
    violations: tuple[Violation, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return not self.violations


def _process_alpha(n: int) -> float:
    if n <= 2:
        return 1.0
    return min(1.0, 1.0 / (16.0 * math.log(n)))


def _adversarial_min_neighbourhood(
    graph: SimpleGraph, u_set: frozenset[int], delta_cap: float
) -> tuple[int, tuple[int, ...]]:
    """Minimum of |N_{G-K}(U)| over subgraphs K with max degree <= delta_cap.
    Only edges between U and N(U) help the adversary, and partial removals at
    a neighbour achieve nothing, so K is a choice of neighbours to cut off
    entirely, subject to the degree budget at both ends.  Exact
    branch-and-bound over that choice."""
    neigh = sorted(graph.neighbourhood(u_set))
    cap = int(delta_cap)
    if cap <= 0:
        return len(neigh), ()
    deg_into_u = {
        w: len(graph.adjacency[w] & u_set) for w in neigh
    }
    killable = sorted(
        (w for w in neigh if deg_into_u[w] <= cap),
        key=lambda w: deg_into_u[w],
    )
    budget = {u: cap for u in u_set}
    best_kills: list[int] = []
    cur_kills: list[int] = []

    def bnb(i: int) -> None:
        nonlocal best_kills
        if len(cur_kills) > len(best_kills):
            best_kills = list(cur_kills)
        if i == len(killable):
            return
        if len(cur_kills) + (len(killable) - i) <= len(best_kills):
            return
        w = killable[i]
        hit = graph.adjacency[w] & u_set
        if all(budget[u] >= 1 for u in hit):
            for u in hit:
                budget[u] -= 1
            cur_kills.append(w)
            bnb(i + 1)
            cur_kills.pop()
            for u in hit:
                budget[u] += 1
        bnb(i + 1)

    bnb(0)
    return len(neigh) - len(best_kills), tuple(best_kills)


def _find_violation_exact(
    graph: SimpleGraph, alpha: float, delta_cap: float
) -> tuple[Violation | None, int]:
    n = graph.vertex_count
    limit = (2 * n) // 3
    checked = 0
    vertices = range(n)
    for size in range(1, limit + 1):
        for combo in combinations(vertices, size):
            checked += 1
            u_set = frozenset(combo)
            surviving, kills = _adversarial_min_neighbourhood(graph, u_set, delta_cap)
            if surviving < alpha * size:
                return (
                    Violation(
                        witness_set=tuple(combo),
                        killed=kills,
                        surviving_neighbours=surviving,
                        required=alpha * size,
                    ),
                    checked,
                )
    return None, checked


def _find_violation_heuristic(
    graph: SimpleGraph, alpha: float, delta_cap: float, seed: int, samples: int = 200
) -> tuple[Violation | None, int]:
    n = graph.vertex_count
    if n == 0:
        return None, 0
    rng = random.Random(seed)
    limit = (2 * n) // 3
    candidates: list[frozenset[int]] = []
    candidates.extend(frozenset((v,)) for v in range(n))
    if n >= 2:
        for _ in range(min(samples, n * (n - 1) // 2)):
            candidates.append(frozenset(rng.sample(range(n), 2)))
    for _ in range(samples):
        # BFS ball of random radius from a random root
        root = rng.randrange(n)
        radius = rng.choice((1, 1, 2))
        ball = {root}
        frontier = {root}
        for _ in range(radius):
            nxt = set()
            for v in frontier:
                nxt |= graph.adjacency[v]
            frontier = nxt - ball
            ball |= nxt
        if 0 < len(ball) <= limit:
            candidates.append(frozenset(ball))
        # greedy growth: repeatedly absorb the neighbour that keeps the
        # boundary smallest
        cur = {rng.randrange(n)}
        for _ in range(limit - 1):
            boundary = graph.neighbourhood(cur)
            if not boundary:
                break
            best_v = min(
                boundary,
                key=lambda w: (len(graph.neighbourhood(cur | {w})), w),
            )
            cur = cur | {best_v}
            if len(cur) <= limit:
                candidates.append(frozenset(cur))
    checked = 0
    seen: set[frozenset[int]] = set()
    for u_set in candidates:
        if not u_set or len(u_set) > limit or u_set in seen:
            continue
        seen.add(u_set)
        checked += 1
        surviving, kills = _adversarial_min_neighbourhood(graph, u_set, delta_cap)
        if surviving < alpha * len(u_set):
            return (
                Violation(
                    witness_set=tuple(sorted(u_set)),
                    killed=kills,
                    surviving_neighbours=surviving,
                    required=alpha * len(u_set),
                ),
                checked,
            )
    return None, checked


def verify_expansion(
    graph: SimpleGraph,
    params: ExpanderParams,
    mode: str = "exact",
    seed: int = 0,
) -> VerificationReport:
    """Check the expansion property.  Exact mode enumerates every candidate
    set (vertex count capped); heuristic mode samples candidate sets and a
    greedy-grown family, so a pass is one-sided evidence only."""
    if mode not in ("exact", "heuristic"):
        raise ValueError("mode must be 'exact' or 'heuristic'")
    if graph.vertex_count <= 1:
        return VerificationReport(
            mode=mode, alpha=params.alpha, delta_cap=params.delta_cap, checked_sets=0
        )
    if mode == "exact":
        if graph.vertex_count > EXACT_VERIFY_LIMIT:
            raise ValueError(
                f"exact verification capped at {EXACT_VERIFY_LIMIT} vertices, "
                f"got {graph.vertex_count}"
            )
        violation, checked = _find_violation_exact(graph, params.alpha, params.delta_cap)
    else:
        violation, checked = _find_violation_heuristic(
            graph, params.alpha, params.delta_cap, seed
        )
    violations = (violation,) if violation is not None else ()
    return VerificationReport(
        mode=mode,
        alpha=params.alpha,
        delta_cap=params.delta_cap,
        checked_sets=checked,
        violations=violations,
    )


def extract_expander(
    graph: SimpleGraph, seed: int = 0, alpha: float | None = None
) -> tuple[SimpleGraph, ExpanderParams, list[dict]]:
    """Shrink the graph until it is an expander with good degrees.

    Process: while the minimum degree drops below half the average degree,
    delete a minimum-degree vertex (the average never decreases).  Otherwise
    look for a violating pair (U, K); if the rest stays dense, trim U away,
    else restrict to U plus its surviving neighbourhood, which contracts the
    graph to at most three quarters of its size.  Stops when no violation is
    found; the stopping search is exact on small graphs and sampled above
    that, recorded in the trace.

    alpha defaults to 1/(16 ln n) (clamped to 1 for n <= 2); larger values
    demand stronger expansion and split more aggressively."""
    if graph.vertex_count == 0:
        raise ValueError("graph must be nonempty")
    if alpha is None:
        alpha = _process_alpha(graph.vertex_count)
    elif not 0 < alpha <= 1:
        raise ValueError("alpha must lie in (0, 1]")
    current = graph
    trace: list[dict] = []
    rng = random.Random(seed)
    while True:
        n_cur = current.vertex_count
        if n_cur == 1:
            trace.append({"step": "stop", "mode": "trivial", "size": 1})
            return current, ExpanderParams(alpha=alpha, delta_cap=0.0), trace
        d_cur = current.average_degree
        if current.min_degree < d_cur / 2:
            victim = min(
                range(n_cur), key=lambda v: (current.degrees[v], v)
            )
            trace.append(
                {
                    "step": "min-degree-delete",
                    "vertex": current.labels[victim],
                    "degree": current.degrees[victim],
                    "average_degree": d_cur,
                    "size_before": n_cur,
                }
            )
            current = current.induced(set(range(n_cur)) - {victim})
            continue
        delta_cap = alpha * d_cur
        if n_cur <= EXACT_VERIFY_LIMIT:
            violation, checked = _find_violation_exact(current, alpha, delta_cap)
            stop_mode = "exact"
        else:
            violation, checked = _find_violation_heuristic(
                current, alpha, delta_cap, rng.randrange(2**32)
            )
            stop_mode = "heuristic"
        if violation is None:
            trace.append(
                {
                    "step": "stop",
                    "mode": stop_mode,
                    "size": n_cur,
                    "checked_sets": checked,
                    "average_degree": d_cur,
                    "min_degree": current.min_degree,
                }
            )
            return current, ExpanderParams(alpha=alpha, delta_cap=delta_cap), trace
        u_local = set(violation.witness_set)
        rest = set(range(n_cur)) - u_local
        rest_graph = current.induced(rest) if rest else None
        if rest_graph is not None and rest_graph.average_degree >= d_cur:
            trace.append(
                {
                    "step": "trim",
                    "removed": len(u_local),
                    "size_before": n_cur,
                    "size_after": rest_graph.vertex_count,
                    "average_degree": d_cur,
                }
            )
            current = rest_graph
            continue
        killed = set(violation.killed)
        survivors = current.neighbourhood(u_local) - killed
        kept = u_local | survivors
        nxt = current.induced(kept)
        trace.append(
            {
                "step": "dense-split",
                "size_before": n_cur,
                "size_after": nxt.vertex_count,
                "u_size": len(u_local),
                "average_degree": d_cur,
            }
        )
        current = nxt


def disjoint_short_paths(
    graph: SimpleGraph,
    x: int,
    y: int,
    r: int,
    max_len: int,
    forbidden_vertices: Iterable[int] = (),
    forbidden_edges: Iterable[tuple[int, int]] = (),
) -> list[list[int]]:
    """Up to r internally-vertex-disjoint x,y-paths of length at most
    max_len, found by repeated shortest-path search with interior removal.
    Fewer paths mean this search exhausted, not that none exist."""
    if x == y:
        raise ValueError("endpoints must differ")
    banned_v = set(forbidden_vertices)
    if x in banned_v or y in banned_v:
        raise ValueError("endpoints may not be forbidden")
    banned_e = {(min(u, v), max(u, v)) for u, v in forbidden_edges}
    used_internal: set[int] = set()
    paths: list[list[int]] = []
    for _ in range(r):
        # BFS from x, avoiding banned and previously used interior vertices
        blocked = banned_v | used_internal
        parent: dict[int, int] = {x: -1}
        frontier = [x]
        depth = 0
        found = False
        while frontier and depth < max_len and not found:
            nxt = []
            for u in frontier:
                for v in sorted(graph.adjacency[u]):
                    if (min(u, v), max(u, v)) in banned_e:
                        continue
                    if v == y:
                        parent[y] = u
                        found = True
                        break
                    if v in blocked or v in parent:
                        continue
                    parent[v] = u
                    nxt.append(v)
                if found:
                    break
            frontier = nxt
            depth += 1
        if not found:
            break
        path = [y]
        while path[-1] != x:
            path.append(parent[path[-1]])
        path.reverse()
        paths.append(path)
        used_internal |= set(path[1:-1])
    return paths


def count_labelled_4cycles(graph: SimpleGraph) -> int:
    """Number of labelled 4-cycles (v1,v2,v3,v4): closed walks of length 4
    through 4 distinct vertices, counted with starting point and direction.
    Every unordered 4-cycle contributes 8."""
    adj = graph.adjacency
    n = graph.vertex_count
    total = 0
    for u in range(n):
        for w in range(u + 1, n):
            codeg = len(adj[u] & adj[w])
            total += codeg * (codeg - 1) // 2
    return 4 * total

"""Rainbow-matching solvers: exact branch-and-bound, transversal counting,
randomised nibble and local-switch heuristics, and the guaranteed-ratio
matching for graphs whose colour classes are all small.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import ColouredBipartiteGraph, RainbowMatching

__all__ = [
    "ExactResult",
    "max_rainbow_matching_exact",
    "max_transversal_cells",
    "count_full_transversals",
    "greedy_rainbow_matching",
    "greedy_nibble_matching",
    "local_switch_augment",
    "rare_colour_matching",
    "exact_colour_set_matching",
]


@dataclass(frozen=True)
class ExactResult:
    size: int
    witness: RainbowMatching
    optimal: bool
    explored_nodes: int


def max_rainbow_matching_exact(
    graph: ColouredBipartiteGraph, budget: int | None = None
) -> ExactResult:
    """Branch and bound over A-vertices in index order.  At each vertex the
    candidate partners are tried in ascending B-index, then the skip branch.
    Bound: current size + min(A-vertices left, free B-vertices, free colours).
    A node budget turns the result into a best-effort witness with
    optimal=False once exhausted."""
    a_size = graph.a_size
    by_a: list[list[tuple[int, int]]] = [[] for _ in range(a_size)]
    for a, b, c in graph.edges:
        by_a[a].append((b, c))
    ceiling = min(a_size, graph.b_size, len(graph.colours))

    best_size = 0
    best_edges: tuple[tuple[int, int, int], ...] = ()
    nodes = 0
    truncated = False

    class _Exhausted(Exception):
        pass

    chosen: list[tuple[int, int, int]] = []

    def dfs(i: int, used_b: int, used_c: int, size: int) -> None:
        nonlocal best_size, best_edges, nodes, truncated
        if budget is not None:
            nodes += 1
            if nodes > budget:
                truncated = True
                raise _Exhausted
        else:
            nodes += 1
        if size > best_size:
            best_size = size
            best_edges = tuple(chosen)
        if best_size >= ceiling:
            raise _Exhausted
        if i >= a_size:
            return
        free_b = graph.b_size - used_b.bit_count()
        free_c = len(graph.colours) - used_c.bit_count()
        if size + min(a_size - i, free_b, free_c) <= best_size:
            return
        for b, c in by_a[i]:
            if used_b >> b & 1 or used_c >> c & 1:
                continue
            chosen.append((i, b, c))
            dfs(i + 1, used_b | (1 << b), used_c | (1 << c), size + 1)
            chosen.pop()
        dfs(i + 1, used_b, used_c, size)

    try:
        dfs(0, 0, 0, 0)
    except _Exhausted:
        pass
    witness = RainbowMatching.build(graph, best_edges)
    return ExactResult(
        size=best_size,
        witness=witness,
        optimal=not truncated,
        explored_nodes=nodes,
    )


def max_transversal_cells(
    cells: tuple[tuple[int, ...], ...], stop_at: int | None = None
) -> int:
    """Largest partial transversal (cells meeting each row, column, and symbol
    at most once) of a fully filled square, by row-wise backtracking with an
    optional early exit once stop_at is reached.  Lean path for bulk censuses;
    prefer max_rainbow_matching_exact for graph inputs."""
    n = len(cells)
    target = n if stop_at is None else min(stop_at, n)
    best = 0

    def dfs(row: int, col_mask: int, sym_mask: int, size: int) -> bool:
        nonlocal best
        if size > best:
            best = size
            if best >= target:
                return True
        if row == n or size + (n - row) <= best:
            return False
        crow = cells[row]
        for j in range(n):
            if col_mask >> j & 1:
                continue
            s = crow[j]
            if sym_mask >> s & 1:
                continue
            if dfs(row + 1, col_mask | (1 << j), sym_mask | (1 << s), size + 1):
                return True
        return dfs(row + 1, col_mask, sym_mask, size)

    dfs(0, 0, 0, 0)
    return best


def count_full_transversals(cells: tuple[tuple[int, ...], ...], cap: int = 12) -> int:
    """Number of full transversals of a fully filled square: permutations of
    columns hitting every symbol exactly once."""
    n = len(cells)
    if n > cap:
        raise ValueError(f"order {n} exceeds counting cap {cap}")
    for row in cells:
        if len(row) != n or any(s is None for s in row):
            raise ValueError("counting needs a fully filled square")

    def dfs(row: int, col_mask: int, sym_mask: int) -> int:
        if row == n:
            return 1
        total = 0
        crow = cells[row]
        for j in range(n):
            if col_mask >> j & 1:
                continue
            s = crow[j]
            if sym_mask >> s & 1:
                continue
            total += dfs(row + 1, col_mask | (1 << j), sym_mask | (1 << s))
        return total

    return dfs(0, 0, 0)


def _maximalize(
    graph: ColouredBipartiteGraph,
    edges: list[tuple[int, int, int]],
    order: list[tuple[int, int, int]],
) -> list[tuple[int, int, int]]:
    used_a = {a for a, _, _ in edges}
    used_b = {b for _, b, _ in edges}
    used_c = {c for _, _, c in edges}
    out = list(edges)
    for a, b, c in order:
        if a in used_a or b in used_b or c in used_c:
            continue
        out.append((a, b, c))
        used_a.add(a)
        used_b.add(b)
        used_c.add(c)
    return out


def greedy_rainbow_matching(graph: ColouredBipartiteGraph) -> RainbowMatching:
    """Maximal rainbow matching by a single pass in edge-index order."""
    edges = _maximalize(graph, [], list(graph.edges))
    return RainbowMatching.build(graph, edges)


def greedy_nibble_matching(
    graph: ColouredBipartiteGraph, bite_fraction: float, seed: int
) -> RainbowMatching:
    """Randomised rounds: sample a bite of the still-compatible edges, keep a
    conflict-free subset in random order, commit, and repeat until no
    compatible edge remains (which is maximality).  Deterministic per seed."""
    if not 0 < bite_fraction <= 1:
        raise ValueError("bite_fraction must lie in (0, 1]")
    rng = random.Random(seed)
    committed: list[tuple[int, int, int]] = []
    used_a: set[int] = set()
    used_b: set[int] = set()
    used_c: set[int] = set()
    remaining = list(graph.edges)
    while remaining:
        bite_size = max(1, round(bite_fraction * len(remaining)))
        bite = rng.sample(remaining, min(bite_size, len(remaining)))
        for a, b, c in bite:
            if a in used_a or b in used_b or c in used_c:
                continue
            committed.append((a, b, c))
            used_a.add(a)
            used_b.add(b)
            used_c.add(c)
        remaining = [
            (a, b, c)
            for a, b, c in remaining
            if a not in used_a and b not in used_b and c not in used_c
        ]
    return RainbowMatching.build(graph, committed)


def local_switch_augment(
    graph: ColouredBipartiteGraph,
    matching: RainbowMatching,
    rounds: int,
    seed: int,
) -> RainbowMatching:
    """Random local search: repeatedly drop one or two random edges from the
    current matching and re-maximalise along a shuffled edge order, keeping
    the best matching ever seen.  The result never shrinks below the input."""
    rng = random.Random(seed)
    all_edges = list(graph.edges)
    ceiling = min(graph.a_size, graph.b_size, len(graph.colours))
    cur = _maximalize(graph, list(matching.edges), list(all_edges))
    best = list(cur)
    for _ in range(rounds):
        if len(best) >= ceiling:
            break
        if cur:
            drop = rng.choice((1, 2))
            keep = list(cur)
            for _ in range(min(drop, len(keep))):
                keep.pop(rng.randrange(len(keep)))
        else:
            keep = []
        order = list(all_edges)
        rng.shuffle(order)
        cur = _maximalize(graph, keep, order)
        if len(cur) > len(best):
            best = list(cur)
    return RainbowMatching.build(graph, best)


def rare_colour_matching(graph: ColouredBipartiteGraph, d: int) -> RainbowMatching:
    """Rainbow matching of size at least 1.8d in a graph with minimum degree
    at least d whose colour classes each have at most n/100 edges (n vertices
    per side, d <= n/100).

    Exchange argument, run constructively: keep a maximal rainbow matching M;
    while 5|M| < 9d, some matched edge a_i b_i has on both sides a neighbour
    outside V(M) joined by a colour outside C(M), with distinct colours for
    the two sides; swapping a_i b_i for those two edges grows M."""
    n = graph.a_size
    if graph.b_size != n:
        raise ValueError("needs equal side sizes")
    if d < 1:
        raise ValueError("d must be positive")
    if 100 * d > n:
        raise ValueError("needs d <= n/100")
    degs = [0] * n
    degs_b = [0] * n
    for a, b, _ in graph.edges:
        degs[a] += 1
        degs_b[b] += 1
    if min(degs, default=0) < d or min(degs_b, default=0) < d:
        raise ValueError(f"needs minimum degree at least {d}")
    heaviest = max((len(v) for v in graph.colour_classes.values()), default=0)
    if 100 * heaviest > n:
        raise ValueError("needs every colour class at most n/100 edges")

    edges = _maximalize(graph, [], list(graph.edges))
    while 5 * len(edges) < 9 * d:
        used_b = {b for _, b, _ in edges}
        used_a = {a for a, _, _ in edges}
        used_c = {c for _, _, c in edges}
        swap = None
        for idx, (ai, bi, _) in enumerate(edges):
            fresh_b = [
                (b2, c2)
                for b2, c2 in sorted(graph.adj_a[ai].items())
                if b2 not in used_b and c2 not in used_c
            ]
            if not fresh_b:
                continue
            fresh_a = [
                (a2, c2)
                for a2, c2 in sorted(graph.adj_b[bi].items())
                if a2 not in used_a and c2 not in used_c
            ]
            for b2, cb in fresh_b:
                for a2, ca in fresh_a:
                    if ca != cb:
                        swap = (idx, (ai, b2, cb), (a2, bi, ca))
                        break
                if swap:
                    break
            if swap:
                break
        if swap is None:
            raise AssertionError(
                "no augmenting exchange found below the 1.8d target; "
                "the stated preconditions cannot all hold"
            )
        idx, e_new1, e_new2 = swap
        edges = edges[:idx] + edges[idx + 1 :] + [e_new1, e_new2]
        edges = _maximalize(graph, edges, list(graph.edges))
    return RainbowMatching.build(graph, edges)


def exact_colour_set_matching(
    graph: ColouredBipartiteGraph,
    vertices: frozenset[int],
    colour_set: frozenset[int],
) -> tuple[tuple[int, int, int], ...] | None:
    """Matching inside the induced subgraph on `vertices` (flattened ids)
    that uses every colour of colour_set exactly once.  Exhaustive DFS over
    colours, fewest candidate edges first.  Returns edges as (a, b, colour)
    triples with b local to the B side, or None when no such matching
    exists."""
    per_colour: list[tuple[int, list[tuple[int, int]]]] = []
    for c in sorted(colour_set):
        cands = [
            (a, graph.b_vertex(b))
            for a, b in graph.colour_classes.get(c, ())
            if a in vertices and graph.b_vertex(b) in vertices
        ]
        if not cands:
            return None
        per_colour.append((c, cands))
    per_colour.sort(key=lambda t: len(t[1]))

    chosen: list[tuple[int, int, int]] = []
    used: set[int] = set()

    def dfs(i: int) -> bool:
        if i == len(per_colour):
            return True
        c, cands = per_colour[i]
        for a, bg in cands:
            if a in used or bg in used:
                continue
            used.add(a)
            used.add(bg)
            chosen.append((a, bg - graph.a_size, c))
            if dfs(i + 1):
                return True
            chosen.pop()
            used.discard(a)
            used.discard(bg)
        return False

    return tuple(chosen) if dfs(0) else None

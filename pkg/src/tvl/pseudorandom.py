"""Typicality and pseudorandomness audits for coloured bipartite graphs.

The link hypergraph of a properly coloured graph is checked for typicality
(class sizes, degrees, same-side codegrees within (1 +- eps) factors), and
the graph itself is audited against seven structural properties P1..P7:
counts of colour-anchored 4-cycle pairs, packed families of small vertex
sets carrying prescribed single-colour matchings alongside prescribed
rainbow matchings, and the nested block/family condition P7.  Quotas scale
with a configurable alpha; at desk scale their floors are tiny, so the
audit reports achieved family sizes next to the formal quota.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from itertools import combinations

from .core import ColouredBipartiteGraph

__all__ = [
    "TripartiteHypergraph",
    "TypicalityReport",
    "PropertyResult",
    "PseudorandomAudit",
    "CapExceededError",
    "build_hypergraph",
    "check_typical",
    "audit_pseudorandom",
    "validate_audit_witnesses",
]


class CapExceededError(RuntimeError):
    """Raised when exact mode is requested above its size cap."""


@dataclass(frozen=True)
class TripartiteHypergraph:
    """3-partite 3-uniform hypergraph.  Slots: left vertex (global graph
    id), right vertex (global graph id), colour.  Simple by construction
    from a properly coloured graph: each pair of vertices lies in at most
    one triple."""

    class_a: tuple[int, ...]
    class_b: tuple[int, ...]
    class_c: tuple[int, ...]
    triples: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        seen_ab: set[tuple[int, int]] = set()
        seen_ac: set[tuple[int, int]] = set()
        seen_bc: set[tuple[int, int]] = set()
        a_set, b_set, c_set = set(self.class_a), set(self.class_b), set(self.class_c)
        for a, b, c in self.triples:
            if a not in a_set or b not in b_set or c not in c_set:
                raise ValueError("triple leaves its vertex classes")
            for seen, key in ((seen_ab, (a, b)), (seen_ac, (a, c)), (seen_bc, (b, c))):
                if key in seen:
                    raise ValueError(f"pair {key} lies in two triples")
                seen.add(key)

    def vertex_degree(self, v: int) -> int:
        return sum(1 for a, b, _ in self.triples if a == v or b == v)

    def colour_degree(self, c: int) -> int:
        return sum(1 for _, _, cc in self.triples if cc == c)

    def projection(self, which: str) -> dict[int, set[int]]:
        """Adjacency (first class -> second) of the named pair projection.
        which is one of "AB", "BC", "AC"."""
        slot = {"AB": (0, 1), "BC": (1, 2), "AC": (0, 2)}[which]
        left_class = {"AB": self.class_a, "BC": self.class_b, "AC": self.class_a}[which]
        adj: dict[int, set[int]] = {v: set() for v in left_class}
        for t in self.triples:
            adj[t[slot[0]]].add(t[slot[1]])
        return adj


@dataclass(frozen=True)
class TypicalityReport:
    n: int
    p: float
    epsilon: float
    violations: dict[str, tuple[tuple, ...]]

    @property
    def passed(self) -> bool:
        return all(not v for v in self.violations.values())


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    quota: float
    achieved: int
    details: dict
    witnesses: tuple = field(default=(), repr=False)


@dataclass(frozen=True)
class PseudorandomAudit:
    n: int
    p: float
    epsilon: float
    alpha: float
    mode: str
    results: dict[str, PropertyResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results.values())


def build_hypergraph(graph: ColouredBipartiteGraph) -> TripartiteHypergraph:
    """One triple (a, b, colour) per edge.  Requires a proper colouring,
    which is exactly what makes the hypergraph simple."""
    for adj in (graph.adj_a, graph.adj_b):
        for v, nbrs in enumerate(adj):
            cols = list(nbrs.values())
            if len(cols) != len(set(cols)):
                raise ValueError(f"colouring not proper at vertex index {v}")
    triples = tuple(
        (a, graph.b_vertex(b), c) for a, b, c in graph.edges
    )
    return TripartiteHypergraph(
        class_a=tuple(range(graph.a_size)),
        class_b=tuple(graph.b_vertex(j) for j in range(graph.b_size)),
        class_c=tuple(sorted(graph.colours)),
        triples=triples,
    )


def _check_bipartite_typical(
    adj: dict[int, set[int]],
    left: tuple[int, ...],
    right: tuple[int, ...],
    n: int,
    p: float,
    epsilon: float,
    tag: str,
    violations: dict[str, list],
) -> None:
    lo_n, hi_n = (1 - epsilon) * n, (1 + epsilon) * n
    for side, cls in (("left", left), ("right", right)):
        if not lo_n <= len(cls) <= hi_n:
            violations["class_size"].append((tag, side, len(cls), lo_n, hi_n))
    lo_d, hi_d = (1 - epsilon) * p * n, (1 + epsilon) * p * n
    rev: dict[int, set[int]] = {v: set() for v in right}
    for u, nbrs in adj.items():
        for v in nbrs:
            rev[v].add(u)
    for v in left:
        d = len(adj[v])
        if not lo_d <= d <= hi_d:
            violations["degree"].append((tag, v, d, lo_d, hi_d))
    for v in right:
        d = len(rev[v])
        if not lo_d <= d <= hi_d:
            violations["degree"].append((tag, v, d, lo_d, hi_d))
    lo_c, hi_c = (1 - epsilon) * p * p * n, (1 + epsilon) * p * p * n
    for side_adj, cls in ((adj, left), (rev, right)):
        for u, v in combinations(cls, 2):
            co = len(side_adj[u] & side_adj[v])
            if not lo_c <= co <= hi_c:
                violations["codegree"].append((tag, (u, v), co, lo_c, hi_c))


def check_typical(
    h: TripartiteHypergraph, n: int, p: float, epsilon: float
) -> TypicalityReport:
    """Exact check of all three pair projections: class sizes (1 +- eps)n,
    degrees (1 +- eps)pn, same-side codegrees (1 +- eps)p^2 n."""
    violations: dict[str, list] = {"class_size": [], "degree": [], "codegree": []}
    pairs = (
        ("AB", h.class_a, h.class_b),
        ("BC", h.class_b, h.class_c),
        ("AC", h.class_a, h.class_c),
    )
    for tag, left, right in pairs:
        _check_bipartite_typical(
            h.projection(tag), left, right, n, p, epsilon, tag, violations
        )
    return TypicalityReport(
        n=n,
        p=p,
        epsilon=epsilon,
        violations={k: tuple(v) for k, v in violations.items()},
    )


# --- structure-search helpers -------------------------------------------


def _edges_of_colour(graph: ColouredBipartiteGraph, c: int) -> list[tuple[int, int]]:
    """(a index, global b id) pairs of colour c, lexicographic."""
    return [(a, graph.b_vertex(b)) for a, b in graph.colour_classes.get(c, ())]


def _c0_tuples(edges, size: int, banned: set[int]):
    """Disjoint tuples of `size` edges from one colour class (already a
    matching) avoiding banned vertices, in lexicographic order."""
    free = [e for e in edges if e[0] not in banned and e[1] not in banned]
    yield from combinations(free, size)


def _rainbow_within(
    graph: ColouredBipartiteGraph,
    vertices: frozenset[int],
    size: int,
    allowed_colours: set[int] | None = None,
    exact_colours: frozenset[int] | None = None,
    forbidden_pairs: frozenset[tuple[int, int]] = frozenset(),
):
    """Rainbow matching of `size` edges inside `vertices`.  With
    exact_colours the matching uses each listed colour exactly once
    (size is then len(exact_colours)); otherwise any `size` distinct
    colours from allowed_colours.  Returns a list of (a, b_global,
    colour) or None."""
    if exact_colours is not None:
        size = len(exact_colours)
        pool = sorted(exact_colours)
        per_colour = []
        for c in pool:
            cands = [
                e for e in _edges_of_colour(graph, c)
                if e[0] in vertices and e[1] in vertices and e not in forbidden_pairs
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
            for a, b in cands:
                if a in used or b in used:
                    continue
                used.add(a)
                used.add(b)
                chosen.append((a, b, c))
                if dfs(i + 1):
                    return True
                chosen.pop()
                used.discard(a)
                used.discard(b)
            return False

        return list(chosen) if dfs(0) else None

    cands = [
        (a, b, c)
        for a, b, c in (
            (a, graph.b_vertex(b), c) for a, b, c in graph.edges
        )
        if a in vertices and b in vertices and (a, b) not in forbidden_pairs
        and (allowed_colours is None or c in allowed_colours)
    ]
    chosen = []
    used_v: set[int] = set()
    used_c: set[int] = set()

    def dfs2(start: int) -> bool:
        if len(chosen) == size:
            return True
        if len(chosen) + (len(cands) - start) < size:
            return False
        for i in range(start, len(cands)):
            a, b, c = cands[i]
            if a in used_v or b in used_v or c in used_c:
                continue
            chosen.append((a, b, c))
            used_v.add(a)
            used_v.add(b)
            used_c.add(c)
            if dfs2(i + 1):
                return True
            chosen.pop()
            used_v.discard(a)
            used_v.discard(b)
            used_c.discard(c)
        return False

    return list(chosen) if dfs2(0) else None


# --- property audits -----------------------------------------------------


def _audit_p1(graph, n, epsilon, alpha) -> PropertyResult:
    nc = len(graph.colours)
    ok = graph.a_size == n and graph.b_size == n and n <= nc <= (1 + epsilon) * n
    return PropertyResult(
        name="P1",
        passed=ok,
        quota=float(n),
        achieved=nc,
        details={
            "a_size": graph.a_size,
            "b_size": graph.b_size,
            "colour_count": nc,
            "colour_upper": (1 + epsilon) * n,
        },
    )


def _audit_p2(graph, n, p, epsilon, alpha) -> PropertyResult:
    report = check_typical(build_hypergraph(graph), n, p, epsilon)
    counts = {k: len(v) for k, v in report.violations.items()}
    return PropertyResult(
        name="P2",
        passed=report.passed,
        quota=0.0,
        achieved=sum(counts.values()),
        details={"violation_counts": counts},
    )


def _cycles_through(graph, e: tuple[int, int], c: int):
    """Rainbow 4-cycles through edge e of colour c, bucketed by the colour
    set of the two edges of the cycle incident to e.  Yields
    (neighbour-colour frozenset, vertex frozenset)."""
    a, b = e
    b_local = b - graph.a_size
    for b2_local, c1 in graph.adj_a[a].items():
        if c1 == c or b2_local == b_local:
            continue
        b2 = graph.b_vertex(b2_local)
        for a2, c2 in graph.adj_b[b_local].items():
            if a2 == a or c2 == c or c2 == c1:
                continue
            cc = graph.adj_a[a2].get(b2_local)
            if cc is None or cc in (c, c1, c2):
                continue
            yield frozenset((c1, c2)), frozenset((a, b, a2, b2))


def _audit_p3(graph, n, alpha, mode, seed, cap) -> PropertyResult:
    if mode == "exact" and n > cap:
        raise CapExceededError(f"exact pair counting capped at n <= {cap}")
    rng = random.Random(seed)
    quota = alpha * n * n
    allowance = math.sqrt(n)
    worst_bad = 0
    worst_site = None
    min_pairs = None
    checked = 0
    for c in sorted(graph.colours):
        ec = _edges_of_colour(graph, c)
        if mode != "exact" and len(ec) > 12:
            ec = rng.sample(ec, 12)
        buckets = {}
        for e in ec:
            bmap: dict[frozenset, list[frozenset]] = {}
            for key, verts in _cycles_through(graph, e, c):
                bmap.setdefault(key, []).append(verts)
            buckets[e] = bmap
        for e in ec:
            bad = 0
            for f in ec:
                if f == e:
                    continue
                count = 0
                be, bf = buckets[e], buckets[f]
                small, large = (be, bf) if len(be) <= len(bf) else (bf, be)
                for key, group in small.items():
                    other = large.get(key)
                    if not other:
                        continue
                    for v1 in group:
                        for v2 in other:
                            if not v1 & v2:
                                count += 1
                checked += 1
                if min_pairs is None or count < min_pairs:
                    min_pairs = count
                if count < quota:
                    bad += 1
            if bad > worst_bad:
                worst_bad, worst_site = bad, (c, e)
    passed = worst_bad <= allowance
    return PropertyResult(
        name="P3",
        passed=passed,
        quota=quota,
        achieved=min_pairs if min_pairs is not None else 0,
        details={
            "allowance": allowance,
            "worst_bad_count": worst_bad,
            "worst_site": worst_site,
            "pairs_checked": checked,
            "min_pair_count": min_pairs,
        },
    )


def _audit_p4(graph, n, alpha) -> PropertyResult:
    quota = math.floor(alpha * n)
    target = max(quota, 1)
    min_achieved = None
    worst = None
    sample_witness = None
    for c0 in sorted(graph.colours):
        ec0 = _edges_of_colour(graph, c0)
        for u in range(graph.a_size):
            for v_local in range(graph.b_size):
                v = graph.b_vertex(v_local)
                families = []
                used_v: set[int] = {u, v}
                used_c: set[int] = {c0}
                for e1, e2 in _c0_tuples(ec0, 2, used_v):
                    vi = frozenset((e1[0], e1[1], e2[0], e2[1]))
                    if vi & used_v:
                        continue
                    m = _rainbow_within(
                        graph,
                        vi | {u, v},
                        3,
                        allowed_colours=set(graph.colours) - used_c,
                        forbidden_pairs=frozenset({(u, v)}),
                    )
                    if m is None:
                        continue
                    ci = frozenset(c for _, _, c in m)
                    families.append((vi, ((e1[0], e1[1], c0), (e2[0], e2[1], c0)), tuple(m)))
                    used_v |= vi
                    used_c |= ci
                    if len(families) >= target:
                        break
                if sample_witness is None and families:
                    sample_witness = ((u, v, c0), tuple(families))
                if min_achieved is None or len(families) < min_achieved:
                    min_achieved, worst = len(families), (u, v, c0)
    passed = (min_achieved or 0) >= quota
    return PropertyResult(
        name="P4",
        passed=passed,
        quota=float(quota),
        achieved=min_achieved or 0,
        details={"worst_triple": worst, "target": target},
        witnesses=(sample_witness,) if sample_witness else (),
    )


def _audit_p5(graph, n, alpha) -> PropertyResult:
    quota = math.floor(alpha * n / 12)
    target = max(quota, 1)
    min_achieved = None
    worst = None
    sample_witness = None
    colours = sorted(graph.colours)
    for c0 in colours:
        ec0 = _edges_of_colour(graph, c0)
        for d in colours:
            if d == c0:
                continue
            families = []
            used_v: set[int] = set()
            used_c: set[int] = {c0, d}
            for quad in _c0_tuples(ec0, 4, used_v):
                verts = {x for e in quad for x in e}
                if verts & used_v:
                    continue
                vi = frozenset(verts)
                m = None
                for de in _edges_of_colour(graph, d):
                    if de[0] not in vi or de[1] not in vi:
                        continue
                    rest = _rainbow_within(
                        graph,
                        vi - {de[0], de[1]},
                        3,
                        allowed_colours=set(colours) - used_c,
                    )
                    if rest is not None:
                        m = [(de[0], de[1], d)] + rest
                        break
                if m is None:
                    continue
                ci = frozenset(c for _, _, c in m) - {d}
                families.append(
                    (vi, tuple((a, b, c0) for a, b in quad), tuple(m))
                )
                used_v |= vi
                used_c |= ci
                if len(families) >= target:
                    break
            if sample_witness is None and families:
                sample_witness = ((c0, d), tuple(families))
            if min_achieved is None or len(families) < min_achieved:
                min_achieved, worst = len(families), (c0, d)
    passed = (min_achieved or 0) >= quota
    return PropertyResult(
        name="P5",
        passed=passed,
        quota=float(quota),
        achieved=min_achieved or 0,
        details={"worst_pair": worst, "target": target},
        witnesses=(sample_witness,) if sample_witness else (),
    )


def _p6_blobs(graph, c0, k, cbar, target) -> list:
    """Greedy disjoint blobs: k+1 colour-c0 edges plus a k-edge rainbow
    matching coloured from cbar, within the same 2k+2 vertices."""
    ec0 = _edges_of_colour(graph, c0)
    blobs = []
    used: set[int] = set()
    for tup in _c0_tuples(ec0, k + 1, used):
        verts = {x for e in tup for x in e}
        if verts & used:
            continue
        if k == 0:
            blobs.append((frozenset(verts), tuple((a, b, c0) for a, b in tup), ()))
        else:
            m = _rainbow_within(graph, frozenset(verts), k, allowed_colours=set(cbar))
            if m is None:
                continue
            blobs.append(
                (frozenset(verts), tuple((a, b, c0) for a, b in tup), tuple(m))
            )
        used |= verts
        if len(blobs) >= target:
            break
    return blobs


def _audit_p6(graph, n, alpha, mode, seed, cbar_cap) -> PropertyResult:
    quota = math.floor(alpha * n)
    target = max(quota, 1)
    colours = sorted(graph.colours)
    rng = random.Random(seed)
    min_achieved = None
    worst = None
    k_values = [k for k in range(21) if 5 * k <= len(colours) - 1]
    sample_witness = None
    exhaustive = True
    for c0 in colours:
        others = [c for c in colours if c != c0]
        for k in k_values:
            size = 5 * k
            total = math.comb(len(others), size)
            if total <= cbar_cap:
                cbars = combinations(others, size)
            else:
                exhaustive = False
                cbars = (tuple(sorted(rng.sample(others, size))) for _ in range(64))
            for cbar in cbars:
                blobs = _p6_blobs(graph, c0, k, cbar, target)
                if sample_witness is None and blobs and k > 0:
                    sample_witness = ((c0, k, cbar), tuple(blobs))
                if min_achieved is None or len(blobs) < min_achieved:
                    min_achieved, worst = len(blobs), (c0, k, cbar)
    passed = (min_achieved or 0) >= quota
    return PropertyResult(
        name="P6",
        passed=passed,
        quota=float(quota),
        achieved=min_achieved or 0,
        details={
            "worst_case": worst,
            "k_values": k_values,
            "target": target,
            "exhaustive_cbar": exhaustive,
        },
        witnesses=(sample_witness,) if sample_witness else (),
    )


def _audit_p7(graph, n, alpha, mode, seed, cbar_cap, combo_cap=200) -> PropertyResult:
    """Nested block/family condition.  Blocks: disjoint vertex sets of size
    2k carrying both a perfect single-colour matching and an exactly-C_i
    rainbow matching, with disjoint C_i.  The per-block blob quota
    floor(alpha*n) vanishes at desk scale, making every block formally
    good, so the formal pass reduces to r >= alpha^2*n per colour; actual
    blob families (one per good block where the forbidden set misses C_i)
    are still constructed and reported as the strong count."""
    colours = sorted(graph.colours)
    k = min(100, len(colours) // 2)
    clipped = k < 100
    quota = alpha * alpha * n
    blob_floor = math.floor(alpha * n)
    blob_target = max(blob_floor, 1)
    rng = random.Random(seed)

    min_formal_good = None
    min_strong_good = None
    worst_cbar = None
    blocked = 0
    cbar_checked = 0
    exhaustive = True
    r_by_c0 = {}
    witnesses = []

    for c0 in colours:
        others = [c for c in colours if c != c0]
        ec0 = _edges_of_colour(graph, c0)
        blocks = []
        used_v: set[int] = set()
        used_c: set[int] = {c0}
        for tup in _c0_tuples(ec0, k, used_v):
            verts = {x for e in tup for x in e}
            if verts & used_v:
                continue
            m = _rainbow_within(
                graph, frozenset(verts), k, allowed_colours=set(others) - used_c
            )
            if m is None:
                continue
            ci = frozenset(c for _, _, c in m)
            blocks.append(
                (frozenset(verts), ci, tuple((a, b, c0) for a, b in tup), tuple(m))
            )
            used_v |= verts
            used_c |= ci
        r = len(blocks)
        r_by_c0[c0] = r
        if not witnesses and blocks:
            witnesses.append(
                ((c0, "blocks"), tuple((b[0], b[2], b[3]) for b in blocks))
            )
        if min_formal_good is None or r < min_formal_good:
            min_formal_good = r

        total_cbars = sum(math.comb(len(others), j) for j in range(k + 1))
        if total_cbars <= cbar_cap:
            cbar_iter = (
                cb for j in range(k + 1) for cb in combinations(others, j)
            )
        else:
            exhaustive = False
            cbar_iter = (
                tuple(sorted(rng.sample(others, rng.randint(0, k))))
                for _ in range(64)
            )
        for cbar in cbar_iter:
            cbar_checked += 1
            cset = frozenset(cbar)
            usable = [b for b in blocks if not (b[1] & cset)]
            if not usable:
                blocked += 1
            strong = 0
            for vi, ci, c0_edges, _ in usable:
                want = cset | ci
                m_size = k + len(cset) + 1
                found_blobs = []
                used_blob_v: set[int] = set()
                tried = 0
                for tup in _c0_tuples(ec0, m_size, used_blob_v):
                    tried += 1
                    if tried > combo_cap:
                        break
                    verts = {x for e in tup for x in e}
                    if verts & used_blob_v:
                        continue
                    m = _rainbow_within(
                        graph, frozenset(verts), len(want), exact_colours=want
                    )
                    if m is None:
                        continue
                    found_blobs.append(
                        (frozenset(verts), tuple((a, b, c0) for a, b in tup), tuple(m))
                    )
                    used_blob_v |= verts
                    if len(found_blobs) >= blob_target:
                        break
                if len(found_blobs) >= blob_target:
                    strong += 1
                    if len(witnesses) < 2 and cset:
                        witnesses.append(((c0, cbar, tuple(sorted(ci))), tuple(found_blobs)))
                    break
            if usable:
                if min_strong_good is None or strong < min_strong_good:
                    min_strong_good = strong
                    if strong == 0:
                        worst_cbar = (c0, cbar)

    passed = (min_formal_good or 0) >= quota
    return PropertyResult(
        name="P7",
        passed=passed,
        quota=quota,
        achieved=min_formal_good or 0,
        details={
            "k": k,
            "k_clipped": clipped,
            "r_by_c0": r_by_c0,
            "blob_floor": blob_floor,
            "blob_target": blob_target,
            "cbar_checked": cbar_checked,
            "exhaustive_cbar": exhaustive,
            "blocked_cbar_count": blocked,
            "min_strong_good": min_strong_good,
            "worst_strong_cbar": worst_cbar,
        },
        witnesses=tuple(witnesses),
    )


def audit_pseudorandom(
    graph: ColouredBipartiteGraph,
    n: int,
    p: float,
    epsilon: float,
    alpha: float,
    mode: str = "exact",
    seed: int = 0,
    properties: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7),
    p3_cap: int = 12,
    cbar_cap: int = 1000,
) -> PseudorandomAudit:
    """Audit the seven structural properties.  Exact mode counts P3 pair
    structures fully (capped at n <= p3_cap); greedy mode samples.  The
    quota for each packed family is floor-scaled by alpha but the search
    always attempts at least one family member, so achieved counts stay
    informative when quotas round to zero."""
    if mode not in ("exact", "greedy"):
        raise ValueError("mode must be exact or greedy")
    results: dict[str, PropertyResult] = {}
    if 1 in properties:
        results["P1"] = _audit_p1(graph, n, epsilon, alpha)
    if 2 in properties:
        results["P2"] = _audit_p2(graph, n, p, epsilon, alpha)
    if 3 in properties:
        results["P3"] = _audit_p3(graph, n, alpha, mode, seed, p3_cap)
    if 4 in properties:
        results["P4"] = _audit_p4(graph, n, alpha)
    if 5 in properties:
        results["P5"] = _audit_p5(graph, n, alpha)
    if 6 in properties:
        results["P6"] = _audit_p6(graph, n, alpha, mode, seed, cbar_cap)
    if 7 in properties:
        results["P7"] = _audit_p7(graph, n, alpha, mode, seed, cbar_cap)
    return PseudorandomAudit(
        n=n, p=p, epsilon=epsilon, alpha=alpha, mode=mode, results=results
    )


def validate_audit_witnesses(
    graph: ColouredBipartiteGraph, audit: PseudorandomAudit
) -> list[str]:
    """Re-check returned witness families: edges exist with the claimed
    colours, matchings are matchings, vertex sets match.  Returns a list
    of problems (empty when clean)."""
    problems: list[str] = []

    def check_edges(edges, tag: str) -> None:
        seen: set[int] = set()
        for a, b, c in edges:
            col = graph.adj_a[a].get(b - graph.a_size)
            if col != c:
                problems.append(f"{tag}: edge ({a},{b}) does not have colour {c}")
            if a in seen or b in seen:
                problems.append(f"{tag}: edges are not a matching")
            seen.add(a)
            seen.add(b)

    for name, res in audit.results.items():
        for w in res.witnesses:
            if w is None:
                continue
            site, families = w
            for fam in families:
                vi = fam[0]
                for part in fam[1:]:
                    if not part:
                        continue
                    check_edges(part, f"{name}@{site}")
                    for a, b, _ in part:
                        if a not in vi and b not in vi:
                            problems.append(f"{name}@{site}: edge leaves its blob")
    return problems

"""Absorption gadgets: edge switchers, switchability audits, robustly
matchable templates, multi-target absorbers, distributive assembly, and the
identity-matching addition step.

Conventions: edges are (a, b, colour) triples with b local to the B side;
vertex sets hold flattened ids (B-vertex j lives at a_size + j).
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import networkx as nx

from .core import ColouredBipartiteGraph
from .solvers import exact_colour_set_matching
from .switchers import enumerate_switchers4

__all__ = [
    "SwitcherExhausted",
    "AbsorberExhausted",
    "TemplateExhausted",
    "AdditionExhausted",
    "EdgeSwitcher",
    "SwitchTrial",
    "SwitchableReport",
    "RobustTemplate",
    "Absorber",
    "DistributiveAbsorber",
    "AdditionBlock",
    "AdditionState",
    "build_edge_switcher",
    "verify_switchable",
    "build_template",
    "build_absorber",
    "distributive_absorber",
    "build_addition_state",
    "addition_step",
    "addition_demo",
    "TEMPLATE_DEGREE_CAP",
]

Edge = tuple[int, int, int]

# Reference fan-in bound for templates and absorbers; desk-scale defaults
# stay far below it.
TEMPLATE_DEGREE_CAP = 100


class SwitcherExhausted(RuntimeError):
    """No edge switcher within the order budget avoids the forbidden sets."""

    def __init__(self, message: str, max_order: int) -> None:
        super().__init__(message)
        self.max_order = max_order


class AbsorberExhausted(RuntimeError):
    def __init__(self, message: str, stage: str) -> None:
        super().__init__(message)
        self.stage = stage


class TemplateExhausted(RuntimeError):
    def __init__(self, message: str, best_failures: int) -> None:
        super().__init__(message)
        self.best_failures = best_failures


class AdditionExhausted(RuntimeError):
    def __init__(self, message: str, stage: str) -> None:
        super().__init__(message)
        self.stage = stage


def _require_edge(graph: ColouredBipartiteGraph, edge: Iterable[int]) -> Edge:
    a, b, c = edge
    if not (0 <= a < graph.a_size and 0 <= b < graph.b_size):
        raise ValueError(f"edge {(a, b, c)} has endpoints out of range")
    if graph.adj_a[a].get(b) != c:
        raise ValueError(f"edge {(a, b, c)} is not present in the host graph")
    return (a, b, c)


def _flat(graph: ColouredBipartiteGraph, edge: Edge) -> frozenset[int]:
    return frozenset((edge[0], graph.b_vertex(edge[1])))


def _flat_union(graph: ColouredBipartiteGraph, edges: Iterable[Edge]) -> frozenset[int]:
    out: set[int] = set()
    for a, b, _ in edges:
        out.add(a)
        out.add(graph.b_vertex(b))
    return frozenset(out)


def _check_exact_rainbow(
    graph: ColouredBipartiteGraph,
    edges: Iterable[Edge],
    scope: frozenset[int],
    colours: frozenset[int],
) -> None:
    """Edges must form a matching covering scope exactly, with each colour of
    `colours` used exactly once."""
    seen_v: set[int] = set()
    seen_c: set[int] = set()
    for edge in edges:
        a, b, c = _require_edge(graph, edge)
        u, w = a, graph.b_vertex(b)
        if u in seen_v or w in seen_v:
            raise ValueError("witness edges overlap at a vertex")
        if c in seen_c:
            raise ValueError("witness repeats a colour")
        seen_v.update((u, w))
        seen_c.add(c)
    if seen_v != set(scope):
        raise ValueError("witness does not cover the intended vertex set exactly")
    if seen_c != set(colours):
        raise ValueError("witness does not use the intended colour set exactly")


# ---------------------------------------------------------------------------
# Edge switchers


@dataclass(frozen=True)
class EdgeSwitcher:
    """Gadget exchanging two same-coloured host edges: the same vertex and
    colour budget completes either edge's endpoints to a rainbow matching
    using exactly the budget colours.  order = |colours| and
    |vertices| = 2*order - 2; the gadget avoids both exchanged edges."""

    e: Edge
    f: Edge
    vertices: frozenset[int]
    colours: frozenset[int]
    rainbow_e: tuple[Edge, ...] = field(repr=False)
    rainbow_f: tuple[Edge, ...] = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.colours)

    def validate(self, graph: ColouredBipartiteGraph) -> None:
        if len(self.vertices) != 2 * self.order - 2:
            raise ValueError("vertex count must be 2*order - 2")
        if self.vertices & (_flat(graph, self.e) | _flat(graph, self.f)):
            raise ValueError("gadget vertices must avoid both exchanged edges")
        if self.e[2] != self.f[2]:
            raise ValueError("exchanged edges must share a colour")
        if self.e[2] in self.colours:
            raise ValueError("the exchanged colour must stay outside the budget")
        for edge, witness in ((self.e, self.rainbow_e), (self.f, self.rainbow_f)):
            scope = self.vertices | _flat(graph, edge)
            _check_exact_rainbow(graph, witness, scope, self.colours)
            # independent existence check, on a separate code path from the
            # construction that produced the stored witness
            if exact_colour_set_matching(graph, scope, self.colours) is None:
                raise ValueError("independent matcher found no rainbow completion")

    def to_json_dict(self) -> dict:
        return {
            "vertices": sorted(self.vertices),
            "colours": sorted(self.colours),
            "targets": [list(self.e), list(self.f)],
        }


def build_edge_switcher(
    graph: ColouredBipartiteGraph,
    e: Edge,
    f: Edge,
    forbidden_vertices: frozenset[int] = frozenset(),
    forbidden_colours: frozenset[int] = frozenset(),
    max_order: int = 7,
) -> EdgeSwitcher:
    """Find an e,f-switcher avoiding the forbidden sets.

    The direct construction (order 3) walks one colour off both A-endpoints
    and another off both B-endpoints and needs the two bridging edges to
    agree in colour.  When no colour pair agrees, the mismatch is patched by
    a colour switcher between the two bridge colours (order 7).  Raises
    SwitcherExhausted when nothing fits within max_order.
    """
    e = _require_edge(graph, e)
    f = _require_edge(graph, f)
    if e == f:
        raise ValueError("the two edges must differ")
    if e[2] != f[2]:
        raise ValueError("the two edges must share a colour")
    if _flat(graph, e) & _flat(graph, f):
        raise ValueError("the two edges must be vertex-disjoint")
    if max_order < 3:
        raise SwitcherExhausted(
            f"order budget {max_order} is below the smallest construction (3)",
            max_order,
        )
    c = e[2]
    u1, v1 = e[0], e[1]
    u2, v2 = f[0], f[1]
    base_flat = _flat(graph, e) | _flat(graph, f)
    forbidden_vertices = frozenset(forbidden_vertices)
    forbidden_colours = frozenset(forbidden_colours)
    pool = sorted(graph.colours - {c} - forbidden_colours)

    mismatches: list[tuple[int, int, int, int, int, int, int, int]] = []
    for d, dp in itertools.permutations(pool, 2):
        w1 = graph.at_a[u1].get(d)
        w2 = graph.at_a[u2].get(d)
        x1 = graph.at_b[v1].get(dp)
        x2 = graph.at_b[v2].get(dp)
        if w1 is None or w2 is None or x1 is None or x2 is None:
            continue
        new_flat = {graph.b_vertex(w1), graph.b_vertex(w2), x1, x2}
        if len(new_flat) != 4 or new_flat & base_flat or new_flat & forbidden_vertices:
            continue
        c1 = graph.adj_a[x1].get(w1)
        c2 = graph.adj_a[x2].get(w2)
        if c1 is None or c2 is None:
            continue
        banned = {c, d, dp} | forbidden_colours
        if c1 in banned or c2 in banned:
            continue
        if c1 == c2:
            gadget = EdgeSwitcher(
                e=e,
                f=f,
                vertices=frozenset(new_flat),
                colours=frozenset((d, dp, c1)),
                rainbow_e=((u1, w1, d), (x1, v1, dp), (x2, w2, c1)),
                rainbow_f=((u2, w2, d), (x2, v2, dp), (x1, w1, c1)),
            )
            gadget.validate(graph)
            return gadget
        mismatches.append((d, dp, w1, w2, x1, x2, c1, c2))

    if max_order >= 7:
        cache: dict[tuple[int, int], list] = {}
        for d, dp, w1, w2, x1, x2, c1, c2 in mismatches:
            key = (c1, c2)
            if key not in cache:
                cache[key] = enumerate_switchers4(graph, c1, c2)
            core_new = frozenset((graph.b_vertex(w1), graph.b_vertex(w2), x1, x2))
            banned_shared = {c, d, dp} | forbidden_colours
            for sw in cache[key]:
                sv = sw.vertex_set(graph)
                if sv & (core_new | base_flat) or sv & forbidden_vertices:
                    continue
                if sw.shared_colours & banned_shared:
                    continue
                gadget = EdgeSwitcher(
                    e=e,
                    f=f,
                    vertices=core_new | sv,
                    colours=frozenset((d, dp, c1, c2)) | sw.shared_colours,
                    rainbow_e=((u1, w1, d), (x1, v1, dp), (x2, w2, c2)) + sw.m1,
                    rainbow_f=((u2, w2, d), (x2, v2, dp), (x1, w1, c1)) + sw.m2,
                )
                gadget.validate(graph)
                return gadget

    raise SwitcherExhausted(
        f"no switcher of order <= {max_order} between {e} and {f} "
        f"avoids {len(forbidden_vertices)} forbidden vertices and "
        f"{len(forbidden_colours)} forbidden colours",
        max_order,
    )


@dataclass(frozen=True)
class SwitchTrial:
    trial: int
    forbidden_vertex_count: int
    forbidden_colour_count: int
    found_order: int | None
    forbidden_vertices: tuple[int, ...] = field(repr=False)
    forbidden_colours: tuple[int, ...] = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.found_order is not None


@dataclass(frozen=True)
class SwitchableReport:
    e: Edge
    f: Edge
    beta: float
    k: int
    trials: tuple[SwitchTrial, ...]

    @property
    def pass_count(self) -> int:
        return sum(1 for t in self.trials if t.passed)

    @property
    def all_passed(self) -> bool:
        return self.pass_count == len(self.trials)

    def failures(self) -> tuple[SwitchTrial, ...]:
        """Exhaustion certificates: failed trials carry the forbidden sets
        that defeated the search."""
        return tuple(t for t in self.trials if not t.passed)


def verify_switchable(
    graph: ColouredBipartiteGraph,
    e: Edge,
    f: Edge,
    beta: float,
    k: int,
    trials: int = 20,
    seed: int = 0,
) -> SwitchableReport:
    """Monte-Carlo switchability audit: each trial bans uniformly random
    vertex and colour sets of size up to floor(beta * n_vertices), then asks
    for an e,f-switcher of order at most k avoiding them."""
    e = _require_edge(graph, e)
    f = _require_edge(graph, f)
    bound = int(beta * graph.n_vertices)
    vertex_pool = sorted(
        frozenset(range(graph.n_vertices)) - _flat(graph, e) - _flat(graph, f)
    )
    colour_pool = sorted(graph.colours - {e[2]})
    outcomes = []
    for t in range(trials):
        rng = random.Random(f"{seed}:{t}")
        nv = rng.randint(0, min(bound, len(vertex_pool)))
        nc = rng.randint(0, min(bound, len(colour_pool)))
        fv = tuple(sorted(rng.sample(vertex_pool, nv)))
        fc = tuple(sorted(rng.sample(colour_pool, nc)))
        try:
            found = build_edge_switcher(
                graph, e, f, frozenset(fv), frozenset(fc), max_order=k
            )
            order: int | None = found.order
        except SwitcherExhausted:
            order = None
        outcomes.append(SwitchTrial(t, nv, nc, order, fv, fc))
    return SwitchableReport(e, f, beta, k, tuple(outcomes))


# ---------------------------------------------------------------------------
# Robust templates


@dataclass(frozen=True)
class RobustTemplate:
    """Bipartite gadget on X against Y + Z with |X| = h, |Y| = |Z| = 2h/3:
    however h/3 of the Z slots are kept, X still has a perfect matching into
    Y plus the kept slots.  Certification is exhaustive over all such
    subsets, never assumed."""

    h: int
    edges: frozenset[tuple[int, str, int]]
    certified: bool

    @property
    def y_size(self) -> int:
        return 2 * self.h // 3

    @property
    def z_size(self) -> int:
        return 2 * self.h // 3

    @cached_property
    def neighbours(self) -> tuple[tuple[tuple[str, int], ...], ...]:
        out: list[list[tuple[str, int]]] = [[] for _ in range(self.h)]
        for x, side, idx in sorted(self.edges):
            out[x].append((side, idx))
        return tuple(tuple(v) for v in out)

    @property
    def max_degree(self) -> int:
        slot_deg: dict[tuple[str, int], int] = {}
        for _, side, idx in self.edges:
            slot_deg[(side, idx)] = slot_deg.get((side, idx), 0) + 1
        x_max = max(len(v) for v in self.neighbours)
        return max(x_max, max(slot_deg.values(), default=0))

    def matching_for(self, z0: frozenset[int]) -> dict[int, tuple[str, int]]:
        """Perfect matching of X into Y plus the kept Z slots z0."""
        if len(z0) != self.h // 3:
            raise ValueError(f"need exactly {self.h // 3} kept Z slots")
        if not z0 <= set(range(self.z_size)):
            raise ValueError("kept slots out of range")
        got = _template_matching(self, z0)
        if got is None:
            raise RuntimeError("certified template failed to produce a matching")
        return got


def _template_matching(
    template: RobustTemplate, z0: frozenset[int]
) -> dict[int, tuple[str, int]] | None:
    g = nx.Graph()
    tops = [("x", i) for i in range(template.h)]
    g.add_nodes_from(tops)
    for i in range(template.y_size):
        g.add_node(("s", "Y", i))
    for i in z0:
        g.add_node(("s", "Z", i))
    for x, side, idx in template.edges:
        if side == "Z" and idx not in z0:
            continue
        g.add_edge(("x", x), ("s", side, idx))
    matching = nx.bipartite.maximum_matching(g, top_nodes=tops)
    out: dict[int, tuple[str, int]] = {}
    for node in tops:
        slot = matching.get(node)
        if slot is None:
            return None
        out[node[1]] = (slot[1], slot[2])
    return out


def build_template(
    h: int,
    seed: int = 0,
    attempts: int = 400,
    max_subset_checks: int = 5000,
    lean: bool = False,
) -> RobustTemplate:
    """Randomized template construction with exhaustive certification.

    Each X vertex joins a small random set of slots; the candidate is kept
    only if every way of retaining h/3 Z slots leaves a perfect X-matching.
    The lean profile keeps X degrees minimal (2h/3 rows pinned to Y slots
    through a random bijection, h/3 flexible rows on Hall-sized random Z
    subsets), which matters when the downstream host is small.  Raises
    TemplateExhausted (with the best deficiency seen) when attempts run out.
    """
    if h % 3 != 0 or h < 3:
        raise ValueError("h must be a positive multiple of 3")
    m = 2 * h // 3
    quota = h // 3
    n_subsets = math.comb(m, quota)
    if n_subsets > max_subset_checks:
        raise ValueError(
            f"exhaustive certification needs {n_subsets} subset checks, "
            f"above the cap {max_subset_checks}"
        )
    slots = [("Y", i) for i in range(m)] + [("Z", i) for i in range(m)]
    best_failures: int | None = None
    for attempt in range(attempts):
        rng = random.Random(f"{seed}:{attempt}")
        edges: set[tuple[int, str, int]] = set()
        if lean:
            y_perm = rng.sample(range(m), m)
            z_perm = rng.sample(range(m), m)
            for j in range(m):
                edges.add((j, "Y", y_perm[j]))
                if rng.random() < 0.5:
                    edges.add((j, "Z", z_perm[j]))
            # flexible rows need quota+1 Z slots so every kept set is hit
            for i in range(h - m):
                for idx in rng.sample(range(m), quota + 1):
                    edges.add((m + i, "Z", idx))
        else:
            for x in range(h):
                degree = rng.randint(3, min(5, len(slots)))
                for side, idx in rng.sample(slots, degree):
                    edges.add((x, side, idx))
        candidate = RobustTemplate(h, frozenset(edges), certified=False)
        if candidate.max_degree > TEMPLATE_DEGREE_CAP:
            continue
        failures = 0
        for z0 in itertools.combinations(range(m), quota):
            if _template_matching(candidate, frozenset(z0)) is None:
                failures += 1
        if failures == 0:
            return RobustTemplate(h, frozenset(edges), certified=True)
        best_failures = failures if best_failures is None else min(best_failures, failures)
    raise TemplateExhausted(
        f"no template for h={h} within {attempts} attempts; "
        f"best candidate failed {best_failures} of {n_subsets} subset checks",
        best_failures if best_failures is not None else n_subsets,
    )


# ---------------------------------------------------------------------------
# Absorbers


@dataclass(frozen=True)
class Absorber:
    """Vertex and colour reservoir that can finish a rainbow matching around
    any single one of its target edges.  order = |colours|,
    |vertices| = 2*order - 2, and the shared target colour stays outside the
    budget so gadget matchings never touch a target edge."""

    targets: tuple[Edge, ...]
    vertices: frozenset[int]
    colours: frozenset[int]
    witnesses: tuple[tuple[Edge, ...], ...] = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.colours)

    def witness_for(self, target: Edge) -> tuple[Edge, ...]:
        return self.witnesses[self.targets.index(target)]

    def validate(self, graph: ColouredBipartiteGraph) -> None:
        if not self.targets:
            raise ValueError("an absorber needs at least one target")
        if len(self.witnesses) != len(self.targets):
            raise ValueError("one witness per target required")
        if len(self.vertices) != 2 * self.order - 2:
            raise ValueError("vertex count must be 2*order - 2")
        c0 = self.targets[0][2]
        if any(t[2] != c0 for t in self.targets):
            raise ValueError("targets must share one colour")
        if c0 in self.colours:
            raise ValueError("the target colour must stay outside the budget")
        target_flat = _flat_union(graph, self.targets)
        if self.vertices & target_flat:
            raise ValueError("gadget vertices must avoid all target edges")
        for target, witness in zip(self.targets, self.witnesses):
            scope = self.vertices | _flat(graph, target)
            _check_exact_rainbow(graph, witness, scope, self.colours)
            if exact_colour_set_matching(graph, scope, self.colours) is None:
                raise ValueError("independent matcher found no rainbow completion")

    def to_json_dict(self) -> dict:
        return {
            "vertices": sorted(self.vertices),
            "colours": sorted(self.colours),
            "targets": [list(t) for t in self.targets],
        }


def build_absorber(
    graph: ColouredBipartiteGraph,
    targets: Iterable[Edge],
    forbidden_vertices: frozenset[int] = frozenset(),
    forbidden_colours: frozenset[int] = frozenset(),
) -> Absorber:
    """Build an absorber for the given same-coloured targets.

    Dispatch by target count: one target gets a two-edge cap, two targets a
    single edge switcher, and three or more the anchored fan, where each
    target's bridge edge is switchable with one shared anchor edge.
    """
    targets = tuple(_require_edge(graph, t) for t in targets)
    if not targets:
        raise ValueError("need at least one target edge")
    if len(set(targets)) != len(targets):
        raise ValueError("targets must be distinct")
    c0 = targets[0][2]
    if any(t[2] != c0 for t in targets):
        raise ValueError("targets must share one colour")
    # same-coloured edges of a proper colouring are automatically disjoint
    forbidden_vertices = frozenset(forbidden_vertices)
    forbidden_colours = frozenset(forbidden_colours)

    if len(targets) == 1:
        (u, v, _) = targets[0]
        pool = sorted(graph.colours - {c0} - forbidden_colours)
        for d1, d2 in itertools.permutations(pool, 2):
            w = graph.at_a[u].get(d1)
            x = graph.at_b[v].get(d2)
            if w is None or x is None:
                continue
            new = {graph.b_vertex(w), x}
            if len(new) != 2 or new & _flat(graph, targets[0]) or new & forbidden_vertices:
                continue
            absorber = Absorber(
                targets=targets,
                vertices=frozenset(new),
                colours=frozenset((d1, d2)),
                witnesses=(((u, w, d1), (x, v, d2)),),
            )
            absorber.validate(graph)
            return absorber
        raise AbsorberExhausted(
            "no colour pair caps the single target", stage="colour-pair"
        )

    if len(targets) == 2:
        try:
            sw = build_edge_switcher(
                graph,
                targets[0],
                targets[1],
                forbidden_vertices=forbidden_vertices,
                forbidden_colours=forbidden_colours,
            )
        except SwitcherExhausted as exc:
            raise AbsorberExhausted(str(exc), stage="switcher") from exc
        absorber = Absorber(
            targets=targets,
            vertices=sw.vertices,
            colours=sw.colours,
            witnesses=(sw.rainbow_e, sw.rainbow_f),
        )
        absorber.validate(graph)
        return absorber

    return _build_fan_absorber(graph, targets, forbidden_vertices, forbidden_colours)


def _build_fan_absorber(
    graph: ColouredBipartiteGraph,
    targets: tuple[Edge, ...],
    forbidden_vertices: frozenset[int],
    forbidden_colours: frozenset[int],
) -> Absorber:
    """Anchored fan: per-target 4-cycles through two shared colours meet in
    bridge edges of one common colour; each bridge is made switchable with a
    single fresh anchor edge of that colour."""
    c0 = targets[0][2]
    target_flat = _flat_union(graph, targets)
    pool = sorted(graph.colours - {c0} - forbidden_colours)
    stage_reached = "colour-pair"
    for d, dp in itertools.permutations(pool, 2):
        # d runs v_i -> x_i on the A side, dp runs u_i -> w_i on the B side
        xs: list[int] = []
        ws: list[int] = []
        taken = set(target_flat)
        cprime: int | None = None
        ok = True
        for (u, v, _) in targets:
            x = graph.at_b[v].get(d)
            w = graph.at_a[u].get(dp)
            if x is None or w is None:
                ok = False
                break
            wg = graph.b_vertex(w)
            if x in taken or wg in taken or x == wg:
                ok = False
                break
            if x in forbidden_vertices or wg in forbidden_vertices:
                ok = False
                break
            bridge = graph.adj_a[x].get(w)
            if bridge is None:
                ok = False
                break
            if cprime is None:
                cprime = bridge
            elif bridge != cprime:
                ok = False
                break
            taken.update((x, wg))
            xs.append(x)
            ws.append(w)
        if not ok or cprime is None:
            continue
        if cprime in {c0, d, dp} or cprime in forbidden_colours:
            continue
        stage_reached = "anchor"
        for aa, ab in sorted(graph.colour_classes.get(cprime, ())):
            anchor = (aa, ab, cprime)
            anchor_flat = _flat(graph, anchor)
            if anchor_flat & taken or anchor_flat & forbidden_vertices:
                continue
            stage_reached = "switcher"
            used_v = frozenset(taken) | anchor_flat | forbidden_vertices
            used_c = frozenset((c0, d, dp, cprime)) | forbidden_colours
            switchers = []
            try:
                for x, w in zip(xs, ws):
                    sw = build_edge_switcher(
                        graph,
                        (x, w, cprime),
                        anchor,
                        forbidden_vertices=used_v,
                        forbidden_colours=used_c,
                    )
                    switchers.append(sw)
                    used_v |= sw.vertices
                    used_c |= sw.colours
            except SwitcherExhausted:
                continue
            vertices = frozenset(used_v - target_flat - forbidden_vertices)
            colours = frozenset((d, dp)).union(*(sw.colours for sw in switchers))
            witnesses = []
            for i, (u, v, _) in enumerate(targets):
                edges: list[Edge] = [(u, ws[i], dp), (xs[i], v, d)]
                edges.extend(switchers[i].rainbow_f)
                for j, other in enumerate(switchers):
                    if j != i:
                        edges.extend(other.rainbow_e)
                witnesses.append(tuple(edges))
            absorber = Absorber(
                targets=targets,
                vertices=vertices,
                colours=colours,
                witnesses=tuple(witnesses),
            )
            absorber.validate(graph)
            return absorber
    raise AbsorberExhausted(
        f"fan construction exhausted at stage {stage_reached} "
        f"for {len(targets)} targets",
        stage=stage_reached,
    )


# ---------------------------------------------------------------------------
# Distributive absorption


@dataclass(frozen=True)
class DistributiveAbsorber:
    """Absorber able to swallow any m0-subset of its targets: a certified
    template routes each of its fan absorbers to one same-coloured edge, so
    whichever targets arrive, the routing rearranges to cover exactly the
    gadget vertices plus the absorbed endpoints."""

    graph: ColouredBipartiteGraph = field(repr=False)
    targets: tuple[Edge, ...]
    m0: int
    template: RobustTemplate = field(repr=False)
    vertices: frozenset[int]
    colours: frozenset[int]
    y_edges: tuple[Edge, ...] = field(repr=False)
    z_edges: tuple[tuple[int, Edge], ...] = field(repr=False)
    absorbers: tuple[Absorber, ...] = field(repr=False)

    @property
    def m1(self) -> int:
        return len(self.targets)

    @property
    def shared_colour(self) -> int:
        return self.targets[0][2]

    def absorb(self, chosen: Iterable[Edge]) -> tuple[Edge, ...]:
        """Exactly-colours rainbow matching on vertices + V(chosen), for any
        m0-subset `chosen` of the targets."""
        chosen = tuple(_require_edge(self.graph, e) for e in chosen)
        if len(set(chosen)) != len(chosen) or len(chosen) != self.m0:
            raise ValueError(f"need exactly {self.m0} distinct target edges")
        if not set(chosen) <= set(self.targets):
            raise ValueError("absorbed edges must come from the target set")
        target_set = set(self.targets)
        chosen_set = set(chosen)
        z0 = frozenset(
            zi
            for zi, edge in self.z_edges
            if edge not in target_set or edge in chosen_set
        )
        routing = self.template.matching_for(z0)
        slot_edge: dict[tuple[str, int], Edge] = {
            ("Y", i): e for i, e in enumerate(self.y_edges)
        }
        slot_edge.update({("Z", zi): e for zi, e in self.z_edges})
        out: list[Edge] = []
        for x in sorted(routing):
            out.extend(self.absorbers[x].witness_for(slot_edge[routing[x]]))
        result = tuple(sorted(out))
        scope = self.vertices | _flat_union(self.graph, chosen)
        _check_exact_rainbow(self.graph, result, scope, self.colours)
        return result

    def to_json_dict(self) -> dict:
        return {
            "vertices": sorted(self.vertices),
            "colours": sorted(self.colours),
            "targets": [list(t) for t in self.targets],
            "m0": self.m0,
            "template_h": self.template.h,
        }


def distributive_absorber(
    graph: ColouredBipartiteGraph,
    targets: Iterable[Edge],
    m0: int,
    template: RobustTemplate,
    forbidden_vertices: frozenset[int] = frozenset(),
    forbidden_colours: frozenset[int] = frozenset(),
) -> DistributiveAbsorber:
    """Assemble a distributive absorber over `targets` (size m1) able to
    absorb any m0 of them, using a certified template with h = 3*m1.

    Extends the targets by h - m0 spare same-coloured edges, loads the Y
    slots and the kept Z slots with these edges (targets always on Z), and
    builds one absorber per X vertex over the edges at its kept slots.
    The ledger |vertices| = 2|colours| - 2*m0 is asserted.
    """
    targets = tuple(_require_edge(graph, t) for t in targets)
    m1 = len(targets)
    if m1 == 0:
        raise ValueError("need at least one target edge")
    if len(set(targets)) != m1:
        raise ValueError("targets must be distinct")
    c = targets[0][2]
    if any(t[2] != c for t in targets):
        raise ValueError("targets must share one colour")
    if not 0 <= m0 <= m1:
        raise ValueError("m0 must lie between 0 and the target count")
    if template.h != 3 * m1:
        raise ValueError("template size must be three times the target count")
    if not template.certified:
        raise ValueError("template must be certified")
    h = template.h
    forbidden_vertices = frozenset(forbidden_vertices)
    forbidden_colours = frozenset(forbidden_colours)

    target_set = set(targets)
    need_extra = h - m0
    spare_pool = [
        (a, b, c)
        for a, b in sorted(graph.colour_classes.get(c, ()))
        if (a, b, c) not in target_set
        and not (_flat(graph, (a, b, c)) & forbidden_vertices)
    ]
    if len(spare_pool) < need_extra:
        raise AbsorberExhausted(
            f"only {len(spare_pool)} spare colour-{c} edges, need {need_extra}",
            stage="extension",
        )
    extras = tuple(spare_pool[:need_extra])
    y_edges = extras[: template.y_size]
    z_spare = extras[template.y_size :]  # h/3 - m0 edges
    kept_count = h // 3 + m1 - m0
    z_edges = tuple(zip(range(kept_count), targets + z_spare))

    slot_edge: dict[tuple[str, int], Edge] = {
        ("Y", i): e for i, e in enumerate(y_edges)
    }
    slot_edge.update({("Z", zi): e for zi, e in z_edges})

    all_edges = y_edges + targets + z_spare
    used_v = forbidden_vertices | _flat_union(graph, all_edges)
    used_c = forbidden_colours | {c}
    absorbers: list[Absorber] = []
    for x in range(h):
        e_x = sorted(
            {slot_edge[slot] for slot in template.neighbours[x] if slot in slot_edge}
        )
        if not e_x:
            raise AbsorberExhausted(
                f"fan {x} has no kept slots to absorb", stage="routing"
            )
        try:
            absorber = build_absorber(
                graph,
                tuple(e_x),
                forbidden_vertices=used_v,
                forbidden_colours=used_c,
            )
        except AbsorberExhausted as exc:
            raise AbsorberExhausted(
                f"sub-absorber {x} failed: {exc}", stage=exc.stage
            ) from exc
        absorbers.append(absorber)
        used_v |= absorber.vertices
        used_c |= absorber.colours

    vertices = _flat_union(graph, extras).union(*(a.vertices for a in absorbers))
    colours = frozenset().union(*(a.colours for a in absorbers))
    if len(vertices) != 2 * len(colours) - 2 * m0:
        raise AssertionError(
            f"ledger violated: {len(vertices)} vertices vs "
            f"2*{len(colours)} - 2*{m0}"
        )
    gadget = DistributiveAbsorber(
        graph=graph,
        targets=targets,
        m0=m0,
        template=template,
        vertices=vertices,
        colours=colours,
        y_edges=y_edges,
        z_edges=z_edges,
        absorbers=tuple(absorbers),
    )
    # self-check one absorption end to end before handing the gadget out
    gadget.absorb(targets[:m0])
    return gadget


# ---------------------------------------------------------------------------
# Addition structure


_DERANGEMENTS4 = tuple(
    p for p in itertools.permutations(range(4)) if all(p[i] != i for i in range(4))
)


@dataclass(frozen=True)
class AdditionBlock:
    """Eight vertices carrying both a 4-edge identity-colour matching and a
    4-edge rainbow matching; dismantling trades the rainbow for the identity
    edges."""

    label: int
    identity_edges: tuple[Edge, ...]
    rainbow_edges: tuple[Edge, ...]

    @property
    def rainbow_colours(self) -> frozenset[int]:
        return frozenset(c for *_, c in self.rainbow_edges)


@dataclass(frozen=True)
class AdditionState:
    """Growth structure: a monochromatic identity matching, a rainbow
    matching organised into dismantlable blocks plus loose edges, and a
    two-vertex remainder, all vertex-disjoint."""

    identity_colour: int
    m_id: tuple[Edge, ...]
    blocks: tuple[AdditionBlock, ...]
    loose: tuple[Edge, ...]
    remainder: tuple[int, int]

    @property
    def m_rb(self) -> tuple[Edge, ...]:
        out: list[Edge] = []
        for blk in self.blocks:
            out.extend(blk.rainbow_edges)
        out.extend(self.loose)
        return tuple(out)

    @property
    def rainbow_colours(self) -> frozenset[int]:
        return frozenset(c for *_, c in self.m_rb)

    def consumable_colours(self) -> dict[int, int]:
        """Rainbow colour -> index of the block carrying it.  Only block
        colours can be consumed by a step; loose edges cannot be rewired."""
        out: dict[int, int] = {}
        for i, blk in enumerate(self.blocks):
            for col in blk.rainbow_colours:
                out[col] = i
        return out

    def covered_vertices(self, graph: ColouredBipartiteGraph) -> frozenset[int]:
        out = set(_flat_union(graph, self.m_id))
        for blk in self.blocks:
            out |= _flat_union(graph, blk.identity_edges)
        out |= _flat_union(graph, self.loose)
        return frozenset(out)

    def footprint(self, graph: ColouredBipartiteGraph) -> frozenset[int]:
        return self.covered_vertices(graph) | set(self.remainder)

    def validate(self, graph: ColouredBipartiteGraph) -> None:
        c0 = self.identity_colour
        seen: set[int] = set()

        def claim(edges: Iterable[Edge]) -> None:
            for edge in edges:
                for v in _flat(graph, _require_edge(graph, edge)):
                    if v in seen:
                        raise ValueError(f"vertex {v} used twice across the structure")
                    seen.add(v)

        for edge in self.m_id:
            if edge[2] != c0:
                raise ValueError("identity matching must be monochromatic")
        claim(self.m_id)
        for blk in self.blocks:
            if len(blk.identity_edges) != 4 or len(blk.rainbow_edges) != 4:
                raise ValueError("blocks carry 4 identity and 4 rainbow edges")
            if any(e[2] != c0 for e in blk.identity_edges):
                raise ValueError("block identity edges must carry the identity colour")
            id_flat = _flat_union(graph, blk.identity_edges)
            rb_flat = _flat_union(graph, blk.rainbow_edges)
            if id_flat != rb_flat or len(id_flat) != 8:
                raise ValueError("block matchings must share the same 8 vertices")
            if blk.label not in blk.rainbow_colours:
                raise ValueError("block label must be one of its rainbow colours")
            for edge in blk.rainbow_edges:
                _require_edge(graph, edge)
            claim(blk.identity_edges)
        claim(self.loose)
        colours = [c for *_, c in self.m_rb]
        if len(set(colours)) != len(colours):
            raise ValueError("rainbow side repeats a colour")
        if c0 in colours:
            raise ValueError("identity colour must stay off the rainbow side")
        wa, zb = self.remainder
        if not (0 <= wa < graph.a_size <= zb < graph.n_vertices):
            raise ValueError("remainder must hold one vertex per side")
        if wa in seen or zb in seen:
            raise ValueError("remainder vertices must be uncovered")


def _form_block(
    graph: ColouredBipartiteGraph, quad: tuple[Edge, ...], reserved: set[int]
) -> AdditionBlock | None:
    """Try to overlay a rainbow matching on 4 identity edges by a derangement
    of their B-endpoints, using only fresh colours."""
    for sigma in _DERANGEMENTS4:
        rainbow: list[Edge] = []
        colours: set[int] = set()
        ok = True
        for i in range(4):
            a = quad[i][0]
            b = quad[sigma[i]][1]
            col = graph.adj_a[a].get(b)
            if col is None or col in reserved or col in colours:
                ok = False
                break
            rainbow.append((a, b, col))
            colours.add(col)
        if ok:
            return AdditionBlock(
                label=min(colours),
                identity_edges=quad,
                rainbow_edges=tuple(rainbow),
            )
    return None


def build_addition_state(
    graph: ColouredBipartiteGraph,
    identity_colour: int,
    m_id_size: int = 20,
    block_count: int = 15,
    seed: int = 0,
) -> AdditionState:
    """Sample a valid addition structure: an identity matching, rainbow
    blocks built over further identity-colour edges, and a fresh remainder
    pair."""
    rng = random.Random(seed)
    c0 = identity_colour
    pool = [(a, b, c0) for a, b in graph.colour_classes.get(c0, ())]
    rng.shuffle(pool)
    if len(pool) < m_id_size + 4 * block_count:
        raise ValueError(
            f"identity colour class has {len(pool)} edges, "
            f"need {m_id_size + 4 * block_count}"
        )
    m_id = tuple(sorted(pool[:m_id_size]))
    remaining = pool[m_id_size:]
    blocks: list[AdditionBlock] = []
    reserved: set[int] = {c0}
    guard = 0
    while len(blocks) < block_count:
        guard += 1
        if guard > 200 * block_count or len(remaining) < 4:
            raise RuntimeError("block search exhausted; host too small or colours spent")
        quad = tuple(sorted(rng.sample(remaining, 4)))
        blk = _form_block(graph, quad, reserved)
        if blk is None:
            continue
        blocks.append(blk)
        reserved |= blk.rainbow_colours
        for edge in quad:
            remaining.remove(edge)
    covered: set[int] = set(_flat_union(graph, m_id))
    for blk in blocks:
        covered |= _flat_union(graph, blk.identity_edges)
    fresh_a = [v for v in range(graph.a_size) if v not in covered]
    fresh_b = [v for v in range(graph.a_size, graph.n_vertices) if v not in covered]
    if not fresh_a or not fresh_b:
        raise ValueError("no fresh vertices left for the remainder pair")
    state = AdditionState(
        identity_colour=c0,
        m_id=m_id,
        blocks=tuple(blocks),
        loose=(),
        remainder=(fresh_a[0], fresh_b[0]),
    )
    state.validate(graph)
    return state


def _candidate_paths(
    graph: ColouredBipartiteGraph,
    start_a: int,
    end_b: int,
    avail_id: tuple[Edge, ...],
    consumable: dict[int, int],
    banned: frozenset[int],
    detours: int,
):
    """Yield (new_edges, consumed_identity_edges) for an A-to-B path that
    alternates block-coloured edges with `detours` identity edges.  All
    block colours on one path are distinct and unbanned."""
    if detours == 0:
        col = graph.adj_a[start_a].get(end_b)
        if col is not None and col in consumable and col not in banned:
            yield ((start_a, end_b, col),), ()
        return
    if detours == 1:
        for a1, b1, cid in avail_id:
            p = graph.adj_a[start_a].get(b1)
            q = graph.adj_a[a1].get(end_b)
            if p is None or q is None or p == q:
                continue
            if p not in consumable or q not in consumable:
                continue
            if p in banned or q in banned:
                continue
            yield ((start_a, b1, p), (a1, end_b, q)), ((a1, b1, cid),)
        return
    if detours == 2:
        for (a1, b1, c1), (a2, b2, c2) in itertools.permutations(avail_id, 2):
            p = graph.adj_a[start_a].get(b1)
            q = graph.adj_a[a1].get(b2)
            r = graph.adj_a[a2].get(end_b)
            if p is None or q is None or r is None:
                continue
            cols = {p, q, r}
            if len(cols) != 3 or cols & banned:
                continue
            if not cols <= consumable.keys():
                continue
            yield (
                ((start_a, b1, p), (a1, b2, q), (a2, end_b, r)),
                ((a1, b1, c1), (a2, b2, c2)),
            )
        return
    raise ValueError("paths support at most 2 identity-edge detours")


def _alternating_walk(
    graph: ColouredBipartiteGraph,
    avail: tuple[Edge, ...],
    drops: frozenset[int],
    node_cap: int = 200_000,
):
    """Walk a1 -id- b1 -d1- a2 -id- b2 ... ending on an identity edge:
    removes len(drops)+1 identity edges and re-adds each dropped colour
    once.  Returns (removed, added, (a_first, b_last_flat)) or None."""
    by_a = {e[0]: e for e in avail}
    budget = [node_cap]

    def extend(
        a_cur: int,
        remaining: frozenset[int],
        removed: tuple[Edge, ...],
        added: tuple[Edge, ...],
        visited: frozenset[int],
    ):
        budget[0] -= 1
        if budget[0] < 0:
            return None
        edge = by_a.get(a_cur)
        if edge is None:
            return None
        bg = graph.b_vertex(edge[1])
        if bg in visited:
            return None
        removed = removed + (edge,)
        visited = visited | {bg}
        if not remaining:
            return removed, added, bg
        for d in sorted(remaining):
            a_next = graph.at_b[edge[1]].get(d)
            if a_next is None or a_next in visited or a_next not in by_a:
                continue
            got = extend(
                a_next,
                remaining - {d},
                removed,
                added + ((a_next, edge[1], d),),
                visited | {a_next},
            )
            if got:
                return got
        return None

    for a1 in sorted(by_a):
        got = extend(a1, drops, (), (), frozenset((a1,)))
        if got:
            removed, added, b_last = got
            return removed, added, (a1, b_last)
    return None


def addition_step(
    graph: ColouredBipartiteGraph,
    state: AdditionState,
    x: int,
    y: int,
    max_detour: int = 2,
) -> AdditionState:
    """One growth move: route the remainder pair onto two fresh vertices
    through unconsumed block colours, dismantle the blocks those colours
    came from, then re-thread the dropped colours along an alternating walk
    through the identity matching.  Nets exactly one extra identity edge,
    leaves the rainbow colour set untouched, and grows the footprint by
    exactly the two new vertices."""
    state.validate(graph)
    c0 = state.identity_colour
    if len(state.m_id) < 4:
        raise AdditionExhausted(
            "path stage needs an identity matching with at least 4 edges",
            stage="paths",
        )
    footprint = state.footprint(graph)
    for v in (x, y):
        if not 0 <= v < graph.n_vertices:
            raise ValueError(f"vertex {v} out of range")
        if v in footprint:
            raise ValueError(f"vertex {v} already belongs to the structure")
    if x == y:
        raise ValueError("the two new vertices must differ")
    a_new = min(x, y)
    b_new = max(x, y)
    if not (a_new < graph.a_size <= b_new):
        raise ValueError("need one new vertex on each side")
    w_hat, z_hat = state.remainder
    consumable = state.consumable_colours()

    found = None
    splits = sorted(
        ((j1, j2) for j1 in range(max_detour + 1) for j2 in range(max_detour + 1)),
        key=lambda t: (t[0] + t[1], t),
    )
    for j1, j2 in splits:
        for f1a, e1a in _candidate_paths(
            graph, w_hat, b_new - graph.a_size, state.m_id, consumable, frozenset(), j1
        ):
            used = frozenset(c for *_, c in f1a)
            avail2 = tuple(e for e in state.m_id if e not in set(e1a))
            for f1b, e1b in _candidate_paths(
                graph, a_new, z_hat - graph.a_size, avail2, consumable, used, j2
            ):
                found = (f1a, e1a, f1b, e1b)
                break
            if found:
                break
        if found:
            break
    if found is None:
        raise AdditionExhausted(
            "no block-coloured path pair within the detour budget", stage="paths"
        )
    f1a, e1a, f1b, e1b = found
    path_edges = f1a + f1b
    consumed_id = set(e1a) | set(e1b)
    path_colours = frozenset(c for *_, c in path_edges)

    # dismantle every block whose colour a path consumed
    consumed_blocks = sorted({consumable[c] for c in path_colours})
    id_gain: list[Edge] = []
    drops: list[int] = []
    for i in consumed_blocks:
        blk = state.blocks[i]
        id_gain.extend(blk.identity_edges)
        drops.extend(sorted(blk.rainbow_colours - path_colours))
    blocks_after = tuple(
        b for i, b in enumerate(state.blocks) if i not in set(consumed_blocks)
    )

    avail = tuple(e for e in state.m_id if e not in consumed_id) + tuple(id_gain)
    walk = _alternating_walk(graph, avail, frozenset(drops))
    if walk is None:
        raise AdditionExhausted(
            "no alternating identity walk re-threads the dropped colours",
            stage="walk",
        )
    walk_removed, walk_added, new_remainder = walk

    m_id_after = tuple(sorted(set(avail) - set(walk_removed)))
    loose_after = state.loose + path_edges + walk_added
    next_state = AdditionState(
        identity_colour=c0,
        m_id=m_id_after,
        blocks=blocks_after,
        loose=loose_after,
        remainder=new_remainder,
    )
    # conservation ledger
    if len(next_state.m_id) != len(state.m_id) + 1:
        raise AssertionError("identity matching must grow by exactly one edge")
    if next_state.rainbow_colours != state.rainbow_colours:
        raise AssertionError("rainbow colour set must be invariant")
    if next_state.footprint(graph) != footprint | {x, y}:
        raise AssertionError("footprint must grow by exactly the two new vertices")
    next_state.validate(graph)
    return next_state


def addition_demo(
    graph: ColouredBipartiteGraph,
    state: AdditionState,
    steps: int,
    max_detour: int = 2,
) -> tuple[AdditionState, list[dict]]:
    """Drive several addition steps, choosing each fresh pair greedily: scan
    candidate pairs in order and keep the first the machinery accepts,
    preferring pairs that need no identity-edge detours."""
    log: list[dict] = []
    current = state
    for step in range(steps):
        footprint = current.footprint(graph)
        fresh_a = [v for v in range(graph.a_size) if v not in footprint]
        fresh_b = [v for v in range(graph.a_size, graph.n_vertices) if v not in footprint]
        chosen = None
        for detour in range(max_detour + 1):
            for xa, xb in itertools.product(fresh_a, fresh_b):
                try:
                    nxt = addition_step(graph, current, xa, xb, max_detour=detour)
                except AdditionExhausted:
                    continue
                chosen = (xa, xb, nxt)
                break
            if chosen:
                break
        if chosen is None:
            raise AdditionExhausted(
                f"no fresh pair admitted step {step + 1}", stage="paths"
            )
        xa, xb, current = chosen
        log.append(
            {
                "step": step + 1,
                "pair": [xa, xb],
                "m_id": len(current.m_id),
                "blocks": len(current.blocks),
                "loose": len(current.loose),
            }
        )
    return current, log

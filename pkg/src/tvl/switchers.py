"""Colour switchers: pairs of rainbow matchings on the same vertex set whose
colour sets differ in exactly one colour, realised as disjoint unions of
rainbow 4-cycles.  Applying one to a host matching swaps that colour out.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .core import ColouredBipartiteGraph, RainbowMatching

__all__ = [
    "Cycle4",
    "ColourSwitcher",
    "SwitcherWeights",
    "BoundReport",
    "enumerate_rainbow_4cycles",
    "enumerate_switchers4",
    "weight_matrix",
    "check_count_bounds",
    "compose_switchers",
    "apply_switcher",
]


@dataclass(frozen=True)
class Cycle4:
    """Rainbow 4-cycle a1-b1-a2-b2 with a1 < a2, b1 < b2.  Its two
    alternation classes are the perfect matchings {a1b1, a2b2} and
    {a1b2, a2b1}."""

    a1: int
    a2: int
    b1: int
    b2: int
    c11: int  # colour of a1b1
    c12: int  # colour of a1b2
    c21: int  # colour of a2b1
    c22: int  # colour of a2b2

    @property
    def colours(self) -> frozenset[int]:
        return frozenset((self.c11, self.c12, self.c21, self.c22))

    @property
    def class_straight(self) -> tuple[tuple[int, int, int], ...]:
        return ((self.a1, self.b1, self.c11), (self.a2, self.b2, self.c22))

    @property
    def class_crossed(self) -> tuple[tuple[int, int, int], ...]:
        return ((self.a1, self.b2, self.c12), (self.a2, self.b1, self.c21))

    def classes_by_colour(self, c: int) -> tuple[tuple[tuple[int, int, int], ...], tuple[tuple[int, int, int], ...]]:
        """(class containing colour c, the other class)."""
        if c in (self.c11, self.c22):
            return self.class_straight, self.class_crossed
        if c in (self.c12, self.c21):
            return self.class_crossed, self.class_straight
        raise ValueError(f"colour {c} not on this cycle")

    def partner_colour(self, c: int) -> int:
        """The colour paired with c inside c's alternation class."""
        if c == self.c11:
            return self.c22
        if c == self.c22:
            return self.c11
        if c == self.c12:
            return self.c21
        if c == self.c21:
            return self.c12
        raise ValueError(f"colour {c} not on this cycle")

    def vertex_pair_key(self) -> tuple[int, int, int, int]:
        return (self.a1, self.a2, self.b1, self.b2)


@dataclass(frozen=True)
class ColourSwitcher:
    """Ordered pair (m1, m2) of equal-size rainbow matchings on the same
    vertices with C(m1) - {switch_from} = C(m2) - {switch_to}; the union is a
    vertex-disjoint union of rainbow 4-cycles.  The reverse pair is the
    switcher in the other direction."""

    m1: tuple[tuple[int, int, int], ...]
    m2: tuple[tuple[int, int, int], ...]
    switch_from: int
    switch_to: int

    @property
    def order(self) -> int:
        return len(self.m1)

    @cached_property
    def colour_set(self) -> frozenset[int]:
        return frozenset(c for _, _, c in self.m1) | frozenset(c for _, _, c in self.m2)

    @cached_property
    def shared_colours(self) -> frozenset[int]:
        return frozenset(c for _, _, c in self.m1) & frozenset(c for _, _, c in self.m2)

    def vertex_set(self, graph: ColouredBipartiteGraph) -> frozenset[int]:
        out = set()
        for a, b, _ in self.m1:
            out.add(graph.a_vertex(a))
            out.add(graph.b_vertex(b))
        return frozenset(out)

    def reverse(self) -> "ColourSwitcher":
        return ColourSwitcher(
            m1=self.m2, m2=self.m1, switch_from=self.switch_to, switch_to=self.switch_from
        )

    def validate(self, graph: ColouredBipartiteGraph) -> None:
        m1 = RainbowMatching.build(graph, self.m1)
        m2 = RainbowMatching.build(graph, self.m2)
        if len(m1) != len(m2):
            raise ValueError("matchings must have equal size")
        if m1.vertex_set() != m2.vertex_set():
            raise ValueError("matchings must cover the same vertices")
        c1, c2 = m1.colour_set(), m2.colour_set()
        if self.switch_from not in c1 or self.switch_to not in c2:
            raise ValueError("switch colours must appear on their sides")
        if self.switch_from == self.switch_to:
            raise ValueError("switch colours must differ")
        if c1 - {self.switch_from} != c2 - {self.switch_to}:
            raise ValueError("colour sets must differ in exactly the switch colours")
        if not _is_disjoint_union_of_rainbow_4cycles(self.m1, self.m2):
            raise ValueError("union must decompose into vertex-disjoint rainbow 4-cycles")


def _is_disjoint_union_of_rainbow_4cycles(
    m1: Iterable[tuple[int, int, int]], m2: Iterable[tuple[int, int, int]]
) -> bool:
    at_a: dict[int, list[tuple[int, int]]] = defaultdict(list)
    at_b: dict[int, list[tuple[int, int]]] = defaultdict(list)
    edges = list(m1) + list(m2)
    if len(set((a, b) for a, b, _ in edges)) != len(edges):
        return False
    for a, b, c in edges:
        at_a[a].append((b, c))
        at_b[b].append((a, c))
    if any(len(v) != 2 for v in at_a.values()) or any(len(v) != 2 for v in at_b.values()):
        return False
    seen_a: set[int] = set()
    for a0 in at_a:
        if a0 in seen_a:
            continue
        # walk the component; it must close after exactly 4 edges, rainbow
        cyc_colours = []
        a, prev_b = a0, None
        steps = 0
        while True:
            nxt = [(b, c) for b, c in at_a[a] if b != prev_b]
            if prev_b is None:
                nxt = [at_a[a][0]]
            b, c = nxt[0]
            cyc_colours.append(c)
            back = [(x, cc) for x, cc in at_b[b] if x != a]
            if not back:
                return False
            a2, c2 = back[0]
            cyc_colours.append(c2)
            seen_a.add(a)
            prev_b = b
            a = a2
            steps += 1
            if a == a0:
                break
            if steps > len(edges):
                return False
        if len(cyc_colours) != 4 or len(set(cyc_colours)) != 4:
            return False
    return True


def enumerate_rainbow_4cycles(graph: ColouredBipartiteGraph) -> list[Cycle4]:
    """All rainbow 4-cycles, canonically labelled, in lexicographic order."""
    out = []
    adj = graph.adj_a
    for a1 in range(graph.a_size):
        n1 = adj[a1]
        for a2 in range(a1 + 1, graph.a_size):
            n2 = adj[a2]
            common = sorted(set(n1) & set(n2))
            for i, b1 in enumerate(common):
                for b2 in common[i + 1 :]:
                    c11, c12 = n1[b1], n1[b2]
                    c21, c22 = n2[b1], n2[b2]
                    if len({c11, c12, c21, c22}) == 4:
                        out.append(Cycle4(a1, a2, b1, b2, c11, c12, c21, c22))
    return out


def _bucket_entries(
    cycles: Iterable[Cycle4],
) -> dict[frozenset[int], list[tuple[Cycle4, int, int]]]:
    """Bucket key: a 3-subset of the cycle's colours; entry records the cycle,
    the left-out colour, and that colour's class-partner colour."""
    buckets: dict[frozenset[int], list[tuple[Cycle4, int, int]]] = defaultdict(list)
    for cyc in cycles:
        for x in cyc.colours:
            buckets[cyc.colours - {x}].append((cyc, x, cyc.partner_colour(x)))
    return buckets


def _cycles_disjoint(s1: Cycle4, s2: Cycle4) -> bool:
    return (
        s1.a1 != s2.a1 and s1.a1 != s2.a2 and s1.a2 != s2.a1 and s1.a2 != s2.a2
        and s1.b1 != s2.b1 and s1.b1 != s2.b2 and s1.b2 != s2.b1 and s1.b2 != s2.b2
    )


def _switcher_from_pair(s1: Cycle4, c: int, s2: Cycle4, d: int) -> ColourSwitcher:
    with_c, other1 = s1.classes_by_colour(c)
    with_d, other2 = s2.classes_by_colour(d)
    m1 = tuple(sorted(with_c + other2))
    m2 = tuple(sorted(other1 + with_d))
    return ColourSwitcher(m1=m1, m2=m2, switch_from=c, switch_to=d)


def enumerate_switchers4(
    graph: ColouredBipartiteGraph, c: int, d: int
) -> list[ColourSwitcher]:
    """All order-4 switchers that swap colour c for colour d.  Each comes from
    an ordered pair of vertex-disjoint rainbow 4-cycles sharing exactly three
    colours, with c and d the private colours and equal class-partner colours
    for the private edges."""
    if c == d:
        raise ValueError("switch colours must differ")
    cycles = enumerate_rainbow_4cycles(graph)
    buckets = _bucket_entries(cycles)
    out = []
    for entries in buckets.values():
        c_side = [(cyc, t) for cyc, x, t in entries if x == c]
        d_side = [(cyc, t) for cyc, x, t in entries if x == d]
        for cyc1, t1 in c_side:
            for cyc2, t2 in d_side:
                if t1 == t2 and _cycles_disjoint(cyc1, cyc2):
                    out.append(_switcher_from_pair(cyc1, c, cyc2, d))
    return out


@dataclass(frozen=True)
class SwitcherWeights:
    """Order-4 switcher counts per unordered colour pair.  weight(c, d) is
    the number of c,d-switchers, which equals the number of d,c-switchers
    (reversal is a bijection).  Cycle pairs sharing all four colours admit
    only trivial same-colour exchanges; those are tallied separately."""

    pair_weights: dict[tuple[int, int], int] = field(default_factory=dict)
    null_pairs: int = 0
    cycle_count: int = 0

    def weight(self, c: int, d: int) -> int:
        if c == d:
            raise ValueError("weights are defined for distinct colours")
        return self.pair_weights.get((min(c, d), max(c, d)), 0)

    def pairs(self) -> list[tuple[int, int]]:
        return sorted(self.pair_weights)

    def total(self) -> int:
        return sum(self.pair_weights.values())


def weight_matrix(graph: ColouredBipartiteGraph) -> SwitcherWeights:
    """Count order-4 switchers for every colour pair in one sweep."""
    cycles = enumerate_rainbow_4cycles(graph)
    buckets = _bucket_entries(cycles)
    weights: dict[tuple[int, int], int] = defaultdict(int)
    for entries in buckets.values():
        k = len(entries)
        for i in range(k):
            cyc1, x1, t1 = entries[i]
            for j in range(i + 1, k):
                cyc2, x2, t2 = entries[j]
                if x1 != x2 and t1 == t2 and _cycles_disjoint(cyc1, cyc2):
                    key = (min(x1, x2), max(x1, x2))
                    weights[key] += 1
    # same-colour-set pairs with matching class pairings
    by_colourset: dict[frozenset[int], list[Cycle4]] = defaultdict(list)
    for cyc in cycles:
        by_colourset[cyc.colours].append(cyc)
    null_pairs = 0
    for group in by_colourset.values():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                s1, s2 = group[i], group[j]
                if not _cycles_disjoint(s1, s2):
                    continue
                pairing1 = {frozenset((s1.c11, s1.c22)), frozenset((s1.c12, s1.c21))}
                pairing2 = {frozenset((s2.c11, s2.c22)), frozenset((s2.c12, s2.c21))}
                if pairing1 == pairing2:
                    null_pairs += 1
    return SwitcherWeights(
        pair_weights=dict(weights), null_pairs=null_pairs, cycle_count=len(cycles)
    )


@dataclass(frozen=True)
class BoundReport:
    """Observed aggregation maxima against the polynomial ceilings that
    overlap counting guarantees for order-4 switchers."""

    n_vertices: int
    total_ordered_switchers: int
    case_maxima: tuple[tuple[str, int, int], ...]  # (label, max observed, bound)
    violations: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def check_count_bounds(graph: ColouredBipartiteGraph) -> BoundReport:
    """Exhaustively enumerate ordered order-4 switchers and check five
    overlap ceilings.  With n the total vertex count:

      i.   switchers leaving colour c whose colour set meets c':  <= 20 n^3
      ii.  switchers leaving colour c through a fixed vertex:     <= 50 n^3
      iii. switchers containing both edges of a same-coloured pair
           and a further fixed colour:                            <= 1000 n
      iv.  same pair, and a fixed vertex off that pair:           <= 600 n
      v.   switchers through a fixed edge:                        <= 100 n^3
    """
    n = graph.n_vertices
    cycles = enumerate_rainbow_4cycles(graph)
    buckets = _bucket_entries(cycles)

    cnt_i: dict[tuple[int, int], int] = defaultdict(int)
    cnt_ii: dict[tuple[int, int], int] = defaultdict(int)
    cnt_iii: dict[tuple, int] = defaultdict(int)
    cnt_iv: dict[tuple, int] = defaultdict(int)
    cnt_v: dict[tuple[int, int, int], int] = defaultdict(int)
    total = 0

    for entries in buckets.values():
        for cyc1, x1, t1 in entries:
            for cyc2, x2, t2 in entries:
                if x1 == x2 or t1 != t2 or not _cycles_disjoint(cyc1, cyc2):
                    continue
                s = _switcher_from_pair(cyc1, x1, cyc2, x2)
                total += 1
                colours = s.colour_set
                vertices = []
                for a, b, _ in s.m1:
                    vertices.append(("a", a))
                    vertices.append(("b", b))
                for cp in colours - {x1}:
                    cnt_i[(x1, cp)] += 1
                for v in vertices:
                    cnt_ii[(x1, v)] += 1
                all_edges = s.m1 + s.m2
                for e in all_edges:
                    cnt_v[e] += 1
                by_colour: dict[int, list[tuple[int, int, int]]] = defaultdict(list)
                for e in all_edges:
                    by_colour[e[2]].append(e)
                for t, pair in by_colour.items():
                    if len(pair) != 2:
                        continue
                    e, f = sorted(pair)
                    for cp in colours - {t}:
                        cnt_iii[(t, e, f, cp)] += 1
                    pair_vs = {("a", e[0]), ("b", e[1]), ("a", f[0]), ("b", f[1])}
                    for v in vertices:
                        if v not in pair_vs:
                            cnt_iv[(t, e, f, v)] += 1

    cases = (
        ("colour-through-colour", cnt_i, 20 * n**3),
        ("colour-through-vertex", cnt_ii, 50 * n**3),
        ("pair-through-colour", cnt_iii, 1000 * n),
        ("pair-through-vertex", cnt_iv, 600 * n),
        ("through-edge", cnt_v, 100 * n**3),
    )
    maxima = []
    violations = []
    for label, counter, bound in cases:
        observed = max(counter.values(), default=0)
        maxima.append((label, observed, bound))
        if observed > bound:
            violations.append(f"{label}: observed {observed} exceeds {bound}")
    return BoundReport(
        n_vertices=n,
        total_ordered_switchers=total,
        case_maxima=tuple(maxima),
        violations=tuple(violations),
    )


def compose_switchers(s_ab: ColourSwitcher, s_bc: ColourSwitcher) -> ColourSwitcher:
    """Chain two switchers through a pivot colour: the first swaps a for b,
    the second b for c, and their union swaps a for c.  Requires disjoint
    vertex sets and colour sets meeting only in the pivot."""
    if s_ab.switch_to != s_bc.switch_from:
        raise ValueError("second switcher must start at the first one's target colour")
    va = {(a, b) for a, b, _ in s_ab.m1} | {(a, b) for a, b, _ in s_ab.m2}
    vb = {(a, b) for a, b, _ in s_bc.m1} | {(a, b) for a, b, _ in s_bc.m2}
    a_left = {a for a, _ in va}
    b_left = {b for _, b in va}
    a_right = {a for a, _ in vb}
    b_right = {b for _, b in vb}
    if a_left & a_right or b_left & b_right:
        raise ValueError("switchers must be vertex-disjoint")
    pivot = s_ab.switch_to
    overlap = s_ab.colour_set & s_bc.colour_set
    if overlap != {pivot}:
        raise ValueError(f"colour sets must meet exactly in the pivot, got {sorted(overlap)}")
    return ColourSwitcher(
        m1=tuple(sorted(s_ab.m1 + s_bc.m1)),
        m2=tuple(sorted(s_ab.m2 + s_bc.m2)),
        switch_from=s_ab.switch_from,
        switch_to=s_bc.switch_to,
    )


def apply_switcher(matching: RainbowMatching, s: ColourSwitcher) -> RainbowMatching:
    """Replace the switcher's first matching inside the host matching by its
    second.  Requires s.m1 to be contained in the matching and the incoming
    colour to be absent from it.  Applying s then s.reverse() restores the
    original matching."""
    host = matching.host
    current = set(matching.edges)
    m1 = set(s.m1)
    if not m1 <= current:
        raise ValueError("switcher's outgoing matching must lie inside the host matching")
    if s.switch_to in matching.colour_set():
        raise ValueError("incoming colour already used by the matching")
    new_edges = sorted((current - m1) | set(s.m2))
    return RainbowMatching.build(host, new_edges)

"""Latin arrays, properly coloured bipartite graphs, and the exact
translations between them.

Conventions used across the package: symbols and colours are non-negative
integer ids; vertex class A precedes class B in any flattened ordering, so
A-vertex i has global id i and B-vertex j has global id a_size + j.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

__all__ = [
    "LatinArray",
    "ColouredBipartiteGraph",
    "RainbowMatching",
    "Transversal",
    "ValidationReport",
    "latin_to_graph",
    "graph_to_latin",
    "matching_to_transversal",
    "validate",
    "latin_to_json",
    "latin_from_json",
    "graph_to_json",
    "graph_from_json",
]


@dataclass(frozen=True)
class LatinArray:
    """An n by n grid where each symbol appears at most once per row and
    column.  Cells may be empty (None).  A Latin square is the special case
    where every cell is filled and exactly n symbols are used."""

    order: int
    cells: tuple[tuple[int | None, ...], ...]
    symbol_count: int

    @classmethod
    def from_cells(cls, cells: Sequence[Sequence[int | None]]) -> "LatinArray":
        n = len(cells)
        if n == 0:
            raise ValueError("empty grid")
        grid = tuple(tuple(row) for row in cells)
        if any(len(row) != n for row in grid):
            raise ValueError("grid is not square")
        symbols: set[int] = set()
        for i, row in enumerate(grid):
            seen: set[int] = set()
            for s in row:
                if s is None:
                    continue
                if not isinstance(s, int) or s < 0:
                    raise ValueError(f"symbol {s!r} in row {i} is not a non-negative integer")
                if s in seen:
                    raise ValueError(f"symbol {s} repeats in row {i}")
                seen.add(s)
            symbols |= seen
        for j in range(n):
            seen = set()
            for i in range(n):
                s = grid[i][j]
                if s is None:
                    continue
                if s in seen:
                    raise ValueError(f"symbol {s} repeats in column {j}")
                seen.add(s)
        return cls(order=n, cells=grid, symbol_count=len(symbols))

    @property
    def is_latin_square(self) -> bool:
        if self.symbol_count != self.order:
            return False
        return all(s is not None for row in self.cells for s in row)

    def symbols(self) -> set[int]:
        return {s for row in self.cells for s in row if s is not None}


@dataclass(frozen=True)
class ColouredBipartiteGraph:
    """A bipartite graph on classes A and B with integer-coloured edges.
    The colouring must be proper and parallel edges are rejected."""

    a_size: int
    b_size: int
    edges: tuple[tuple[int, int, int], ...]
    colour_count: int

    @classmethod
    def build(
        cls,
        a_size: int,
        b_size: int,
        edges: Iterable[tuple[int, int, int]],
    ) -> "ColouredBipartiteGraph":
        edge_list = tuple(sorted((int(a), int(b), int(c)) for a, b, c in edges))
        seen_pairs: set[tuple[int, int]] = set()
        seen_a: set[tuple[int, int]] = set()
        seen_b: set[tuple[int, int]] = set()
        colours: set[int] = set()
        for a, b, c in edge_list:
            if not (0 <= a < a_size and 0 <= b < b_size):
                raise ValueError(f"edge ({a},{b}) out of range for {a_size}x{b_size}")
            if c < 0:
                raise ValueError(f"negative colour {c}")
            if (a, b) in seen_pairs:
                raise ValueError(f"parallel edge at ({a},{b})")
            if (a, c) in seen_a:
                raise ValueError(f"colour {c} repeats at A-vertex {a}")
            if (b, c) in seen_b:
                raise ValueError(f"colour {c} repeats at B-vertex {b}")
            seen_pairs.add((a, b))
            seen_a.add((a, c))
            seen_b.add((b, c))
            colours.add(c)
        return cls(a_size=a_size, b_size=b_size, edges=edge_list, colour_count=len(colours))

    # -- flattened vertex ids: A before B ------------------------------------

    @property
    def n_vertices(self) -> int:
        return self.a_size + self.b_size

    def a_vertex(self, i: int) -> int:
        return i

    def b_vertex(self, j: int) -> int:
        return self.a_size + j

    def edge_vertices(self, edge: tuple[int, int, int]) -> tuple[int, int]:
        a, b, _ = edge
        return (a, self.a_size + b)

    # -- cached lookups -------------------------------------------------------

    @cached_property
    def colours(self) -> frozenset[int]:
        return frozenset(c for _, _, c in self.edges)

    @cached_property
    def colour_of(self) -> dict[tuple[int, int], int]:
        return {(a, b): c for a, b, c in self.edges}

    @cached_property
    def colour_classes(self) -> dict[int, tuple[tuple[int, int], ...]]:
        out: dict[int, list[tuple[int, int]]] = {}
        for a, b, c in self.edges:
            out.setdefault(c, []).append((a, b))
        return {c: tuple(v) for c, v in out.items()}

    @cached_property
    def at_a(self) -> tuple[dict[int, int], ...]:
        """at_a[i][c] = the B-endpoint of the colour-c edge at A-vertex i."""
        out: list[dict[int, int]] = [dict() for _ in range(self.a_size)]
        for a, b, c in self.edges:
            out[a][c] = b
        return tuple(out)

    @cached_property
    def at_b(self) -> tuple[dict[int, int], ...]:
        """at_b[j][c] = the A-endpoint of the colour-c edge at B-vertex j."""
        out: list[dict[int, int]] = [dict() for _ in range(self.b_size)]
        for a, b, c in self.edges:
            out[b][c] = a
        return tuple(out)

    @cached_property
    def adj_a(self) -> tuple[dict[int, int], ...]:
        """adj_a[i][b] = colour of edge (i, b)."""
        out: list[dict[int, int]] = [dict() for _ in range(self.a_size)]
        for a, b, c in self.edges:
            out[a][b] = c
        return tuple(out)

    @cached_property
    def adj_b(self) -> tuple[dict[int, int], ...]:
        out: list[dict[int, int]] = [dict() for _ in range(self.b_size)]
        for a, b, c in self.edges:
            out[b][a] = c
        return tuple(out)

    @property
    def is_complete(self) -> bool:
        return len(self.edges) == self.a_size * self.b_size


@dataclass(frozen=True)
class RainbowMatching:
    """A matching in a host graph whose edge colours are pairwise distinct."""

    edges: tuple[tuple[int, int, int], ...]
    host: ColouredBipartiteGraph = field(repr=False)

    @classmethod
    def build(
        cls,
        host: ColouredBipartiteGraph,
        edges: Iterable[tuple[int, int, int]],
    ) -> "RainbowMatching":
        edge_list = tuple(sorted(tuple(e) for e in edges))
        a_used: set[int] = set()
        b_used: set[int] = set()
        c_used: set[int] = set()
        for a, b, c in edge_list:
            if host.colour_of.get((a, b)) != c:
                raise ValueError(f"edge ({a},{b},{c}) is not in the host graph")
            if a in a_used or b in b_used:
                raise ValueError(f"matching edges collide at ({a},{b})")
            if c in c_used:
                raise ValueError(f"colour {c} repeats in matching")
            a_used.add(a)
            b_used.add(b)
            c_used.add(c)
        return cls(edges=edge_list, host=host)

    def __len__(self) -> int:
        return len(self.edges)

    def colour_set(self) -> frozenset[int]:
        return frozenset(c for _, _, c in self.edges)

    def vertex_set(self) -> frozenset[int]:
        vs: set[int] = set()
        for e in self.edges:
            vs.update(self.host.edge_vertices(e))
        return frozenset(vs)


@dataclass(frozen=True)
class Transversal:
    """Cells of a Latin array sharing no row, column, or symbol."""

    cells: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class ValidationReport:
    proper: bool
    improper_pairs: tuple[tuple[tuple[int, int, int], tuple[int, int, int]], ...]
    parallel_pairs: tuple[tuple[int, int], ...]
    colour_counts: tuple[tuple[int, int], ...]
    degrees_a: tuple[int, ...]
    degrees_b: tuple[int, ...]


def latin_to_graph(square: LatinArray) -> ColouredBipartiteGraph:
    """One vertex per row and per column; the edge (i, j) takes the symbol of
    cell (i, j) as its colour.  Empty cells contribute no edge.  Row and
    column uniqueness of symbols is exactly properness of the colouring."""
    n = square.order
    edges = [
        (i, j, s)
        for i, row in enumerate(square.cells)
        for j, s in enumerate(row)
        if s is not None
    ]
    return ColouredBipartiteGraph.build(n, n, edges)


def graph_to_latin(graph: ColouredBipartiteGraph) -> LatinArray:
    """Inverse of latin_to_graph for complete square hosts; symbol ids are the
    colour ids verbatim (identity relabelling)."""
    if graph.a_size != graph.b_size:
        raise ValueError("graph classes differ in size")
    if not graph.is_complete:
        raise ValueError("graph is not complete bipartite")
    n = graph.a_size
    cells: list[list[int | None]] = [[None] * n for _ in range(n)]
    for a, b, c in graph.edges:
        cells[a][b] = c
    return LatinArray.from_cells(cells)


def matching_to_transversal(m: RainbowMatching, square: LatinArray) -> Transversal:
    """Read a rainbow matching of G(square) back as a set of cells."""
    n = square.order
    if m.host.a_size != n or m.host.b_size != n:
        raise ValueError("matching host does not have the square's dimensions")
    for a, b, c in m.edges:
        if square.cells[a][b] != c:
            raise ValueError(f"matching edge ({a},{b},{c}) disagrees with cell ({a},{b})")
    return Transversal(cells=tuple(sorted((a, b) for a, b, _ in m.edges)))


def validate(graph: ColouredBipartiteGraph) -> ValidationReport:
    """Structural audit.  The ColouredBipartiteGraph constructor already
    rejects violations, so this reports on graphs assembled by other means
    as well (it only trusts the raw edge list)."""
    by_a: dict[tuple[int, int], tuple[int, int, int]] = {}
    by_b: dict[tuple[int, int], tuple[int, int, int]] = {}
    pairs: set[tuple[int, int]] = set()
    improper: list[tuple[tuple[int, int, int], tuple[int, int, int]]] = []
    parallel: list[tuple[int, int]] = []
    counts: dict[int, int] = {}
    deg_a = [0] * graph.a_size
    deg_b = [0] * graph.b_size
    for e in graph.edges:
        a, b, c = e
        if (a, b) in pairs:
            parallel.append((a, b))
        pairs.add((a, b))
        if (a, c) in by_a:
            improper.append((by_a[(a, c)], e))
        else:
            by_a[(a, c)] = e
        if (b, c) in by_b:
            improper.append((by_b[(b, c)], e))
        else:
            by_b[(b, c)] = e
        counts[c] = counts.get(c, 0) + 1
        deg_a[a] += 1
        deg_b[b] += 1
    return ValidationReport(
        proper=not improper and not parallel,
        improper_pairs=tuple(improper),
        parallel_pairs=tuple(parallel),
        colour_counts=tuple(sorted(counts.items())),
        degrees_a=tuple(deg_a),
        degrees_b=tuple(deg_b),
    )


# -- JSON interchange ---------------------------------------------------------
# Field order is fixed so that serialization is byte-identical across runs.


def latin_to_json(square: LatinArray) -> str:
    cells = [[s for s in row] for row in square.cells]
    return json.dumps({"n": square.order, "cells": cells}, separators=(", ", ": "))


def latin_from_json(text: str) -> LatinArray:
    data = json.loads(text)
    if set(data) != {"n", "cells"}:
        raise ValueError("expected keys 'n' and 'cells'")
    arr = LatinArray.from_cells(data["cells"])
    if arr.order != data["n"]:
        raise ValueError("declared order disagrees with the grid")
    return arr


def graph_to_json(graph: ColouredBipartiteGraph) -> str:
    edges = [[a, b, c] for a, b, c in graph.edges]
    return json.dumps(
        {"a": graph.a_size, "b": graph.b_size, "edges": edges},
        separators=(", ", ": "),
    )


def graph_from_json(text: str) -> ColouredBipartiteGraph:
    data = json.loads(text)
    if set(data) != {"a", "b", "edges"}:
        raise ValueError("expected keys 'a', 'b', and 'edges'")
    return ColouredBipartiteGraph.build(
        data["a"], data["b"], [tuple(e) for e in data["edges"]]
    )

"""Latin arrays, coloured bipartite graphs, and the dictionary between them."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tvl.constructions import cyclic, group_table, random_latin_square
from tvl.core import (
    ColouredBipartiteGraph,
    LatinArray,
    RainbowMatching,
    graph_from_json,
    graph_to_json,
    graph_to_latin,
    latin_from_json,
    latin_to_graph,
    latin_to_json,
    matching_to_transversal,
    validate,
)

from conftest import cyclic_graph, random_square_graph


# -- LatinArray ---------------------------------------------------------------


def test_from_cells_accepts_partial_grid():
    arr = LatinArray.from_cells([[0, None], [None, 0]])
    assert arr.order == 2
    assert arr.symbol_count == 1
    assert not arr.is_latin_square


def test_from_cells_rejects_row_repeat():
    with pytest.raises(ValueError, match="repeats in row"):
        LatinArray.from_cells([[0, 0], [1, None]])


def test_from_cells_rejects_column_repeat():
    with pytest.raises(ValueError, match="repeats in column"):
        LatinArray.from_cells([[0, 1], [0, None]])


def test_from_cells_rejects_non_square():
    with pytest.raises(ValueError, match="not square"):
        LatinArray.from_cells([[0, 1], [1]])
    with pytest.raises(ValueError, match="empty"):
        LatinArray.from_cells([])


def test_from_cells_rejects_bad_symbols():
    with pytest.raises(ValueError):
        LatinArray.from_cells([[-1, 0], [0, None]])


def test_is_latin_square_symbol_count_rule():
    assert LatinArray.from_cells([[0, 1], [1, 0]]).is_latin_square
    # filled with 2 distinct symbols counts as a square even off {0..n-1}
    arr = LatinArray.from_cells([[0, 5], [5, 0]])
    assert arr.symbol_count == 2
    assert arr.is_latin_square


def test_symbols():
    arr = LatinArray.from_cells([[2, None], [None, 7]])
    assert arr.symbols() == {2, 7}


# -- graph construction -------------------------------------------------------


def test_build_rejects_colour_repeat_at_a_vertex():
    with pytest.raises(ValueError, match="repeats at A-vertex"):
        ColouredBipartiteGraph.build(2, 2, [(0, 0, 3), (0, 1, 3)])


def test_build_rejects_colour_repeat_at_b_vertex():
    with pytest.raises(ValueError, match="repeats at B-vertex"):
        ColouredBipartiteGraph.build(2, 2, [(0, 1, 3), (1, 1, 3)])


def test_build_rejects_parallel_edges():
    with pytest.raises(ValueError, match="parallel"):
        ColouredBipartiteGraph.build(2, 2, [(0, 0, 1), (0, 0, 2)])


def test_build_rejects_out_of_range():
    with pytest.raises(ValueError, match="out of range"):
        ColouredBipartiteGraph.build(2, 2, [(0, 2, 1)])
    with pytest.raises(ValueError, match="negative colour"):
        ColouredBipartiteGraph.build(2, 2, [(0, 0, -1)])


def test_flattened_vertex_ids():
    g = cyclic_graph(4)
    assert g.n_vertices == 8
    assert g.a_vertex(2) == 2
    assert g.b_vertex(2) == 6
    assert g.edge_vertices((1, 3, 0)) == (1, 7)


def test_adjacency_tables_agree_with_edge_list():
    g = random_square_graph(6, seed=3)
    for a, b, c in g.edges:
        assert g.adj_a[a][b] == c
        assert g.adj_b[b][a] == c
        assert g.at_a[a][c] == b
        assert g.at_b[b][c] == a
        assert g.colour_of[(a, b)] == c
        assert (a, b) in g.colour_classes[c]
    total = sum(len(cls) for cls in g.colour_classes.values())
    assert total == len(g.edges)
    assert g.is_complete


def test_colour_count_matches_distinct_colours():
    g = ColouredBipartiteGraph.build(2, 2, [(0, 0, 4), (0, 1, 9), (1, 0, 9), (1, 1, 4)])
    assert g.colour_count == 2
    assert g.colours == frozenset({4, 9})
    assert g.is_complete


# -- square <-> graph dictionary ----------------------------------------------


def test_latin_to_graph_round_trip_on_group_table():
    sq = group_table(cyclic(5))
    g = latin_to_graph(sq)
    assert g.a_size == g.b_size == 5
    assert len(g.edges) == 25
    back = graph_to_latin(g)
    assert back.cells == sq.cells


def test_partial_array_maps_to_partial_graph():
    arr = LatinArray.from_cells([[0, None], [None, 0]])
    g = latin_to_graph(arr)
    assert len(g.edges) == 2
    assert not g.is_complete
    with pytest.raises(ValueError, match="not complete"):
        graph_to_latin(g)


def test_graph_to_latin_requires_square_shape():
    g = ColouredBipartiteGraph.build(1, 2, [(0, 0, 0), (0, 1, 1)])
    with pytest.raises(ValueError, match="classes differ"):
        graph_to_latin(g)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(min_value=1, max_value=7), seed=st.integers(min_value=0, max_value=10**6))
def test_random_square_graph_round_trip(n, seed):
    sq = random_latin_square(n, seed=seed)
    back = graph_to_latin(latin_to_graph(sq))
    assert back.cells == sq.cells


# -- rainbow matchings and transversals ---------------------------------------


def test_rainbow_matching_build_accepts_valid():
    g = cyclic_graph(5)
    m = RainbowMatching.build(g, [(0, 0, 0), (1, 1, 2), (2, 2, 4)])
    assert len(m) == 3
    assert m.colour_set() == frozenset({0, 2, 4})
    assert m.vertex_set() == frozenset({0, 1, 2, 5, 6, 7})


def test_rainbow_matching_rejects_foreign_edge():
    g = cyclic_graph(5)
    with pytest.raises(ValueError, match="not in the host"):
        RainbowMatching.build(g, [(0, 0, 3)])


def test_rainbow_matching_rejects_vertex_collision():
    g = cyclic_graph(5)
    with pytest.raises(ValueError, match="collide"):
        RainbowMatching.build(g, [(0, 0, 0), (0, 1, 1)])


def test_rainbow_matching_rejects_colour_repeat():
    g = cyclic_graph(5)
    with pytest.raises(ValueError, match="colour 0 repeats"):
        RainbowMatching.build(g, [(0, 0, 0), (1, 4, 0)])


def test_matching_to_transversal():
    sq = group_table(cyclic(5))
    g = latin_to_graph(sq)
    m = RainbowMatching.build(g, [(0, 0, 0), (1, 1, 2), (2, 2, 4), (3, 3, 1), (4, 4, 3)])
    t = matching_to_transversal(m, sq)
    assert len(t) == 5
    # cells hit every row, column, and symbol once
    assert {r for r, _ in t.cells} == set(range(5))
    assert {c for _, c in t.cells} == set(range(5))
    assert {sq.cells[r][c] for r, c in t.cells} == set(range(5))


def test_matching_to_transversal_rejects_wrong_square():
    sq5 = group_table(cyclic(5))
    sq7 = group_table(cyclic(7))
    g = latin_to_graph(sq5)
    m = RainbowMatching.build(g, [(0, 0, 0)])
    with pytest.raises(ValueError, match="dimensions"):
        matching_to_transversal(m, sq7)
    # right dimensions, wrong cells
    other = LatinArray.from_cells([[(i + 2 * j) % 5 for j in range(5)] for i in range(5)])
    m2 = RainbowMatching.build(g, [(0, 1, 1)])
    with pytest.raises(ValueError, match="disagrees"):
        matching_to_transversal(m2, other)


# -- structural audit ---------------------------------------------------------


def test_validate_clean_graph():
    rep = validate(cyclic_graph(4))
    assert rep.proper
    assert rep.improper_pairs == ()
    assert rep.parallel_pairs == ()
    assert rep.degrees_a == (4, 4, 4, 4)
    assert dict(rep.colour_counts) == {c: 4 for c in range(4)}


def test_validate_flags_smuggled_improperness():
    # bypass the checked constructor on purpose
    bad = ColouredBipartiteGraph(
        a_size=2, b_size=2, edges=((0, 0, 1), (0, 1, 1)), colour_count=1
    )
    rep = validate(bad)
    assert not rep.proper
    assert len(rep.improper_pairs) == 1


def test_validate_flags_parallel_edges():
    bad = ColouredBipartiteGraph(
        a_size=1, b_size=1, edges=((0, 0, 0), (0, 0, 1)), colour_count=2
    )
    rep = validate(bad)
    assert not rep.proper
    assert rep.parallel_pairs == ((0, 0),)


# -- JSON ---------------------------------------------------------------------


def test_latin_json_round_trip():
    sq = random_latin_square(5, seed=9)
    text = latin_to_json(sq)
    assert latin_from_json(text).cells == sq.cells
    data = json.loads(text)
    assert set(data) == {"n", "cells"}


def test_latin_json_is_stable():
    sq = group_table(cyclic(3))
    assert latin_to_json(sq) == latin_to_json(sq)


def test_latin_from_json_rejects_bad_payloads():
    with pytest.raises(ValueError, match="expected keys"):
        latin_from_json('{"cells": [[0]]}')
    with pytest.raises(ValueError, match="declared order"):
        latin_from_json('{"n": 2, "cells": [[0]]}')


def test_graph_json_round_trip():
    g = random_square_graph(4, seed=2)
    g2 = graph_from_json(graph_to_json(g))
    assert g2 == g


def test_graph_json_partial_host():
    g = ColouredBipartiteGraph.build(3, 2, [(0, 0, 5), (2, 1, 5)])
    g2 = graph_from_json(graph_to_json(g))
    assert g2.a_size == 3 and g2.b_size == 2
    assert g2.edges == g.edges


def test_graph_from_json_rejects_bad_keys():
    with pytest.raises(ValueError, match="expected keys"):
        graph_from_json('{"a": 1, "edges": []}')

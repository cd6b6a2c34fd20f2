"""Exact and heuristic rainbow-matching solvers against permutation oracles."""

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tvl.constructions import (
    cyclic,
    group_table,
    random_latin_square,
    random_maillet_spec,
    maillet_blowup,
)
from tvl.core import ColouredBipartiteGraph, RainbowMatching, latin_to_graph
from tvl.solvers import (
    exact_colour_set_matching,
    count_full_transversals,
    greedy_nibble_matching,
    greedy_rainbow_matching,
    local_switch_augment,
    max_rainbow_matching_exact,
    max_transversal_cells,
    rare_colour_matching,
)

from conftest import cyclic_graph, random_square_graph


# -- oracles ------------------------------------------------------------------
# A complete proper host is a square, so any partial rainbow matching extends
# to a permutation without losing colours.  Maximum rainbow matching size is
# therefore the maximum, over all column permutations, of the number of
# distinct symbols read off the diagonal the permutation selects.


def perm_rainbow_max(cells) -> int:
    n = len(cells)
    best = 0
    for sigma in itertools.permutations(range(n)):
        got = len({cells[i][sigma[i]] for i in range(n)})
        if got > best:
            best = got
            if best == n:
                return n
    return best


def perm_full_count(cells) -> int:
    n = len(cells)
    return sum(
        1
        for sigma in itertools.permutations(range(n))
        if len({cells[i][sigma[i]] for i in range(n)}) == n
    )


def brute_exact_colour_matching(graph, vertices, colour_set):
    """All |colour_set|-subsets of edges, filtered to matchings that use
    exactly the given colours and cover exactly the given vertices."""
    k = len(colour_set)
    hits = []
    for combo in itertools.combinations(graph.edges, k):
        if {c for _, _, c in combo} != set(colour_set):
            continue
        a_used = [a for a, _, _ in combo]
        b_used = [b for _, b, _ in combo]
        if len(set(a_used)) < k or len(set(b_used)) < k:
            continue
        covered = {graph.a_vertex(a) for a in a_used} | {
            graph.b_vertex(b) for b in b_used
        }
        if covered == set(vertices):
            hits.append(combo)
    return hits


def check_valid_matching(graph, matching: RainbowMatching) -> None:
    RainbowMatching.build(graph, matching.edges)  # revalidates everything


# -- exact solver -------------------------------------------------------------


def test_exact_matches_permutation_oracle_on_cyclic_tables():
    for n in range(2, 7):
        sq = group_table(cyclic(n))
        res = max_rainbow_matching_exact(latin_to_graph(sq))
        assert res.optimal
        assert res.size == perm_rainbow_max(sq.cells)
        assert len(res.witness) == res.size


def test_exact_matches_permutation_oracle_on_random_squares():
    for n in (4, 5, 6):
        for seed in range(4):
            sq = random_latin_square(n, seed=seed)
            g = latin_to_graph(sq)
            res = max_rainbow_matching_exact(g)
            assert res.size == perm_rainbow_max(sq.cells)
            check_valid_matching(g, res.witness)


def test_exact_on_maillet_blowup():
    sq = maillet_blowup(random_maillet_spec(cyclic(2), 3, seed=0))
    res = max_rainbow_matching_exact(latin_to_graph(sq))
    assert res.size == perm_rainbow_max(sq.cells) == 5


def test_cyclic_even_orders_top_out_one_short():
    for n in (2, 4, 6, 8):
        res = max_rainbow_matching_exact(cyclic_graph(n))
        assert res.optimal and res.size == n - 1


def test_cyclic_odd_orders_reach_full():
    for n in (3, 5, 7, 9):
        res = max_rainbow_matching_exact(cyclic_graph(n))
        assert res.optimal and res.size == n


def test_budget_cuts_off_with_optimal_flag_down():
    g = cyclic_graph(8)
    res = max_rainbow_matching_exact(g, budget=5)
    assert not res.optimal
    assert res.size <= 7
    assert res.explored_nodes >= 5  # stopped by the budget, not by exhaustion


def test_exact_on_partial_host():
    # drop one edge from the odd cyclic table: still full (n is odd, one
    # missing edge leaves another full transversal)
    g = cyclic_graph(5)
    edges = [e for e in g.edges if e != (0, 0, 0)]
    res = max_rainbow_matching_exact(ColouredBipartiteGraph.build(5, 5, edges))
    assert res.size == 5


# -- transversal counting -----------------------------------------------------


def test_count_full_transversals_matches_oracle_small():
    for n in (3, 4, 5):
        for seed in range(3):
            sq = random_latin_square(n, seed=seed)
            assert count_full_transversals(sq.cells) == perm_full_count(sq.cells)


def test_count_full_transversals_frozen_cyclic_values():
    # verified against perm_full_count (n = 3, 5 directly; 7 by one-off run)
    assert count_full_transversals(group_table(cyclic(3)).cells) == 3
    assert count_full_transversals(group_table(cyclic(5)).cells) == 15
    assert count_full_transversals(group_table(cyclic(7)).cells) == 133
    # even cyclic orders have none at all
    assert count_full_transversals(group_table(cyclic(4)).cells) == 0
    assert count_full_transversals(group_table(cyclic(6)).cells) == 0


def test_count_full_transversals_guards():
    with pytest.raises(ValueError, match="cap"):
        count_full_transversals(group_table(cyclic(13)).cells)
    with pytest.raises(ValueError, match="fully filled"):
        count_full_transversals(((0, None), (None, 0)))


def test_max_transversal_cells_agrees_with_graph_solver():
    for n, seed in ((5, 0), (6, 1), (7, 2)):
        sq = random_latin_square(n, seed=seed)
        graph_size = max_rainbow_matching_exact(latin_to_graph(sq)).size
        assert max_transversal_cells(sq.cells) == graph_size
        assert max_transversal_cells(sq.cells, stop_at=2) >= 2


# -- heuristics ---------------------------------------------------------------


def test_greedy_is_a_maximal_rainbow_matching():
    g = random_square_graph(8, seed=1)
    m = greedy_rainbow_matching(g)
    check_valid_matching(g, m)
    used_a = {a for a, _, _ in m.edges}
    used_b = {b for _, b, _ in m.edges}
    used_c = m.colour_set()
    for a, b, c in g.edges:
        assert a in used_a or b in used_b or c in used_c


def test_nibble_is_valid_and_seed_deterministic():
    g = random_square_graph(9, seed=4)
    m1 = greedy_nibble_matching(g, bite_fraction=0.2, seed=7)
    m2 = greedy_nibble_matching(g, bite_fraction=0.2, seed=7)
    m3 = greedy_nibble_matching(g, bite_fraction=0.2, seed=8)
    check_valid_matching(g, m1)
    assert m1.edges == m2.edges
    check_valid_matching(g, m3)
    exact = max_rainbow_matching_exact(g).size
    assert len(m1) <= exact


def test_nibble_rejects_bad_bite():
    g = cyclic_graph(5)
    with pytest.raises(ValueError):
        greedy_nibble_matching(g, bite_fraction=0.0, seed=0)
    with pytest.raises(ValueError):
        greedy_nibble_matching(g, bite_fraction=1.5, seed=0)


def test_local_switch_augment_never_shrinks_and_can_finish():
    g = cyclic_graph(7)
    start = greedy_nibble_matching(g, bite_fraction=0.3, seed=2)
    out = local_switch_augment(g, start, rounds=200, seed=0)
    check_valid_matching(g, out)
    assert len(out) >= len(start)
    assert len(out) == 7  # odd cyclic tables always complete


def test_local_switch_augment_on_random_square():
    g = random_square_graph(8, seed=6)
    start = greedy_rainbow_matching(g)
    out = local_switch_augment(g, start, rounds=300, seed=1)
    assert len(out) >= len(start)
    assert len(out) <= max_rainbow_matching_exact(g).size


# -- exact-colour-set matching ------------------------------------------------


def test_exact_colour_set_matching_agrees_with_brute_force():
    g = random_square_graph(5, seed=3)
    rng = random.Random(0)
    for _ in range(12):
        colours = frozenset(rng.sample(sorted(g.colours), 3))
        a_pick = rng.sample(range(5), 3)
        b_pick = rng.sample(range(5), 3)
        vertices = frozenset(
            [g.a_vertex(a) for a in a_pick] + [g.b_vertex(b) for b in b_pick]
        )
        got = exact_colour_set_matching(g, vertices, colours)
        hits = brute_exact_colour_matching(g, vertices, colours)
        if got is None:
            assert hits == []
        else:
            assert sorted(got) in [sorted(h) for h in hits]


def test_exact_colour_set_matching_positive_case():
    g = cyclic_graph(5)
    m = [(0, 0, 0), (1, 1, 2), (2, 2, 4)]
    vertices = frozenset([0, 1, 2, 5, 6, 7])
    got = exact_colour_set_matching(g, vertices, frozenset({0, 2, 4}))
    assert got is not None
    assert {c for _, _, c in got} == {0, 2, 4}


def test_exact_colour_set_matching_infeasible_cases():
    g = cyclic_graph(5)
    # vertex set of odd size cannot be covered by a matching
    assert exact_colour_set_matching(g, frozenset({0, 1, 5}), frozenset({0, 1})) is None
    # colours that cannot cover those vertices
    assert (
        exact_colour_set_matching(g, frozenset({0, 1, 5, 6}), frozenset({0, 3})) is None
    )


# -- rare-colour matchings ----------------------------------------------------


def rare_colour_instance(seed: int, n: int = 500, matchings: int = 5, colours_per: int = 100):
    """Union of `matchings` pairwise disjoint perfect matchings; each one is
    cut into `colours_per` colour classes of n // colours_per edges."""
    rng = random.Random(seed)
    alpha = list(range(n))
    beta = list(range(n))
    rng.shuffle(alpha)
    rng.shuffle(beta)
    span = n // colours_per
    edges = []
    colour = 0
    for m in range(matchings):
        pairs = [(alpha[i], beta[(i + m) % n]) for i in range(n)]
        rng.shuffle(pairs)
        for c in range(colours_per):
            for a, b in pairs[c * span : (c + 1) * span]:
                edges.append((a, b, colour))
            colour += 1
    return ColouredBipartiteGraph.build(n, n, edges)


def test_rare_colour_matching_hits_the_degree_bound():
    g = rare_colour_instance(0)
    m = rare_colour_matching(g, d=5)
    check_valid_matching(g, m)
    assert len(m) >= 9  # ceil(1.8 * d)


def test_rare_colour_matching_guards():
    g = ColouredBipartiteGraph.build(2, 1, [(0, 0, 0)])
    with pytest.raises(ValueError, match="equal side"):
        rare_colour_matching(g, d=1)
    with pytest.raises(ValueError):
        rare_colour_matching(cyclic_graph(3), d=0)


# -- property-based sweep -----------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(n=st.integers(min_value=2, max_value=6), seed=st.integers(min_value=0, max_value=10**6))
def test_solver_chain_is_consistent(n, seed):
    sq = random_latin_square(n, seed=seed)
    g = latin_to_graph(sq)
    exact = max_rainbow_matching_exact(g)
    greedy = greedy_rainbow_matching(g)
    assert len(greedy) <= exact.size <= n
    assert exact.size >= n - 1  # verified exhaustively for orders up to 5
    better = local_switch_augment(g, greedy, rounds=50, seed=0)
    assert len(greedy) <= len(better) <= exact.size

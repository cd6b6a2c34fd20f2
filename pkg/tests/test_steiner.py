"""Triple systems, tripartite reductions, and the disjoint-triples pipeline."""

import itertools
import json

import pytest

from tvl.core import ColouredBipartiteGraph, RainbowMatching, validate
from tvl.steiner import (
    BrouwerReport,
    PipelineConfig,
    TripleSystem,
    bose_sts,
    brouwer_pipeline,
    matching_from_rainbow,
    sts_from_json,
    sts_to_json,
    tripartition_reduce,
)


@pytest.fixture(scope="module")
def s9():
    return bose_sts(3)


@pytest.fixture(scope="module")
def s15():
    return bose_sts(5)


def cyclic_sts13() -> TripleSystem:
    # classic difference construction: base blocks {0,1,4} and {0,2,7} mod 13
    triples = []
    for i in range(13):
        triples.append([(i + d) % 13 for d in (0, 1, 4)])
        triples.append([(i + d) % 13 for d in (0, 2, 7)])
    return TripleSystem.build(13, triples)


def all_rainbow_matchings(graph: ColouredBipartiteGraph):
    """Every rainbow matching of a small graph, the empty one included."""
    out = []
    edges = list(graph.edges)
    for k in range(len(edges) + 1):
        for combo in itertools.combinations(edges, k):
            rows = [a for a, _, _ in combo]
            cols = [b for _, b, _ in combo]
            colours = [c for *_, c in combo]
            if (
                len(set(rows)) == len(combo)
                and len(set(cols)) == len(combo)
                and len(set(colours)) == len(combo)
            ):
                out.append(RainbowMatching.build(graph, combo))
    return out


def max_disjoint_triples(s: TripleSystem) -> int:
    ts = [tuple(sorted(t)) for t in s.triples]
    for k in range(s.n // 3, 0, -1):
        for combo in itertools.combinations(ts, k):
            pts: set[int] = set()
            if all(not (pts & set(t)) and not pts.update(t) for t in combo):
                return k
    return 0


# -- constructions ------------------------------------------------------------


def test_construction_sizes(s9, s15):
    assert len(s9.triples) == 12 and s9.n == 9
    assert len(s15.triples) == 35 and s15.n == 15
    s9.validate()
    s15.validate()
    assert len(bose_sts(7).triples) == 70


def test_construction_guards():
    with pytest.raises(ValueError, match="odd m"):
        bose_sts(4)
    with pytest.raises(ValueError, match="odd m"):
        bose_sts(1)


def test_cyclic_order13_system():
    s = cyclic_sts13()
    assert len(s.triples) == 26  # n(n-1)/6
    s.validate()


def test_system_validation_errors(s9):
    triples = [tuple(sorted(t)) for t in s9.triples]
    with pytest.raises(ValueError, match="not 1 or 3 mod 6"):
        TripleSystem.build(8, [(0, 1, 2)])
    with pytest.raises(ValueError, match="expected 12"):
        TripleSystem.build(9, triples[:-1])
    with pytest.raises(ValueError, match="covered twice"):
        TripleSystem.build(9, triples[:-1] + [triples[0]])
    with pytest.raises(ValueError, match="bad triple"):
        TripleSystem.build(9, triples[:-1] + [(0, 1, 99)])


def test_json_round_trip(s15):
    text = sts_to_json(s15)
    payload = json.loads(text)
    assert payload["n"] == 15 and len(payload["triples"]) == 35
    back = sts_from_json(text)
    assert back.triple_set == s15.triple_set


# -- reductions ---------------------------------------------------------------


def test_reduction_reads_off_crossing_triples(s9):
    graph, partition = tripartition_reduce(s9, seed=0)
    part_a, part_b, part_c = partition
    assert sorted(len(p) for p in partition) == sorted((1, 7, 1))
    assert validate(graph).proper
    # every edge pulls back to a genuine triple with one point per part
    for a, b, c in graph.edges:
        assert frozenset((part_a[a], part_b[b], part_c[c])) in s9.triple_set


def test_balanced_reduction(s15):
    graph, partition = tripartition_reduce(s15, seed=3, balanced=True)
    assert [len(p) for p in partition] == [5, 5, 5]
    assert graph.a_size == graph.b_size == 5


def test_reduction_drops_a_point_when_order_is_1_mod_6():
    s = cyclic_sts13()
    graph, partition = tripartition_reduce(s, seed=1, balanced=True)
    covered = set(partition[0]) | set(partition[1]) | set(partition[2])
    assert covered == set(range(12))  # the highest label is deleted
    assert [len(p) for p in partition] == [4, 4, 4]


def test_balanced_rate_matches_multinomial(s15):
    # P(three equal parts of 15 points) = C(15;5,5,5) / 3^15
    expected = 756756 / 14348907
    draws = 10_000
    hits = 0
    for seed in range(draws):
        _, partition = tripartition_reduce(s15, seed=seed)
        if len(partition[0]) == len(partition[1]) == len(partition[2]):
            hits += 1
    rate = hits / draws
    sigma = (expected * (1 - expected) / draws) ** 0.5
    assert abs(rate - expected) <= 3 * sigma


# -- pull-back ----------------------------------------------------------------


def test_pullback_soundness_exhaustive(s9):
    ceiling = max_disjoint_triples(s9)
    assert ceiling == 3
    for seed in range(6):
        graph, partition = tripartition_reduce(s9, seed=seed)
        for matching in all_rainbow_matchings(graph):
            triples = matching_from_rainbow(s9, matching, partition)
            assert len(triples) == len(matching.edges) <= ceiling
            pts: set[int] = set()
            for t in triples:
                assert frozenset(t) in s9.triple_set
                assert not pts & set(t)
                pts |= set(t)


def test_pullback_rejects_foreign_edges(s9):
    host = ColouredBipartiteGraph.build(1, 1, [(0, 0, 0)])
    matching = RainbowMatching.build(host, [(0, 0, 0)])
    # {0, 1, 2} is not a triple of this system
    with pytest.raises(ValueError, match="does not come from a triple"):
        matching_from_rainbow(s9, matching, ((0,), (1,), (2,)))


def test_pullback_rejects_overlapping_triples(s9):
    host = ColouredBipartiteGraph.build(2, 2, [(0, 0, 0), (1, 1, 1)])
    matching = RainbowMatching.build(host, [(0, 0, 0), (1, 1, 1)])
    # a degenerate partition maps both edges onto the same triple
    partition = ((0, 0), (7, 7), (8, 8))
    with pytest.raises(ValueError, match="overlap"):
        matching_from_rainbow(s9, matching, partition)


# -- pipeline -----------------------------------------------------------------


def test_pipeline_order9(s9):
    rep = brouwer_pipeline(s9, seeds=10)
    assert rep.best_size == 3
    assert rep.best_seed == 0
    assert rep.target == 2 and rep.achieved
    assert rep.best_triples == ((0, 7, 8), (1, 2, 3), (4, 5, 6))
    # seed 0 is already perfect, so the scan stops there
    assert len(rep.outcomes) == 1 and rep.outcomes[0].optimal


def test_pipeline_order15(s15):
    rep = brouwer_pipeline(s15, seeds=12)
    assert rep.best_size == 4
    assert rep.best_seed == 2
    assert rep.target == 4 and rep.achieved
    assert len(rep.outcomes) == 12  # nothing perfect: no early stop
    for o in rep.outcomes:
        assert o.part_sizes == (5, 5, 5)
        assert o.matching_size <= 5


def test_pipeline_order21_stops_at_perfect():
    rep = brouwer_pipeline(bose_sts(7), seeds=12)
    assert rep.best_size == 7
    assert rep.best_seed == 7
    assert rep.target == 6 and rep.achieved
    assert len(rep.outcomes) == 8  # early stop after the perfect seed


def test_pipeline_threads_reproduce(s15):
    rep = brouwer_pipeline(s15, seeds=12, config=PipelineConfig(threads=3))
    assert (rep.best_size, rep.best_seed) == (4, 2)


def test_report_json_shape(s9):
    rep = brouwer_pipeline(s9, seeds=10)
    d = rep.to_json_dict()
    assert set(d) == {
        "n",
        "target",
        "best_size",
        "best_seed",
        "achieved",
        "best_triples",
        "seeds",
    }
    assert d["best_triples"] == [[0, 7, 8], [1, 2, 3], [4, 5, 6]]
    assert d["seeds"][0] == {
        "seed": 0,
        "part_sizes": list(rep.outcomes[0].part_sizes),
        "size": 3,
        "optimal": True,
    }

"""Weight thresholds, colour-class extraction, and the exchange game."""

import math

import pytest

from tvl.classes import ClassifierConfig, ExchangeParams, classify_colours, quantile_config
from tvl.classes import test_pair_exchangeable as pair_exchangeable
from tvl.switchers import SwitcherWeights, weight_matrix

from conftest import cyclic_graph, random_square_graph


def synthetic_weights(pairs: dict) -> SwitcherWeights:
    return SwitcherWeights(pair_weights=dict(pairs), null_pairs=0, cycle_count=0)


# -- configuration ------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError, match="0 <= w0"):
        ClassifierConfig(w0=5, w1=3, w2=10, band_count=2)
    with pytest.raises(ValueError, match="band_count"):
        ClassifierConfig(w0=0, w1=1, w2=2, band_count=0)
    with pytest.raises(ValueError, match="reach down"):
        ClassifierConfig(w0=0, w1=1, w2=100, band_count=2)


def test_band_bounds_tile_the_moderate_range():
    cfg = ClassifierConfig(w0=1, w1=3, w2=48, band_count=4)
    bounds = [cfg.band_bounds(i) for i in range(4)]
    assert bounds[0][1] == 48.0
    # upper edges halve; lower edge of the last band is clamped at w1
    for (lo, hi), (lo2, hi2) in zip(bounds, bounds[1:]):
        assert hi2 == hi / 2 == lo
    assert bounds[-1][0] == 3
    with pytest.raises(ValueError):
        cfg.band_bounds(4)


def test_quantile_config_on_known_distribution():
    weights = synthetic_weights({(0, i + 1): w for i, w in enumerate(range(1, 21))})
    cfg = quantile_config(weights)
    # thresholds sit at the rounded 50/75/95 percent ranks of 1..20
    assert cfg.w0 == 11.0
    assert cfg.w1 == 15.0
    assert cfg.w2 == 19.0
    assert cfg.band_count == math.ceil(math.log2(19 / 15))
    cfg2 = quantile_config(weights, band_count=5, multiplicity_cap=2)
    assert cfg2.band_count == 5 and cfg2.multiplicity_cap == 2


def test_quantile_config_with_no_weights():
    cfg = quantile_config(synthetic_weights({}))
    assert cfg.w0 == cfg.w1 == cfg.w2 == 0.0
    assert cfg.band_count == 1


# -- classification -----------------------------------------------------------


def test_all_heavy_weights_become_pair_classes():
    pairs = {(c, d): 100 for c in range(4) for d in range(c + 1, 4)}
    weights = synthetic_weights(pairs)
    fam = classify_colours(weights, ClassifierConfig(0, 5, 10, 1), cyclic_graph(4))
    assert len(fam.classes) == 6
    assert all(len(cls) == 2 for cls in fam.classes)
    assert all(p.kind == "heavy" for p in fam.provenance)
    assert fam.uncovered_weight == 0
    assert fam.total_weight == 600
    assert fam.equivalent(0, 3) and fam.equivalent(2, 2)


def test_group_table_weights_classify_to_nothing():
    g = cyclic_graph(7)
    fam = classify_colours(weight_matrix(g), ClassifierConfig(0, 1, 2, 1), g)
    assert fam.classes == ()
    assert fam.total_weight == 0
    assert fam.uncovered_weight == 0


def test_classification_bookkeeping_on_a_random_square():
    g = random_square_graph(7, seed=2)
    w = weight_matrix(g)
    cfg = quantile_config(w)
    fam = classify_colours(w, cfg, g)
    assert fam.total_weight == w.total()
    # covered + uncovered must tile the positive pairs exactly
    covered = 0
    for (c, d), wt in w.pair_weights.items():
        if fam.equivalent(c, d) and c != d:
            covered += wt
    assert covered + fam.uncovered_weight == fam.total_weight
    for cls, prov in zip(fam.classes, fam.provenance):
        assert len(cls) >= 2
        assert prov.kind in ("heavy", "band")
        if prov.kind == "heavy":
            assert len(cls) == 2
            c, d = sorted(cls)
            assert w.pair_weights[(c, d)] > cfg.w2
        else:
            assert 0 <= prov.band < cfg.band_count
            assert prov.class_min_degree >= prov.class_average_degree / 2
    # multiplicity counts only the larger extracted classes
    for colour, mult in fam.multiplicity.items():
        assert mult == sum(1 for cls in fam.classes if len(cls) > 2 and colour in cls)


def test_multiplicity_cap_flags_overused_colours():
    g = random_square_graph(7, seed=2)
    w = weight_matrix(g)
    cfg = quantile_config(w, multiplicity_cap=0)
    fam = classify_colours(w, cfg, g)
    overful = {c for c, m in fam.multiplicity.items() if m > 0}
    assert set(fam.cap_exceeded) == overful


# -- exchange game ------------------------------------------------------------


def test_exchange_params_validation():
    with pytest.raises(ValueError):
        ExchangeParams(epsilon=-0.1, eta=0.0, L=1, ell=4)
    with pytest.raises(ValueError):
        ExchangeParams(epsilon=0.1, eta=1.5, L=1, ell=4)
    with pytest.raises(ValueError):
        ExchangeParams(epsilon=0.1, eta=0.0, L=-1, ell=4)


def test_exchangeable_pair_on_calibrated_square():
    # order-9 random square where every colour pair admits plentiful
    # switchers at these forbidden-set sizes
    g = random_square_graph(9, seed=5)
    params = ExchangeParams(epsilon=0.05, eta=0.0, L=2, ell=4)
    for c, d in ((0, 1), (3, 7), (2, 8)):
        rep = pair_exchangeable(g, c, d, params, trials=20, seed=11)
        assert rep.all_passed
        assert rep.pass_count == 20
        assert rep.max_order_searched == 4
        for trial in rep.trials:
            assert trial.passed and trial.found_order == 4


def test_exchange_game_fails_where_no_switchers_exist():
    g = cyclic_graph(7)  # group table: no proper switchers at all
    params = ExchangeParams(epsilon=0.05, eta=0.0, L=2, ell=8)
    rep = pair_exchangeable(g, 0, 1, params, trials=5, seed=0)
    assert rep.pass_count == 0
    assert not rep.all_passed


def test_exchange_trial_witnesses_validate():
    g = random_square_graph(9, seed=5)
    params = ExchangeParams(epsilon=0.05, eta=0.0, L=2, ell=4)
    rep = pair_exchangeable(g, 0, 1, params, trials=20, seed=11)
    assert rep.params == params and (rep.c, rep.d) == (0, 1)
    for trial in rep.trials:
        assert trial.forbidden_vertex_count <= int(0.05 * g.n_vertices) + 2
        assert trial.passed == (trial.found_order is not None)
        if trial.witness is not None:
            trial.witness.validate(g)
            assert trial.witness.switch_from == 0
            assert trial.witness.switch_to == 1


def test_exchange_rejects_equal_pair():
    with pytest.raises(ValueError):
        pair_exchangeable(
            cyclic_graph(5), 2, 2, ExchangeParams(0.1, 0.0, 1, 4), trials=1, seed=0
        )

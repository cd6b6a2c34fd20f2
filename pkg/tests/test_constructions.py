"""Group tables, blow-ups, random squares, and small-order enumeration.

Brute-force oracles sit at the top; library answers are held against them
before any frozen constants appear.
"""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tvl.constructions import (
    FiniteAbelianGroup,
    abelian_groups_up_to,
    complete_mapping_exists,
    cyclic,
    default_maillet_spec,
    enumerate_latin_cells,
    group_sum_obstruction,
    group_table,
    invariant_factor_sequences,
    maillet_blowup,
    random_latin_square,
    random_maillet_spec,
    MailletSpec,
)
from tvl.core import latin_to_graph


# -- oracles ------------------------------------------------------------------


def partition_count(e: int) -> int:
    """Number of partitions of e, by the classic recurrence."""
    table = [1] + [0] * e
    for part in range(1, e + 1):
        for total in range(part, e + 1):
            table[total] += table[total - part]
    return table[e]


def abelian_count_oracle(order: int) -> int:
    """Number of abelian groups of a given order: product over prime powers
    p^e of the partition count of e."""
    count = 1
    n = order
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            count *= partition_count(e)
        p += 1
    if n > 1:
        count *= partition_count(1)
    return count


def brute_complete_mapping(group: FiniteAbelianGroup) -> bool:
    """Exhaustive search over permutations sigma of element ids for
    x -> x + sigma(x) bijective.  Usable up to order 8."""
    ids = range(group.order)
    elems = [group.element(i) for i in ids]
    for sigma in itertools.permutations(ids):
        seen = {group.index(group.add(elems[x], elems[sigma[x]])) for x in ids}
        if len(seen) == group.order:
            return True
    return False


def brute_group_sum(group: FiniteAbelianGroup) -> tuple[int, ...]:
    total = group.zero
    for i in range(group.order):
        total = group.add(total, group.element(i))
    return total


# -- finite abelian groups ----------------------------------------------------


def test_of_accepts_divisor_chains():
    assert FiniteAbelianGroup.of(2, 4).invariant_factors == (2, 4)
    assert FiniteAbelianGroup.of().order == 1
    assert cyclic(12).invariant_factors == (12,)


def test_of_rejects_non_chains():
    with pytest.raises(ValueError, match="divisor chain"):
        FiniteAbelianGroup.of(2, 3)
    with pytest.raises(ValueError, match="divisor chain"):
        FiniteAbelianGroup.of(4, 2)
    with pytest.raises(ValueError, match=">= 2"):
        FiniteAbelianGroup.of(1, 2)


def test_element_index_round_trip():
    g = FiniteAbelianGroup.of(2, 6)
    for i in range(g.order):
        assert g.index(g.element(i)) == i


@settings(max_examples=40, deadline=None)
@given(
    factors=st.sampled_from([(2,), (5,), (2, 2), (2, 4), (3, 3), (2, 6)]),
    data=st.data(),
)
def test_group_laws(factors, data):
    g = FiniteAbelianGroup.of(*factors)
    pick = st.integers(min_value=0, max_value=g.order - 1)
    x = g.element(data.draw(pick))
    y = g.element(data.draw(pick))
    z = g.element(data.draw(pick))
    assert g.add(x, y) == g.add(y, x)
    assert g.add(g.add(x, y), z) == g.add(x, g.add(y, z))
    assert g.add(x, g.zero) == x
    assert g.add(x, g.neg(x)) == g.zero
    assert g.scale(3, x) == g.add(x, g.add(x, x))


def test_sum_of_all_elements_matches_brute_force():
    for g in abelian_groups_up_to(12):
        assert g.sum_of_all_elements() == brute_group_sum(g)


def test_abelian_group_census_matches_partition_oracle():
    groups = abelian_groups_up_to(16)
    assert len(groups) == 25
    by_order: dict[int, int] = {}
    for g in groups:
        by_order[g.order] = by_order.get(g.order, 0) + 1
    for order in range(1, 17):
        assert by_order.get(order, 0) == abelian_count_oracle(order), order
    # invariant factor sequences really multiply back to the order
    for order in (8, 12, 16):
        for seq in invariant_factor_sequences(order):
            prod = 1
            for f in seq:
                prod *= f
            assert prod == order


def test_sylow2_predicate_against_even_factor_count():
    for g in abelian_groups_up_to(16):
        evens = sum(1 for f in g.invariant_factors if f % 2 == 0)
        # 2-part is trivial iff no even factor, cyclic iff exactly one
        assert g.sylow2_trivial_or_noncyclic() == (evens != 1)


# -- group tables -------------------------------------------------------------


def test_group_table_is_latin_and_addition():
    g = FiniteAbelianGroup.of(2, 4)
    sq = group_table(g)
    assert sq.is_latin_square
    for i in range(8):
        for j in range(8):
            assert sq.cells[i][j] == g.index(g.add(g.element(i), g.element(j)))


def test_cyclic_table_entries():
    sq = group_table(cyclic(6))
    for i in range(6):
        for j in range(6):
            assert sq.cells[i][j] == (i + j) % 6


def test_group_table_colouring_is_proper():
    for g in (cyclic(7), FiniteAbelianGroup.of(3, 3), FiniteAbelianGroup.of(2, 2, 2)):
        latin_to_graph(group_table(g))  # build() raises on improperness


# -- complete mappings --------------------------------------------------------


def test_complete_mapping_matches_brute_force_to_order_8():
    for g in abelian_groups_up_to(8):
        exists, witness = complete_mapping_exists(g)
        assert exists == brute_complete_mapping(g), g.invariant_factors
        if exists:
            sq = group_table(g)
            n = g.order
            rows = {r for r, _ in witness.cells}
            cols = {c for _, c in witness.cells}
            syms = {sq.cells[r][c] for r, c in witness.cells}
            assert len(witness) == n and rows == cols == syms == set(range(max(n, 1)))


def test_complete_mapping_cap():
    with pytest.raises(ValueError, match="cap"):
        complete_mapping_exists(cyclic(32), cap=16)


def test_group_sum_obstruction():
    # cyclic even: the sum of all elements is the unique involution, nonzero
    assert group_sum_obstruction(cyclic(6), 1) != cyclic(6).zero
    assert group_sum_obstruction(cyclic(6), 3) != cyclic(6).zero
    # odd multiplier times even-order klein sum: sum is zero already
    k4 = FiniteAbelianGroup.of(2, 2)
    assert group_sum_obstruction(k4, 3) == k4.zero
    assert group_sum_obstruction(cyclic(7), 5) == cyclic(7).zero
    # even block size kills the obstruction even for cyclic even groups
    assert group_sum_obstruction(cyclic(6), 2) == cyclic(6).zero


# -- Maillet blow-ups ---------------------------------------------------------


def test_default_maillet_blowup_shape():
    spec = default_maillet_spec(cyclic(2), 3)
    spec.validate()
    sq = maillet_blowup(spec)
    assert sq.order == 6
    assert sq.is_latin_square
    # block (v, w) colours live in the band of v + w
    g = cyclic(2)
    for i in range(6):
        for j in range(6):
            band = sq.cells[i][j] // 3
            assert band == g.index(g.add(g.element(i // 3), g.element(j // 3)))


def test_random_maillet_spec_is_seeded():
    a = random_maillet_spec(cyclic(2), 3, seed=4)
    b = random_maillet_spec(cyclic(2), 3, seed=4)
    c = random_maillet_spec(cyclic(2), 3, seed=5)
    assert a.inner_colourings == b.inner_colourings
    assert a.inner_colourings != c.inner_colourings
    maillet_blowup(a)  # must still be Latin
    a.validate()


def test_maillet_spec_validation_errors():
    good = default_maillet_spec(cyclic(2), 2)
    missing = dict(good.inner_colourings)
    del missing[(1, 1)]
    with pytest.raises(ValueError, match="missing inner colouring"):
        MailletSpec(cyclic(2), 2, missing).validate()
    broken = dict(good.inner_colourings)
    broken[(0, 0)] = ((0, 0), (1, 1))
    with pytest.raises(ValueError):
        MailletSpec(cyclic(2), 2, broken).validate()


def test_block_size_one_blowup_is_the_group_table():
    spec = default_maillet_spec(cyclic(5), 1)
    assert maillet_blowup(spec).cells == group_table(cyclic(5)).cells


# -- random squares and enumeration -------------------------------------------


def test_random_latin_square_is_latin_and_seeded():
    a = random_latin_square(7, seed=0)
    b = random_latin_square(7, seed=0)
    c = random_latin_square(7, seed=1)
    assert a.is_latin_square
    assert a.cells == b.cells
    assert a.cells != c.cells


def test_random_latin_square_burn_in_moves_the_walk():
    base = random_latin_square(6, seed=2)
    walked = random_latin_square(6, seed=2, burn_in=200)
    assert walked.is_latin_square
    assert walked.cells != base.cells


def test_random_latin_square_tiny_orders():
    assert random_latin_square(1, seed=0).cells == ((0,),)
    assert random_latin_square(2, seed=3).is_latin_square


def test_enumerate_latin_cells_small_counts():
    # reduced x symbol relabellings: 1, 2, 12, 576 for orders 1..4
    assert sum(1 for _ in enumerate_latin_cells(1)) == 1
    assert sum(1 for _ in enumerate_latin_cells(2)) == 2
    squares3 = list(enumerate_latin_cells(3))
    assert len(squares3) == 12
    assert len(set(squares3)) == 12
    for cells in squares3:
        for j in range(3):
            assert {cells[i][j] for i in range(3)} == {0, 1, 2}
        for row in cells:
            assert set(row) == {0, 1, 2}

"""Generators for example and extremal instances: abelian group tables,
blown-up block colourings, random Latin squares, and complete-mapping checks.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Sequence

from .core import LatinArray, Transversal

__all__ = [
    "FiniteAbelianGroup",
    "MailletSpec",
    "cyclic",
    "group_table",
    "maillet_blowup",
    "default_maillet_spec",
    "random_maillet_spec",
    "group_sum_obstruction",
    "random_latin_square",
    "complete_mapping_exists",
    "abelian_groups_up_to",
    "invariant_factor_sequences",
    "enumerate_latin_cells",
]


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Direct product of cyclic groups given by invariant factors
    f1 | f2 | ... | fk, each >= 2.  The trivial group has no factors.
    Elements are tuples under componentwise modular addition; element ids
    are mixed-radix row-major."""

    invariant_factors: tuple[int, ...]
    order: int

    @classmethod
    def of(cls, *factors: int) -> "FiniteAbelianGroup":
        fs = tuple(int(f) for f in factors)
        if any(f < 2 for f in fs):
            raise ValueError("invariant factors must be >= 2")
        for a, b in zip(fs, fs[1:]):
            if b % a != 0:
                raise ValueError(f"invariant factors must form a divisor chain, got {fs}")
        order = 1
        for f in fs:
            order *= f
        return cls(invariant_factors=fs, order=order)

    @cached_property
    def _radix(self) -> tuple[int, ...]:
        # weight of each coordinate in the mixed-radix id
        w = []
        acc = 1
        for f in reversed(self.invariant_factors):
            w.append(acc)
            acc *= f
        return tuple(reversed(w))

    def element(self, idx: int) -> tuple[int, ...]:
        if not 0 <= idx < self.order:
            raise ValueError(f"element id {idx} out of range")
        out = []
        for f, w in zip(self.invariant_factors, self._radix):
            out.append((idx // w) % f)
        return tuple(out)

    def index(self, elem: Sequence[int]) -> int:
        return sum((e % f) * w for e, f, w in zip(elem, self.invariant_factors, self._radix))

    def add(self, x: Sequence[int], y: Sequence[int]) -> tuple[int, ...]:
        return tuple((a + b) % f for a, b, f in zip(x, y, self.invariant_factors))

    def neg(self, x: Sequence[int]) -> tuple[int, ...]:
        return tuple((-a) % f for a, f in zip(x, self.invariant_factors))

    def scale(self, m: int, x: Sequence[int]) -> tuple[int, ...]:
        return tuple((m * a) % f for a, f in zip(x, self.invariant_factors))

    @property
    def zero(self) -> tuple[int, ...]:
        return (0,) * len(self.invariant_factors)

    def sum_of_all_elements(self) -> tuple[int, ...]:
        # coordinate i sums to (order/f_i) * f_i(f_i-1)/2 mod f_i
        out = []
        for f in self.invariant_factors:
            reps = self.order // f
            out.append((reps * (f * (f - 1) // 2)) % f)
        return tuple(out)

    def sylow2_trivial_or_noncyclic(self) -> bool:
        evens = [f for f in self.invariant_factors if f % 2 == 0]
        return len(evens) != 1

    def describe(self) -> str:
        if not self.invariant_factors:
            return "Z1"
        return "x".join(f"Z{f}" for f in self.invariant_factors)


def cyclic(n: int) -> FiniteAbelianGroup:
    if n < 1:
        raise ValueError("order must be positive")
    return FiniteAbelianGroup.of() if n == 1 else FiniteAbelianGroup.of(n)


def invariant_factor_sequences(order: int) -> Iterator[tuple[int, ...]]:
    """All divisor chains f1 | f2 | ... with product = order."""

    def gen(m: int, prev: int) -> Iterator[tuple[int, ...]]:
        if m == 1:
            yield ()
            return
        f = max(prev, 2)
        while f <= m:
            if m % f == 0 and f % prev == 0:
                for rest in gen(m // f, f):
                    yield (f,) + rest
            f += 1

    yield from gen(order, 1)


def abelian_groups_up_to(max_order: int) -> list[FiniteAbelianGroup]:
    out = [FiniteAbelianGroup.of()]
    for m in range(2, max_order + 1):
        for fs in invariant_factor_sequences(m):
            out.append(FiniteAbelianGroup.of(*fs))
    return out


def group_table(group: FiniteAbelianGroup) -> LatinArray:
    """Addition table: cell (i, j) holds the id of elem(i) + elem(j)."""
    n = group.order
    elems = [group.element(i) for i in range(n)]
    cells = [
        [group.index(group.add(elems[i], elems[j])) for j in range(n)]
        for i in range(n)
    ]
    return LatinArray.from_cells(cells)


@dataclass(frozen=True)
class MailletSpec:
    """Blow-up data: each group element v becomes a block of block_size rows
    (and columns), and the (v, w) block is coloured inside the colour band of
    v + w by an inner Latin square on block_size symbols."""

    base_group: FiniteAbelianGroup
    block_size: int
    inner_colourings: Mapping[tuple[int, int], tuple[tuple[int, ...], ...]]

    def validate(self) -> None:
        m = self.block_size
        if m < 1:
            raise ValueError("block_size must be positive")
        h = self.base_group.order
        for v in range(h):
            for w in range(h):
                block = self.inner_colourings.get((v, w))
                if block is None:
                    raise ValueError(f"missing inner colouring for block ({v},{w})")
                grid = LatinArray.from_cells(block)
                if grid.order != m or not grid.is_latin_square or grid.symbols() != set(range(m)):
                    raise ValueError(f"block ({v},{w}) is not an order-{m} Latin square on 0..{m-1}")


def default_maillet_spec(group: FiniteAbelianGroup, block_size: int) -> MailletSpec:
    """Cyclic-shift inner blocks: entry (i, j) uses offset (i + j) mod m."""
    m = block_size
    shift = tuple(tuple((i + j) % m for j in range(m)) for i in range(m))
    inner = {
        (v, w): shift
        for v in range(group.order)
        for w in range(group.order)
    }
    return MailletSpec(base_group=group, block_size=m, inner_colourings=inner)


def random_maillet_spec(group: FiniteAbelianGroup, block_size: int, seed: int) -> MailletSpec:
    """Independent random inner Latin squares per block, seeded."""
    inner: dict[tuple[int, int], tuple[tuple[int, ...], ...]] = {}
    h = group.order
    for v in range(h):
        for w in range(h):
            sq = random_latin_square(block_size, seed=seed * h * h + v * h + w, burn_in=20 * block_size**2)
            inner[(v, w)] = tuple(tuple(int(s) for s in row) for row in sq.cells)
    return MailletSpec(base_group=group, block_size=block_size, inner_colourings=inner)


def maillet_blowup(spec: MailletSpec) -> LatinArray:
    """Order m*h square whose (v, w) block uses the m symbols of band v+w.
    Row blocks share no band colour across distinct w, so properness is
    inherited from the inner blocks."""
    spec.validate()
    g = spec.base_group
    m = spec.block_size
    h = g.order
    elems = [g.element(i) for i in range(h)]
    n = m * h
    cells = [[0] * n for _ in range(n)]
    for v in range(h):
        for w in range(h):
            band = g.index(g.add(elems[v], elems[w]))
            block = spec.inner_colourings[(v, w)]
            for i in range(m):
                for j in range(m):
                    cells[v * m + i][w * m + j] = band * m + block[i][j]
    return LatinArray.from_cells(cells)


def group_sum_obstruction(group: FiniteAbelianGroup, m: int) -> tuple[int, ...]:
    """m times the sum of all group elements.  A nonzero value certifies that
    the blow-up with block size m has no full transversal: a full transversal
    would force the sum of all colours to equal twice the sum of all
    vertex labels, i.e. zero."""
    return group.scale(m, group.sum_of_all_elements())


# -- random Latin squares (±1-move walk) ---------------------------------------


def random_latin_square(n: int, seed: int, burn_in: int = 0) -> LatinArray:
    """Random walk on the incidence cube: ±1 moves through at most one
    improper cell, started from the cyclic table.  No exact-uniformity claim;
    deterministic per (n, seed, burn_in)."""
    if n < 1:
        raise ValueError("order must be positive")
    if n == 1:
        return LatinArray.from_cells([[0]])
    if burn_in <= 0:
        burn_in = 20 * n * n
    rng = random.Random(seed)
    # f[r][c][s] in {-1, 0, 1}; line sums along each axis are 1
    f = [[[0] * n for _ in range(n)] for _ in range(n)]
    for r in range(n):
        for c in range(n):
            f[r][c][(r + c) % n] = 1
    improper: tuple[int, int, int] | None = None

    def ones(axis: int, u: int, v: int) -> list[int]:
        if axis == 0:
            return [r for r in range(n) if f[r][u][v] == 1]
        if axis == 1:
            return [c for c in range(n) if f[u][c][v] == 1]
        return [s for s in range(n) if f[u][v][s] == 1]

    steps = 0
    while steps < burn_in or improper is not None:
        if improper is None:
            while True:
                r, c, s = rng.randrange(n), rng.randrange(n), rng.randrange(n)
                if f[r][c][s] == 0:
                    break
            r1 = ones(0, c, s)[0]
            c1 = ones(1, r, s)[0]
            s1 = ones(2, r, c)[0]
        else:
            r, c, s = improper
            r1 = rng.choice(ones(0, c, s))
            c1 = rng.choice(ones(1, r, s))
            s1 = rng.choice(ones(2, r, c))
        f[r][c][s] += 1
        f[r][c1][s1] += 1
        f[r1][c][s1] += 1
        f[r1][c1][s] += 1
        f[r][c][s1] -= 1
        f[r][c1][s] -= 1
        f[r1][c][s] -= 1
        f[r1][c1][s1] -= 1
        improper = (r1, c1, s1) if f[r1][c1][s1] == -1 else None
        steps += 1

    cells = [[next(s for s in range(n) if f[r][c][s] == 1) for c in range(n)] for r in range(n)]
    return LatinArray.from_cells(cells)


def enumerate_latin_cells(n: int) -> Iterator[tuple[tuple[int, ...], ...]]:
    """All order-n Latin squares on symbols 0..n-1, as raw cell tuples in
    lexicographic order (rows filled left to right, symbols ascending).
    Meant for bulk censuses; wrap in LatinArray.from_cells when needed."""
    if n < 1:
        raise ValueError("order must be positive")
    col_masks = [0] * n
    row_masks = [0] * n
    grid = [[0] * n for _ in range(n)]

    def fill(pos: int) -> Iterator[tuple[tuple[int, ...], ...]]:
        if pos == n * n:
            yield tuple(tuple(row) for row in grid)
            return
        r, c = divmod(pos, n)
        blocked = row_masks[r] | col_masks[c]
        for s in range(n):
            bit = 1 << s
            if blocked & bit:
                continue
            grid[r][c] = s
            col_masks[c] |= bit
            row_masks[r] |= bit
            yield from fill(pos + 1)
            col_masks[c] &= ~bit
            row_masks[r] &= ~bit

    yield from fill(0)


# -- complete mappings ----------------------------------------------------------


def complete_mapping_exists(
    group: FiniteAbelianGroup, cap: int = 16
) -> tuple[bool, Transversal | None]:
    """Brute-force test for a full transversal of the group table.

    For existence we may normalise the first row's column choice to 0: if
    sigma is any complete mapping then i -> sigma(i) - sigma(0) is one fixing
    column 0 (symbols shift by the constant -sigma(0), staying distinct).

    The search picks the unassigned row with the fewest feasible columns at
    every node; per-row feasible sets come from bitmask tables.  A second
    normalisation keeps order-16 exhaustion affordable: translates
    sigma'(i) = sigma(i - a) - sigma(-a) all fix row 0, so we only keep
    assignments where sigma(e1) is no larger than any assigned difference
    sigma(x) - sigma(y) over pairs with x - y = e1 (e1 = element id 1)."""
    n = group.order
    if n > cap:
        raise ValueError(f"group order {n} exceeds brute-force cap {cap}")
    if n == 1:
        return True, Transversal(cells=((0, 0),))
    table = group_table(group).cells
    full = (1 << n) - 1

    # col_of[i][s]: the unique column j with table[i][j] == s
    col_of = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            col_of[i][table[i][j]] = j

    # spread_i(symbol mask) -> column mask, chunked in bytes
    chunks = (n + 7) // 8
    spread: list[list[list[int]]] = []
    for i in range(n):
        per_chunk = []
        for ch in range(chunks):
            tab = [0] * 256
            for m in range(256):
                cm = 0
                mm = m
                while mm:
                    b = mm & -mm
                    mm ^= b
                    s = ch * 8 + b.bit_length() - 1
                    if s < n:
                        cm |= 1 << col_of[i][s]
                cm_final = cm
                tab[m] = cm_final
            per_chunk.append(tab)
        spread.append(per_chunk)

    def initial_domain(i: int, free_cols: int, free_syms: int) -> int:
        acc = 0
        for ch in range(chunks):
            acc |= spread[i][ch][(free_syms >> (8 * ch)) & 255]
        return acc & free_cols

    assignment = [-1] * n
    # column value -> element id of the chosen image (columns are element ids
    # already, so the assignment value doubles as the group element)
    elems = [group.element(i) for i in range(n)]
    # partner[x] = y with elem(y) = elem(x) - elem(1)
    e1 = 1
    partner = [group.index(group.add(elems[x], group.neg(elems[e1]))) for x in range(n)]

    def diff_id(x: int, y: int) -> int:
        return group.index(group.add(elems[assignment[x]], group.neg(elems[assignment[y]])))

    def canonical_ok(i: int) -> bool:
        # skip assignments whose translate would shrink sigma(e1)
        v1 = assignment[e1]
        if v1 == -1:
            return True
        if i == e1:
            for x in range(n):
                y = partner[x]
                if assignment[x] != -1 and assignment[y] != -1 and diff_id(x, y) < v1:
                    return False
            return True
        for x in (i, group.index(group.add(elems[i], elems[e1]))):
            y = partner[x]
            if assignment[x] != -1 and assignment[y] != -1 and diff_id(x, y) < v1:
                return False
        return True

    def dfs(rows_left: int, free_syms: int, doms: list[int]) -> bool:
        if not rows_left:
            return True
        if rows_left >> e1 & 1:
            # assign e1 first so the translate prune applies below it
            i = e1
        else:
            best_i = -1
            best_cnt = n + 1
            rl = rows_left
            while rl:
                b = rl & -rl
                rl ^= b
                r = b.bit_length() - 1
                cnt = doms[r].bit_count()
                if cnt < best_cnt:
                    best_i, best_cnt = r, cnt
                    if cnt <= 1:
                        break
            i = best_i
        rows2 = rows_left & ~(1 << i)
        ti = table[i]
        dom = doms[i]
        while dom:
            b = dom & -dom
            dom ^= b
            j = b.bit_length() - 1
            s = ti[j]
            assignment[i] = j
            if not canonical_ok(i):
                assignment[i] = -1
                continue
            syms2 = free_syms & ~(1 << s)
            nd = doms.copy()
            nd[i] = 0
            feasible = True
            rl = rows2
            while rl:
                rb = rl & -rl
                rl ^= rb
                r = rb.bit_length() - 1
                m = nd[r] & ~(b | (1 << col_of[r][s]))
                if not m:
                    feasible = False
                    break
                nd[r] = m
            if feasible and dfs(rows2, syms2, nd):
                return True
            assignment[i] = -1
        return False

    # normalised search: row 0 takes column 0
    assignment[0] = 0
    free_cols0 = full & ~1
    free_syms0 = full & ~(1 << table[0][0])
    doms0 = [0] * n
    for i in range(1, n):
        doms0[i] = initial_domain(i, free_cols0, free_syms0)
        if not doms0[i]:
            return False, None
    ok = dfs(full & ~1, free_syms0, doms0)
    if not ok:
        return False, None
    return True, Transversal(cells=tuple((i, assignment[i]) for i in range(n)))

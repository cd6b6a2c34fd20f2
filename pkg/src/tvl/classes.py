"""Colour classes from switcher weights: heavy pairs become 2-classes,
moderate weight bands are decomposed into expander-backed classes, light
pairs stay uncovered.  Pairwise exchangeability is tested by a seeded
adversarial game over forbidden vertex and colour sets.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .core import ColouredBipartiteGraph
from .expander import SimpleGraph, extract_expander
from .switchers import ColourSwitcher, SwitcherWeights, compose_switchers, enumerate_switchers4

__all__ = [
    "ClassifierConfig",
    "ColourClassFamily",
    "ClassProvenance",
    "ExchangeParams",
    "TrialOutcome",
    "ExchangeReport",
    "quantile_config",
    "classify_colours",
    "test_pair_exchangeable",
]


@dataclass(frozen=True)
class ClassifierConfig:
    """Weight cut points: pairs above w2 are heavy, pairs in (w1, w2] fall
    into band_count geometric bands of ratio at most 2, pairs at or below w1
    (and below w0 especially) are left to the uncovered tally."""

    w0: float
    w1: float
    w2: float
    band_count: int
    multiplicity_cap: int | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.w0 <= self.w1 <= self.w2:
            raise ValueError("need 0 <= w0 <= w1 <= w2")
        if self.band_count < 1:
            raise ValueError("band_count must be positive")
        if self.w1 < self.w2 and self.w2 / 2**self.band_count > self.w1:
            raise ValueError(
                "bands of ratio 2 starting at w2 must reach down to w1; "
                "increase band_count"
            )

    def band_bounds(self, index: int) -> tuple[float, float]:
        """Half-open interval (lower, upper] of band `index`, 0 = heaviest."""
        if not 0 <= index < self.band_count:
            raise ValueError("band index out of range")
        upper = self.w2 / 2**index
        lower = max(self.w1, self.w2 / 2 ** (index + 1))
        return lower, upper


def quantile_config(
    weights: SwitcherWeights,
    band_count: int | None = None,
    multiplicity_cap: int | None = None,
) -> ClassifierConfig:
    """Thresholds from the nonzero weight distribution: w0/w1/w2 at the
    50%/75%/95% points.  Band count defaults to the least number of ratio-2
    bands covering (w1, w2]."""
    nonzero = sorted(w for w in weights.pair_weights.values() if w > 0)
    if not nonzero:
        return ClassifierConfig(
            w0=0.0, w1=0.0, w2=0.0, band_count=1, multiplicity_cap=multiplicity_cap
        )

    def q(fraction: float) -> float:
        return float(nonzero[round(fraction * (len(nonzero) - 1))])

    w0, w1, w2 = q(0.50), q(0.75), q(0.95)
    if band_count is None:
        if w1 <= 0 or w1 == w2:
            band_count = 1
        else:
            band_count = max(1, math.ceil(math.log2(w2 / w1)))
    return ClassifierConfig(
        w0=w0, w1=w1, w2=w2, band_count=band_count, multiplicity_cap=multiplicity_cap
    )


@dataclass(frozen=True)
class ClassProvenance:
    kind: str  # "heavy" or "band"
    band: int | None
    aux_average_degree: float
    class_average_degree: float
    class_min_degree: int


@dataclass(frozen=True)
class ColourClassFamily:
    classes: tuple[frozenset[int], ...]
    provenance: tuple[ClassProvenance, ...]
    uncovered_weight: int
    total_weight: int
    multiplicity: dict[int, int] = field(default_factory=dict)
    cap_exceeded: tuple[int, ...] = ()

    def equivalent(self, c: int, d: int) -> bool:
        if c == d:
            return True
        return any(c in cls and d in cls for cls in self.classes)


def classify_colours(
    weights: SwitcherWeights,
    cfg: ClassifierConfig,
    graph: ColouredBipartiteGraph,
) -> ColourClassFamily:
    """Build the class family.  Heavy pairs (w > w2) each form a 2-class.
    Each moderate band induces an auxiliary graph on colours, taken apart by
    repeatedly extracting an expander and removing its vertices; every
    extracted vertex set of at least two colours is a class.  The weight of
    all pairs left non-equivalent is reported as uncovered."""
    pair_weights = {k: w for k, w in weights.pair_weights.items() if w > 0}
    total_weight = sum(pair_weights.values())
    classes: list[frozenset[int]] = []
    provenance: list[ClassProvenance] = []

    for (c, d), w in sorted(pair_weights.items()):
        if w > cfg.w2:
            classes.append(frozenset((c, d)))
            provenance.append(
                ClassProvenance(
                    kind="heavy",
                    band=None,
                    aux_average_degree=0.0,
                    class_average_degree=1.0,
                    class_min_degree=1,
                )
            )

    if cfg.w2 > 0 and cfg.w1 < cfg.w2:
        for band in range(cfg.band_count):
            lower, upper = cfg.band_bounds(band)
            band_pairs = [
                (c, d) for (c, d), w in sorted(pair_weights.items())
                if lower < w <= upper
            ]
            if not band_pairs:
                continue
            colours = sorted({c for p in band_pairs for c in p})
            index = {c: i for i, c in enumerate(colours)}
            remaining = set(range(len(colours)))
            edges = [(index[c], index[d]) for c, d in band_pairs]
            while len(remaining) >= 2:
                kept = sorted(remaining)
                local = {v: i for i, v in enumerate(kept)}
                sub_edges = [
                    (local[u], local[v]) for u, v in edges
                    if u in remaining and v in remaining
                ]
                if not sub_edges:
                    break
                aux = SimpleGraph.from_edges(
                    len(kept), sub_edges, labels=[colours[v] for v in kept]
                )
                h, _, _ = extract_expander(aux)
                if h.vertex_count >= 2:
                    classes.append(frozenset(h.labels))
                    provenance.append(
                        ClassProvenance(
                            kind="band",
                            band=band,
                            aux_average_degree=aux.average_degree,
                            class_average_degree=h.average_degree,
                            class_min_degree=h.min_degree,
                        )
                    )
                extracted = {index[lbl] for lbl in h.labels}
                remaining -= extracted

    covered: set[tuple[int, int]] = set()
    for cls in classes:
        members = sorted(cls)
        for i, c in enumerate(members):
            for d in members[i + 1 :]:
                covered.add((c, d))
    uncovered_weight = sum(
        w for (c, d), w in pair_weights.items() if (c, d) not in covered
    )

    multiplicity: dict[int, int] = {}
    for cls in classes:
        if len(cls) > 2:
            for c in cls:
                multiplicity[c] = multiplicity.get(c, 0) + 1
    cap_exceeded: tuple[int, ...] = ()
    if cfg.multiplicity_cap is not None:
        cap_exceeded = tuple(
            sorted(c for c, m in multiplicity.items() if m > cfg.multiplicity_cap)
        )
    return ColourClassFamily(
        classes=tuple(classes),
        provenance=tuple(provenance),
        uncovered_weight=uncovered_weight,
        total_weight=total_weight,
        multiplicity=multiplicity,
        cap_exceeded=cap_exceeded,
    )


@dataclass(frozen=True)
class ExchangeParams:
    epsilon: float
    eta: float
    L: int
    ell: int

    def __post_init__(self) -> None:
        if not 0 <= self.epsilon < 1 or not 0 <= self.eta < 1:
            raise ValueError("epsilon and eta must lie in [0, 1)")
        if self.L < 0 or self.ell < 0:
            raise ValueError("L and ell must be non-negative")


@dataclass(frozen=True)
class TrialOutcome:
    trial: int
    forbidden_vertex_count: int
    forbidden_colour_count: int
    found_order: int | None
    witness: ColourSwitcher | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return self.found_order is not None


@dataclass(frozen=True)
class ExchangeReport:
    c: int
    d: int
    params: ExchangeParams
    trials: tuple[TrialOutcome, ...]
    max_order_searched: int

    @property
    def pass_count(self) -> int:
        return sum(1 for t in self.trials if t.passed)

    @property
    def all_passed(self) -> bool:
        return all(t.passed for t in self.trials)


def test_pair_exchangeable(
    graph: ColouredBipartiteGraph,
    c: int,
    d: int,
    params: ExchangeParams,
    trials: int,
    seed: int,
) -> ExchangeReport:
    """Monte-Carlo exchangeability game for the pair {c, d}.  Each trial
    draws forbidden vertex and colour sets of sizes up to
    floor(epsilon * |V(G)|) + L (colours never include c or d, mirroring the
    two-colour specialisation where the exception set is empty) and then
    looks for a c,d-switcher of order at most ell avoiding both sets:
    order-4 directly, then order-8 through one composition pivot.  Per-trial
    seeds derive from (seed, c, d, trial), so outcomes are reproducible and
    schedule-independent."""
    if c == d:
        raise ValueError("pair colours must differ")
    n = graph.n_vertices
    bound = int(params.epsilon * n) + params.L
    other_colours = sorted(graph.colours - {c, d})

    direct = enumerate_switchers4(graph, c, d) if params.ell >= 4 else []
    pivot_cache: dict[tuple[int, int], list[ColourSwitcher]] = {}

    def switchers(a: int, b: int) -> list[ColourSwitcher]:
        key = (a, b)
        if key not in pivot_cache:
            pivot_cache[key] = enumerate_switchers4(graph, a, b)
        return pivot_cache[key]

    max_order = 0
    if params.ell >= 4:
        max_order = 4
    if params.ell >= 8:
        max_order = 8

    outcomes = []
    for t in range(trials):
        rng = random.Random(f"{seed}:{c}:{d}:{t}")
        nv = rng.randint(0, min(bound, n))
        nc = rng.randint(0, min(bound, len(other_colours)))
        banned_v = frozenset(rng.sample(range(n), nv))
        banned_c = frozenset(rng.sample(other_colours, nc))

        def avoids(s: ColourSwitcher) -> bool:
            return not (s.vertex_set(graph) & banned_v) and not (
                s.colour_set & banned_c
            )

        found: ColourSwitcher | None = None
        order: int | None = None
        if params.ell >= 4:
            for s in direct:
                if avoids(s):
                    found, order = s, 4
                    break
        if found is None and params.ell >= 8:
            for pivot in other_colours:
                if pivot in banned_c:
                    continue
                left = [s for s in switchers(c, pivot) if avoids(s)]
                if not left:
                    continue
                right = [s for s in switchers(pivot, d) if avoids(s)]
                for s1 in left:
                    for s2 in right:
                        try:
                            composite = compose_switchers(s1, s2)
                        except ValueError:
                            continue
                        found, order = composite, 8
                        break
                    if found:
                        break
                if found:
                    break
        outcomes.append(
            TrialOutcome(
                trial=t,
                forbidden_vertex_count=nv,
                forbidden_colour_count=nc,
                found_order=order,
                witness=found,
            )
        )
    return ExchangeReport(
        c=c, d=d, params=params, trials=tuple(outcomes), max_order_searched=max_order
    )

"""Command-line front end.

Subcommands: gen, solve, switchers, classes, expander, audit, absorb,
template, addstep, sts, report.  Every run is deterministic given the flags
and --seed (the TVL_SEED environment variable overrides the flag), so
reruns emit byte-identical output.  Exit codes: 0 success, 1 precondition
error, 2 search exhaustion, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys

from .absorption import (
    AbsorberExhausted,
    AdditionExhausted,
    SwitcherExhausted,
    TemplateExhausted,
    addition_demo,
    addition_step,
    build_absorber,
    build_addition_state,
    build_template,
)
from .classes import ClassifierConfig, ExchangeParams, classify_colours, quantile_config, test_pair_exchangeable
from .constructions import (
    FiniteAbelianGroup,
    cyclic,
    group_table,
    maillet_blowup,
    random_latin_square,
    random_maillet_spec,
)
from .core import (
    ColouredBipartiteGraph,
    LatinArray,
    latin_from_json,
    latin_to_graph,
    latin_to_json,
)
from .expander import ExpanderParams, SimpleGraph, extract_expander, verify_expansion
from .pseudorandom import audit_pseudorandom
from .solvers import (
    greedy_nibble_matching,
    greedy_rainbow_matching,
    local_switch_augment,
    max_rainbow_matching_exact,
)
from .steiner import PipelineConfig, bose_sts, brouwer_pipeline, sts_from_json, sts_to_json, tripartition_reduce
from .switchers import check_count_bounds, enumerate_switchers4, weight_matrix

__all__ = ["main", "run"]

_EXHAUSTION = (SwitcherExhausted, AbsorberExhausted, TemplateExhausted, AdditionExhausted)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; the contract wants 64."""

    def error(self, message: str):  # noqa: D401
        self.print_usage(sys.stderr)
        self.exit(64, f"{self.prog}: error: {message}\n")


def _jsonable(obj):
    """Recursively convert to JSON-safe values with floats at 12 significant
    digits, so identical runs serialize identically."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return sorted(_jsonable(v) for v in obj)
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _emit_json(args, payload) -> None:
    _emit(args, json.dumps(_jsonable(payload), separators=(",", ":")))


def _parse_family(spec: str, n: int | None, seed: int) -> LatinArray:
    head, _, rest = spec.partition(":")
    if head == "cyclic":
        if n is None:
            raise ValueError("cyclic family needs --n")
        return group_table(cyclic(n))
    if head == "abelian":
        if not rest:
            raise ValueError("abelian family needs factors, e.g. abelian:2x4")
        factors = [int(f) for f in rest.split("x")]
        return group_table(FiniteAbelianGroup.of(*factors))
    if head == "maillet":
        m_str, _, factor_str = rest.partition(":")
        if not m_str or not factor_str:
            raise ValueError("maillet family is maillet:<m>:<factors>, e.g. maillet:3:2")
        factors = [int(f) for f in factor_str.split("x")]
        group = FiniteAbelianGroup.of(*factors)
        return maillet_blowup(random_maillet_spec(group, int(m_str), seed))
    if head == "random":
        if n is None:
            raise ValueError("random family needs --n")
        rseed_str, _, burn_str = rest.partition(":")
        rseed = int(rseed_str) if rseed_str else seed
        burn = int(burn_str) if burn_str else 0
        return random_latin_square(n, seed=rseed, burn_in=burn)
    raise ValueError(f"unknown family {spec!r}")


def _load_square(args) -> LatinArray:
    if getattr(args, "infile", None):
        with open(args.infile, encoding="utf-8") as fh:
            return latin_from_json(fh.read())
    if getattr(args, "family", None):
        return _parse_family(args.family, args.n, args.seed)
    raise ValueError("provide --family (with --n where needed) or --in FILE")


def _load_graph(args) -> ColouredBipartiteGraph:
    return latin_to_graph(_load_square(args))


def _add_host_flags(sub) -> None:
    sub.add_argument("--family", help="cyclic | abelian:<f1>x<f2> | maillet:<m>:<factors> | random:<seed>:<burnin>")
    sub.add_argument("--n", type=int, default=None, help="order for cyclic/random families")
    sub.add_argument("--in", dest="infile", help="Latin square JSON file")


def _gnp(n: int, p: float, seed: int) -> SimpleGraph:
    rng = random.Random(seed)
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return SimpleGraph.from_edges(n, edges)


def _parse_properties(text: str) -> tuple[int, ...]:
    out: set[int] = set()
    for part in text.split(","):
        lo, dash, hi = part.partition("-")
        if dash:
            out.update(range(int(lo), int(hi) + 1))
        else:
            out.add(int(part))
    if not out or not out <= set(range(1, 8)):
        raise ValueError("properties must come from 1..7")
    return tuple(sorted(out))


def _parse_pair(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("expected a pair c,d")
    return int(parts[0]), int(parts[1])


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_gen(args) -> int:
    square = _load_square(args)
    _emit(args, latin_to_json(square))
    return 0


def _cmd_solve(args) -> int:
    graph = _load_graph(args)
    if args.nibble:
        matching = greedy_nibble_matching(graph, bite_fraction=args.bite, seed=args.seed)
        size, optimal = len(matching.edges), False
    elif args.augment:
        matching = greedy_rainbow_matching(graph)
        matching = local_switch_augment(graph, matching, rounds=args.budget, seed=args.seed)
        size, optimal = len(matching.edges), False
    else:
        result = max_rainbow_matching_exact(graph, budget=args.budget if args.budget else None)
        size, optimal = result.size, result.optimal
    _emit_json(args, {"size": size, "optimal": optimal})
    return 0


def _cmd_switchers(args) -> int:
    graph = _load_graph(args)
    if args.pair:
        c, d = _parse_pair(args.pair)
        found = enumerate_switchers4(graph, c, d)
        _emit_json(args, {"c": c, "d": d, "weight": len(found)})
        return 0
    weights = weight_matrix(graph)
    if args.bounds:
        report = check_count_bounds(graph)
        _emit_json(
            args,
            {
                "n_vertices": report.n_vertices,
                "total_ordered_switchers": report.total_ordered_switchers,
                "cases": [
                    {"label": label, "observed": observed, "bound": bound}
                    for label, observed, bound in report.case_maxima
                ],
                "violations": list(report.violations),
                "passed": report.passed,
            },
        )
        return 0
    rows = sorted(weights.pair_weights.items())
    if args.format == "json":
        _emit_json(args, {"pairs": [[c, d, w] for (c, d), w in rows]})
    else:
        lines = ["c,d,w_cd"] + [f"{c},{d},{w}" for (c, d), w in rows]
        _emit(args, "\n".join(lines))
    return 0


def _cmd_classes(args) -> int:
    graph = _load_graph(args)
    weights = weight_matrix(graph)
    if args.test_pair:
        c, d = _parse_pair(args.test_pair)
        params = ExchangeParams(epsilon=args.epsilon, eta=args.eta, L=args.slack, ell=args.ell)
        report = test_pair_exchangeable(graph, c, d, params, trials=args.trials, seed=args.seed)
        _emit_json(
            args,
            {
                "c": c,
                "d": d,
                "trials": len(report.trials),
                "pass_count": report.pass_count,
                "all_passed": report.all_passed,
                "max_order_searched": report.max_order_searched,
            },
        )
        return 0
    if args.quantiles:
        cfg = quantile_config(weights)
    else:
        if None in (args.w0, args.w1, args.w2):
            raise ValueError("give all of --w0 --w1 --w2, or --quantiles")
        band_count = max(1, math.ceil(math.log2(args.w2 / args.w1))) if args.w1 < args.w2 and args.w1 > 0 else 1
        cfg = ClassifierConfig(w0=args.w0, w1=args.w1, w2=args.w2, band_count=band_count)
    family = classify_colours(weights, cfg, graph)
    _emit_json(
        args,
        {
            "config": {"w0": cfg.w0, "w1": cfg.w1, "w2": cfg.w2, "band_count": cfg.band_count},
            "classes": [sorted(cls) for cls in family.classes],
            "provenance": [
                {
                    "kind": p.kind,
                    "band": p.band,
                    "aux_average_degree": p.aux_average_degree,
                    "class_average_degree": p.class_average_degree,
                    "class_min_degree": p.class_min_degree,
                }
                for p in family.provenance
            ],
            "uncovered_weight": family.uncovered_weight,
            "total_weight": family.total_weight,
        },
    )
    return 0


def _cmd_expander(args) -> int:
    n, p = args.gnp.split(",") if args.gnp else ("50", "0.3")
    graph = _gnp(int(n), float(p), args.seed)
    if args.verify:
        params = ExpanderParams(alpha=args.alpha, delta_cap=args.delta)
        report = verify_expansion(graph, params, mode=args.mode, seed=args.seed)
        _emit_json(
            args,
            {
                "mode": report.mode,
                "alpha": report.alpha,
                "delta_cap": report.delta_cap,
                "checked_sets": report.checked_sets,
                "passed": report.passed,
                "violations": [
                    {
                        "witness_set": list(v.witness_set),
                        "killed": list(v.killed),
                        "surviving_neighbours": v.surviving_neighbours,
                        "required": v.required,
                    }
                    for v in report.violations
                ],
            },
        )
        return 0
    sub, params, trace = extract_expander(graph, seed=args.seed, alpha=args.alpha if args.alpha < 1 else None)
    _emit_json(
        args,
        {
            "vertex_count": sub.vertex_count,
            "vertices": sorted(sub.labels),
            "average_degree": sub.average_degree,
            "min_degree": sub.min_degree,
            "alpha": params.alpha,
            "delta_cap": params.delta_cap,
            "trace": trace,
        },
    )
    return 0


def _cmd_audit(args) -> int:
    graph = _load_graph(args)
    n = graph.a_size
    audit = audit_pseudorandom(
        graph,
        n=n,
        p=args.p,
        epsilon=args.epsilon,
        alpha=args.alpha,
        mode=args.mode,
        seed=args.seed,
        properties=_parse_properties(args.properties),
    )
    _emit_json(
        args,
        {
            "n": audit.n,
            "p": audit.p,
            "epsilon": audit.epsilon,
            "alpha": audit.alpha,
            "mode": audit.mode,
            "passed": audit.passed,
            "properties": {
                name: {
                    "passed": r.passed,
                    "quota": r.quota,
                    "achieved": r.achieved,
                    "details": r.details,
                }
                for name, r in sorted(audit.results.items())
            },
        },
    )
    return 0


def _pick_targets(graph: ColouredBipartiteGraph, colour: int | None, k: int):
    c = colour if colour is not None else min(graph.colours)
    pool = sorted(graph.colour_classes.get(c, ()))
    if len(pool) < k:
        raise ValueError(f"colour {c} has only {len(pool)} edges, need {k}")
    return tuple((a, b, c) for a, b in pool[:k])


def _cmd_absorb(args) -> int:
    graph = _load_graph(args)
    targets = _pick_targets(graph, args.colour, args.targets)
    absorber = build_absorber(graph, targets)
    _emit_json(args, absorber.to_json_dict())
    return 0


def _cmd_template(args) -> int:
    template = build_template(args.h, seed=args.seed, lean=args.lean)
    _emit_json(
        args,
        {
            "h": template.h,
            "y_size": template.y_size,
            "z_size": template.z_size,
            "max_degree": template.max_degree,
            "certified": template.certified,
            "edges": sorted([x, side, idx] for x, side, idx in template.edges),
        },
    )
    return 0


def _cmd_addstep(args) -> int:
    graph = _load_graph(args)
    state = build_addition_state(
        graph,
        identity_colour=args.colour if args.colour is not None else min(graph.colours),
        m_id_size=args.mid,
        block_count=args.blocks,
        seed=args.seed,
    )
    if args.pairs:
        with open(args.pairs, encoding="utf-8") as fh:
            pairs = json.load(fh)
        log = []
        for x, y in pairs:
            state = addition_step(graph, state, int(x), int(y))
            log.append(
                {
                    "pair": [int(x), int(y)],
                    "m_id": len(state.m_id),
                    "blocks": len(state.blocks),
                    "loose": len(state.loose),
                }
            )
    else:
        state, log = addition_demo(graph, state, steps=args.steps)
    _emit_json(args, {"steps": log, "final_m_id": len(state.m_id), "remainder": list(state.remainder)})
    return 0


def _cmd_sts(args) -> int:
    if args.construct:
        if args.construct != "bose":
            raise ValueError("only the bose construction is available")
        if args.m is None:
            raise ValueError("--construct bose needs --m")
        _emit(args, sts_to_json(bose_sts(args.m)))
        return 0
    if args.infile:
        with open(args.infile, encoding="utf-8") as fh:
            system = sts_from_json(fh.read())
    elif args.m is not None:
        system = bose_sts(args.m)
    else:
        raise ValueError("provide --in FILE or --m M")
    if args.reduce:
        graph, partition = tripartition_reduce(system, seed=args.seed, balanced=args.balanced)
        _emit_json(
            args,
            {
                "n": system.n,
                "partition": [list(part) for part in partition],
                "a_size": graph.a_size,
                "b_size": graph.b_size,
                "edges": [list(e) for e in graph.edges],
            },
        )
        return 0
    if args.brouwer:
        config = PipelineConfig(threads=args.threads)
        report = brouwer_pipeline(system, seeds=args.seeds, config=config)
        _emit_json(args, report.to_json_dict())
        return 0
    raise ValueError("pick one of --construct, --reduce, --brouwer")


def _cmd_report(args) -> int:
    graph = _load_graph(args)
    n = graph.a_size
    if max(graph.a_size, graph.b_size) <= 12:
        result = max_rainbow_matching_exact(graph)
        solve = {"size": result.size, "optimal": result.optimal}
    else:
        matching = greedy_rainbow_matching(graph)
        matching = local_switch_augment(graph, matching, rounds=200, seed=args.seed)
        solve = {"size": len(matching.edges), "optimal": False}
    weights = weight_matrix(graph)
    nonzero = {k: w for k, w in weights.pair_weights.items() if w > 0}
    audit = audit_pseudorandom(graph, n=n, p=1.0, epsilon=0.5, alpha=1e-4, seed=args.seed)
    _emit_json(
        args,
        {
            "family": args.family or "file",
            "n": n,
            "solve": solve,
            "switchers": {
                "nonzero_pairs": len(nonzero),
                "total_weight": sum(nonzero.values()),
            },
            "audit_passed": audit.passed,
        },
    )
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="tvl", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0, help="global seed (TVL_SEED env overrides)")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", help="write output to this path instead of stdout")
    parser.add_argument("--format", choices=("json", "csv"), default="csv")
    subs = parser.add_subparsers(dest="command", parser_class=_Parser)

    sub = subs.add_parser("gen", help="emit a Latin square as JSON")
    _add_host_flags(sub)
    sub.set_defaults(func=_cmd_gen)

    sub = subs.add_parser("solve", help="maximum rainbow matching / transversal")
    _add_host_flags(sub)
    mode = sub.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--nibble", action="store_true")
    mode.add_argument("--augment", action="store_true")
    sub.add_argument("--budget", type=int, default=0, help="node budget (exact) or rounds (augment)")
    sub.add_argument("--bite", type=float, default=0.2)
    sub.set_defaults(func=_cmd_solve)

    sub = subs.add_parser("switchers", help="order-4 switcher weights and bounds")
    _add_host_flags(sub)
    sub.add_argument("--pair", help="single pair c,d")
    sub.add_argument("--matrix", action="store_true", help="full weight matrix (CSV: c,d,w_cd)")
    sub.add_argument("--bounds", action="store_true", help="overlap bound report")
    sub.set_defaults(func=_cmd_switchers)

    sub = subs.add_parser("classes", help="switcher-weight colour classes")
    _add_host_flags(sub)
    sub.add_argument("--w0", type=float, default=None)
    sub.add_argument("--w1", type=float, default=None)
    sub.add_argument("--w2", type=float, default=None)
    sub.add_argument("--quantiles", action="store_true")
    sub.add_argument("--test-pair", dest="test_pair", help="exchangeability game for pair c,d")
    sub.add_argument("--trials", type=int, default=20)
    sub.add_argument("--epsilon", type=float, default=0.05)
    sub.add_argument("--eta", type=float, default=0.0)
    sub.add_argument("--slack", type=int, default=2, help="additive forbidden-set slack")
    sub.add_argument("--ell", type=int, default=4, help="composition budget")
    sub.set_defaults(func=_cmd_classes)

    sub = subs.add_parser("expander", help="expander extraction and verification")
    sub.add_argument("--gnp", help="random host n,p (default 50,0.3)")
    sub.add_argument("--extract", action="store_true")
    sub.add_argument("--verify", action="store_true")
    sub.add_argument("--mode", choices=("exact", "heuristic"), default="exact")
    sub.add_argument("--alpha", type=float, default=1.0, help="expansion ratio (extract: <1 to override)")
    sub.add_argument("--delta", type=float, default=0.0)
    sub.set_defaults(func=_cmd_expander)

    sub = subs.add_parser("audit", help="pseudorandomness property audit")
    _add_host_flags(sub)
    sub.add_argument("--p", type=float, default=1.0)
    sub.add_argument("--epsilon", type=float, default=0.5)
    sub.add_argument("--alpha", type=float, default=1e-4)
    sub.add_argument("--properties", default="1-7")
    sub.add_argument("--mode", choices=("exact", "greedy"), default="exact")
    sub.set_defaults(func=_cmd_audit)

    sub = subs.add_parser("absorb", help="build a multi-target absorber")
    _add_host_flags(sub)
    sub.add_argument("--targets", type=int, required=True)
    sub.add_argument("--colour", type=int, default=None)
    sub.add_argument("--demo", action="store_true")
    sub.set_defaults(func=_cmd_absorb)

    sub = subs.add_parser("template", help="robustly matchable template")
    sub.add_argument("--h", dest="h", type=int, required=True)
    sub.add_argument("--lean", action="store_true")
    sub.set_defaults(func=_cmd_template)

    sub = subs.add_parser("addstep", help="addition-structure growth steps")
    _add_host_flags(sub)
    sub.add_argument("--pairs", help="JSON file with [[x, y], ...] vertex pairs")
    sub.add_argument("--steps", type=int, default=1)
    sub.add_argument("--colour", type=int, default=None)
    sub.add_argument("--mid", type=int, default=20)
    sub.add_argument("--blocks", type=int, default=15)
    sub.set_defaults(func=_cmd_addstep)

    sub = subs.add_parser("sts", help="Steiner systems and the matching pipeline")
    sub.add_argument("--construct", choices=("bose",))
    sub.add_argument("--m", type=int, default=None)
    sub.add_argument("--in", dest="infile")
    sub.add_argument("--reduce", action="store_true")
    sub.add_argument("--balanced", action="store_true")
    sub.add_argument("--brouwer", action="store_true")
    sub.add_argument("--seeds", type=int, default=50)
    sub.set_defaults(func=_cmd_sts)

    sub = subs.add_parser("report", help="one-shot summary of a host square")
    _add_host_flags(sub)
    sub.set_defaults(func=_cmd_report)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    env_seed = os.environ.get("TVL_SEED")
    if env_seed is not None:
        try:
            args.seed = int(env_seed)
        except ValueError:
            print(f"tvl: TVL_SEED must be an integer, got {env_seed!r}", file=sys.stderr)
            return 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 64
    try:
        return args.func(args)
    except _EXHAUSTION as exc:
        print(f"tvl: search exhausted: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"tvl: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

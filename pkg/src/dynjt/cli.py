"""Command line entry point: ``dynjt {gen,build,prune,query,bench}``."""

from __future__ import annotations

import argparse
import json
import sys

from .benchgen import GenSpec, generate_network
from .inference import InferenceEngine
from .jointree import STRATEGIES, build_family_graph, cliques, format_jointree, separators_fast, spanning_tree
from .network import NetworkError, read_network, serialize_network
from .oracle import oracle_posterior
from .potentials import ZeroProbabilityError
from .pruning import parse_query, prune_dag, reconfigure


def _tree(net, args):
    return spanning_tree(build_family_graph(net), args.strategy, seed=args.tree_seed)


def _fmt(values) -> str:
    return " ".join(format(float(x), ".17g") for x in values)


def cmd_gen(args) -> int:
    spec = GenSpec(args.nodes, args.width, args.seed, cardinality=args.cardinality)
    text = serialize_network(generate_network(spec))
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def cmd_build(args) -> int:
    net = read_network(args.net)
    bjt = _tree(net, args)
    seps = separators_fast(bjt)
    text = format_jointree(net, bjt, seps, cliques(bjt, seps))
    sys.stdout.write(text)
    if args.dump_tree:
        with open(args.dump_tree, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def cmd_prune(args) -> int:
    net = read_network(args.net)
    q = parse_query(net, args.evidence, args.targets)
    bjt = _tree(net, args)
    ps = prune_dag(net, q)
    rj = reconfigure(bjt, ps)
    print("pruned {" + ", ".join(net.names(sorted(ps.pruned))) + "}")
    sys.stdout.write(format_jointree(net, bjt, rj.separators, rj.cliques, rj.hypernodes))
    return 0


def cmd_query(args) -> int:
    net = read_network(args.net)
    q = parse_query(net, args.evidence, args.targets)
    engine = InferenceEngine(net, _tree(net, args), reconfigure=not args.static,
                             cache=not args.no_cache)
    answers = engine.answer_query(q)
    for t in sorted(answers):
        print(f"{net.variables[t].name} {_fmt(answers[t].flat)}")
    if answers:
        print(f"Pr(e) {engine.evidence_probability!r}")
    if args.oracle:
        for t in sorted(q.targets):
            post, z = oracle_posterior(net, q, t)
            print(f"oracle {net.variables[t].name} {_fmt(post.flat)}")
    if args.stats:
        print(json.dumps(engine.last_stats.as_dict(), sort_keys=True))
    return 0


def cmd_bench(args) -> int:
    from .harness import parse_set_config, reports_csv, reports_json, run_suite

    with open(args.sets, encoding="utf-8") as fh:
        sets = parse_set_config(fh.read())

    def progress(set_id, k, pair):
        if args.verbose:
            d, s = pair
            print(f"set {set_id} net {k}: static {s.ops} dynamic {d.ops}", file=sys.stderr)

    reports, records = run_suite(sets, seed=args.seed, experiment=args.experiment,
                                 clock=args.clock, strategy=args.strategy, progress=progress)
    with open(args.out_csv, "w", encoding="utf-8", newline="") as fh:
        fh.write(reports_csv(reports))
    if args.out_json:
        meta = {"seed": args.seed, "experiment": args.experiment, "clock": args.clock,
                "strategy": args.strategy}
        with open(args.out_json, "w", encoding="utf-8") as fh:
            fh.write(reports_json(reports, records, meta))
    if args.figures and reports:
        from .plotting import write_report_figures

        for path in write_report_figures(reports, args.out_csv, args.experiment):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynjt", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def tree_opts(p):
        p.add_argument("--strategy", choices=STRATEGIES, default="minimize-lost-nodes")
        p.add_argument("--tree-seed", type=int, default=0, help="seed for the random strategy")

    p = sub.add_parser("gen", help="generate a random network")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cardinality", type=int, default=2)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="build and dump a basic jointree")
    p.add_argument("--net", required=True)
    p.add_argument("--dump-tree")
    tree_opts(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("prune", help="prune for a query and dump the reconfigured jointree")
    p.add_argument("--net", required=True)
    p.add_argument("--evidence", default="")
    p.add_argument("--targets", default="")
    tree_opts(p)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("query", help="compute posteriors")
    p.add_argument("--net", required=True)
    p.add_argument("--evidence", default="")
    p.add_argument("--targets", default="")
    p.add_argument("--static", action="store_true", help="do not reconfigure the jointree")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--stats", action="store_true", help="print operation counts as JSON")
    p.add_argument("--oracle", action="store_true", help="also print brute-force posteriors")
    tree_opts(p)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="run an experiment over generated network sets")
    p.add_argument("--sets", required=True, help="lines of 'nodes width count cardinality'")
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-json")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--experiment", type=int, choices=(1, 2), default=1)
    p.add_argument("--clock", choices=("wall", "steps"), default="wall",
                   help="'steps' measures reconfiguration in counted work units, reproducibly")
    p.add_argument("--no-figures", dest="figures", action="store_false")
    p.add_argument("--strategy", choices=STRATEGIES, default="minimize-lost-nodes")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NetworkError, ZeroProbabilityError, OSError, ValueError) as exc:
        print(f"dynjt: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

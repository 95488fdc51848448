"""Command-line entry point: ``socialrec <subcommand> ...``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical error (singular system or non-convergence).
"""

from __future__ import annotations

import argparse
import sys
from contextlib import contextmanager
from pathlib import Path

from . import experiments as exp
from .blend import recommend_top_k, write_recommendations
from .cf import build_similarities
from .contagion import CascadeConfig, parse_threshold
from .errors import ArgumentError, ConfigurationError, NumericalError, SocialRecError
from .group import (
    GroupSystem,
    aggregate,
    assemble_opinions,
    group_recommend,
    load_group_config,
)
from .model import (
    RatingScale,
    SusceptibilityProfile,
    load_graph,
    load_ratings,
    load_susceptibility,
    save_graph,
)
from .netgen import WattsStrogatzParams, watts_strogatz

DEFAULT_SEED = 20120101

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

FORMATS = """\
file formats:
  ratings   user_id,item_id,rating per line; optional header; '#' comments
  graph     u,v  or  u,v,weight_uv,weight_vu per line; a lone id is an isolated node
  alpha     user_id,alpha per line
  group     key = value lines: members = a,b,c / alpha = .9,.9,.5 /
            W = one row per line (repeated, member order) /
            opinion <item> = p1,p2,p3 / source = given|mixed|predicted_only /
            ratings = path / items = i1,i2 / predicted_alpha = x /
            aggregate = mean|min|least_misery_max / method = direct|iterative / k = N
  simulate  key = value lines with ExperimentSpec fields (n, k, p, regime,
            ratios = 0.05,0.1, p_like, replicates, seed, fresh_network, weight_mode, jobs)
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _scale(args) -> RatingScale:
    return RatingScale.binary_scale() if args.binary else RatingScale(args.scale)


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            yield fh


def cmd_recommend(args) -> int:
    scale = _scale(args)
    ratings = load_ratings(args.ratings, scale)
    graph = load_graph(args.graph, args.weight_mode, args.seed)
    if args.user not in ratings.users:
        raise ArgumentError(f"--user: unknown user {args.user!r}")
    sims = build_similarities(ratings, args.min_overlap)
    config = CascadeConfig(
        scale, parse_threshold(args.threshold), args.max_steps, args.zero_level_influences
    )
    if args.alpha_file:
        alphas = load_susceptibility(args.alpha_file, args.alpha)
    else:
        alphas = SusceptibilityProfile({}, args.alpha)
    recs = recommend_top_k(
        args.user, args.k, ratings, sims, graph, config, alphas, args.seed, args.neighborhood_k
    )
    with _output(args.output) as fh:
        write_recommendations(recs, fh)
    return EXIT_OK


def _group_system(cfg, args):
    members = cfg.members
    alpha = cfg.alpha if cfg.alpha is not None else [0.5] * len(members)
    overrides = {}
    opinions = dict(cfg.opinions)
    if cfg.source in ("mixed", "predicted_only"):
        if not cfg.ratings:
            raise ConfigurationError(f"source = {cfg.source} needs 'ratings = <path>'")
        ratings_path = Path(cfg.ratings)
        if not ratings_path.is_absolute():
            ratings_path = Path(args.config).parent / ratings_path
        ratings = load_ratings(ratings_path, RatingScale(cfg.scale))
        items = cfg.items or [i for i in ratings.items if i not in opinions]
        assembled, overrides = assemble_opinions(
            members, items, ratings, build_similarities(ratings), cfg.source,
            alpha, cfg.predicted_alpha,
        )
        opinions.update(assembled)
    elif cfg.source != "given":
        raise ConfigurationError(f"source: unknown rule {cfg.source!r}")
    return GroupSystem(members, alpha, cfg.W, opinions, overrides, RatingScale(cfg.scale))


def cmd_group_recommend(args) -> int:
    cfg = load_group_config(args.config)
    sys_ = _group_system(cfg, args)
    rule = args.aggregate or cfg.aggregate
    method = args.method or cfg.method
    k = args.k if args.k is not None else cfg.k
    recs = group_recommend(sys_, cfg.items, k, rule, method)
    with _output(args.output) as fh:
        header = ["rank", "item_id", "group_score", "direct_score"]
        header += [f"settled_{m}" for m in sys_.members]
        fh.write(",".join(header) + "\n")
        for rank, r in enumerate(recs, start=1):
            row = [str(rank), r.item, f"{r.score:.4f}", f"{aggregate(r.initial, rule):.4f}"]
            row += [f"{x:.4f}" for x in r.settled]
            fh.write(",".join(row) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = exp.load_spec_file(args.config) if args.config else {}
    for key in ("n", "k", "p", "p_like", "replicates", "seed", "weight_mode", "jobs"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    if args.ratios is not None:
        params["ratios"] = tuple(float(x) for x in args.ratios.split(","))
    if args.fixed_network:
        params["fresh_network"] = False
    params.setdefault("seed", DEFAULT_SEED)
    regimes = args.regime or [params.pop("regime", "const0.1")]
    params.pop("regime", None)
    results = [exp.run_experiment(exp.ExperimentSpec(regime=r, **params)) for r in regimes]
    exp.export_results(results, args.output)
    return EXIT_OK


def cmd_gen_network(args) -> int:
    params = WattsStrogatzParams(args.n, args.k, args.p, args.seed)
    graph = watts_strogatz(params, args.weight_mode)
    save_graph(graph, args.output, weights=not args.edges_only)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="socialrec",
        description="Social-influence recommendation: CF + threshold contagion for "
        "individuals, interpersonal-influence equilibrium for groups.",
        epilog=FORMATS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("recommend", help="top-k items for one user",
                       epilog=FORMATS, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--ratings", required=True, help="ratings file")
    p.add_argument("--graph", required=True, help="social graph file")
    p.add_argument("--user", required=True, help="target user id")
    p.add_argument("--k", type=int, default=10, help="list length (default 10)")
    p.add_argument("--scale", type=int, default=5, help="ratings are 1..R (default 5)")
    p.add_argument("--binary", action="store_true", help="ratings are -1/+1")
    p.add_argument("--weight-mode", default="uniform",
                   choices=("given", "uniform", "random_partition"),
                   help="influence weights for the graph (default uniform)")
    p.add_argument("--threshold", default="constant:0.5",
                   help="constant:C | uniform:LO:HI | cf (default constant:0.5)")
    p.add_argument("--alpha", type=float, default=0.5,
                   help="susceptibility for users not in --alpha-file (default 0.5)")
    p.add_argument("--alpha-file", help="user_id,alpha file")
    p.add_argument("--max-steps", type=int, help="cascade step cap (default: node count)")
    p.add_argument("--neighborhood-k", type=int, help="CF neighborhood size (default: all)")
    p.add_argument("--min-overlap", type=int, default=2, help="min co-rated items (default 2)")
    p.add_argument("--zero-level-influences", action="store_true",
                   help="let active-0 neighbors influence (odd R)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"default {DEFAULT_SEED}")
    p.add_argument("--output", "-o", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("group-recommend", help="rank items for a group",
                       epilog=FORMATS, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", required=True, help="group config file")
    p.add_argument("--aggregate", choices=("mean", "min", "least_misery_max"),
                   help="overrides the config's aggregate")
    p.add_argument("--method", choices=("direct", "iterative"), help="equilibrium solver")
    p.add_argument("--k", type=int, help="list length (default: all)")
    p.add_argument("--output", "-o", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_group_recommend)

    p = sub.add_parser("simulate", help="replicated binary cascades on small-world graphs",
                       epilog=FORMATS, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--config", help="key = value experiment file; flags override it")
    p.add_argument("--regime", action="append",
                   help="const0.1 | const0.5 | uniform | constant:C | uniform:LO:HI (repeatable)")
    p.add_argument("--ratios", help="comma-separated initial active ratios in (0, 1]")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--p-like", dest="p_like", type=float)
    p.add_argument("--replicates", type=int)
    p.add_argument("--weight-mode", choices=("uniform", "random_partition"))
    p.add_argument("--fixed-network", action="store_true",
                   help="reuse one network across replicates")
    p.add_argument("--jobs", type=int, help="worker processes (default 1)")
    p.add_argument("--seed", type=int, help=f"master seed (default {DEFAULT_SEED})")
    p.add_argument("--output", "-o", required=True, help="results CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen-network", help="write a Watts-Strogatz graph file")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--k", type=int, default=10, help="even lattice degree (default 10)")
    p.add_argument("--p", type=float, default=0.1, help="rewiring probability (default 0.1)")
    p.add_argument("--weight-mode", default="random_partition",
                   choices=("uniform", "random_partition"))
    p.add_argument("--edges-only", action="store_true", help="omit influence weights")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(func=cmd_gen_network)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"socialrec {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"socialrec {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SocialRecError, OSError) as exc:
        print(f"socialrec {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

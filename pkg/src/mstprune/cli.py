"""Command line interface: ``mstprune <subcommand> ...``.

Every artifact ``X`` is accompanied by ``X.meta.json`` recording the
subcommand, its configuration and seeds. Nothing time-dependent is written,
so equal inputs give byte-identical outputs.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from importlib import resources
from pathlib import Path

from . import __version__
from ._rng import check_seed, derive_seed
from .centrality import centrality_report, histogram, write_centrality, write_histogram
from .embed import embed_3d, embedding_sidecar, write_embedding
from .exceptions import MstPruneError, SchemaError
from .mstree import build_mst, dumps_tree, loads_tree, tree_distance_stats, tree_to_dot
from .nullmodel import STATISTICS, ThresholdReport, default_threads, threshold_estimate
from .panel import (
    load_metadata, load_panel, load_returns, log_returns, prices_from_returns, synth_gaussian,
    write_prices, write_returns,
)
from .pruner import dumps_pruned, prune, pruned_to_dot
from .rankcorr import load_distance, spearman_matrix, to_distance, write_matrix
from .survival import (
    ORDERS, WindowSpec, load_survivability, survivability, survival_curve, window_adjacency,
    write_curve, write_survivability,
)

logger = logging.getLogger("mstprune")

BUNDLED_SYNTHETIC = "@synthetic"
BUNDLED_REGIONS = "@synthetic-regions"


@dataclass
class RunConfig:
    input: str
    output_dir: str = "mstprune-out"
    window_length: int = 60
    window_step: int = 1
    replicas: int = 1000
    seed: int = 0
    statistic: str = "mean-min"
    horizon: int = 5
    order: str = "second"
    min_survival: float = 0.8
    metadata: str | None = None
    embed_iters: int = 300

    def __post_init__(self):
        check_seed(self.seed)
        WindowSpec(self.window_length, self.window_step)
        if self.replicas < 1:
            raise SchemaError("replicas must be >= 1")
        if self.statistic not in STATISTICS:
            raise SchemaError(f"statistic must be one of {STATISTICS}")
        if self.horizon < 1:
            raise SchemaError("horizon must be >= 1")
        if self.order not in ORDERS:
            raise SchemaError(f"order must be one of {ORDERS}")
        if not 0.0 <= self.min_survival <= 1.0:
            raise SchemaError("min_survival must lie in [0, 1]")
        if self.embed_iters < 0:
            raise SchemaError("embed_iters must be >= 0")

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise SchemaError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise SchemaError(f"invalid config: {exc}") from None


def _open_input(path):
    bundled = {BUNDLED_SYNTHETIC: "synthetic_prices.csv", BUNDLED_REGIONS: "synthetic_regions.csv"}
    if path in bundled:
        return resources.files("mstprune").joinpath("data", bundled[path]).read_bytes()
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def write_artifact(path, text, meta):
    """Write ``text`` to ``path`` and ``meta`` to ``path.meta.json``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    with open(str(path) + ".meta.json", "w", encoding="utf-8", newline="") as fh:
        fh.write(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _render(writer, obj):
    buf = io.StringIO()
    writer(obj, buf)
    return buf.getvalue()


def _meta(command, args, **extra):
    config = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func", "threads", "verbose")}
    return {"command": command, "config": config, "version": __version__, **extra}


def _read_regions(path):
    return None if not path else load_metadata(_open_input(path))


def _returns_arg(args):
    return load_returns(_open_input(args.returns))


# -- subcommands -----------------------------------------------------------

def cmd_returns(args):
    prices = load_panel(_open_input(args.prices))
    r = log_returns(prices)
    write_artifact(args.out, _render(write_returns, r),
                   _meta("returns", args, dropped_rows=prices.dropped_rows))


def cmd_corr(args):
    c = spearman_matrix(_returns_arg(args))
    write_artifact(args.out, _render(lambda m, s: write_matrix(m.tickers, m.c, s), c),
                   _meta("corr", args))
    if args.distance_out:
        d = to_distance(c)
        write_artifact(args.distance_out, _render(lambda m, s: write_matrix(m.tickers, m.d, s), d),
                       _meta("corr", args))


def _distance_from_args(args):
    if args.distance:
        return load_distance(_open_input(args.distance))
    return to_distance(spearman_matrix(_returns_arg(args)))


def cmd_mst(args):
    d = _distance_from_args(args)
    regions = _read_regions(args.metadata)
    tree = build_mst(d, None if regions is None else tuple(regions.get(t) for t in d.tickers))
    stats = tree_distance_stats(tree)
    meta = _meta("mst", args, weight=tree.weight, distance_stats=stats._asdict())
    write_artifact(args.out, dumps_tree(tree), meta)
    if args.dot:
        write_artifact(args.dot, tree_to_dot(tree), meta)


def cmd_threshold(args):
    seed = derive_seed(args.seed, "threshold")
    report = threshold_estimate(_returns_arg(args), replicas=args.replicas, seed=seed,
                                statistic=args.statistic, threads=args.threads)
    write_artifact(args.out, report.dumps(), _meta("threshold", args, replica_seed=seed))


def cmd_survival(args):
    seq = window_adjacency(_returns_arg(args), WindowSpec(args.window, args.step), args.threads)
    curve = survival_curve(seq, args.order)
    write_artifact(args.out, _render(write_curve, curve),
                   _meta("survival", args, windows=len(seq)))


def cmd_survivability(args):
    seq = window_adjacency(_returns_arg(args), WindowSpec(args.window, args.step), args.threads)
    m = survivability(seq, args.horizon, args.order)
    write_artifact(args.out, _render(write_survivability, m),
                   _meta("survivability", args, windows=len(seq)))


def cmd_prune(args):
    tree = loads_tree(Path(args.tree).read_text(encoding="utf-8"))
    if args.threshold_report:
        threshold = ThresholdReport.loads(Path(args.threshold_report).read_text(encoding="utf-8")).threshold
    else:
        threshold = args.threshold
    surv = load_survivability(_open_input(args.survivability))
    g = prune(tree, threshold, surv, args.min_survival)
    meta = _meta("prune", args, threshold_used=threshold)
    write_artifact(args.out, dumps_pruned(g), meta)
    if args.dot:
        write_artifact(args.dot, pruned_to_dot(g, include_dropped=args.include_dropped), meta)


def _write_centrality_outputs(tree, out, hist_dir, meta, strength_double=False):
    report = centrality_report(tree, strength_double=strength_double)
    write_artifact(out, _render(write_centrality, report), meta)
    if hist_dir:
        hist_dir = Path(hist_dir)
        specs = {
            "degree": (report.degree, 0.5, 1.0),
            "strength": (report.strength, 0.0, 0.1),
            "betweenness": (report.betweenness_normalized, 0.0, 0.05),
            "distance": ([e.distance for e in tree.edges], 0.0, 0.05),
        }
        for name, (values, start, width) in specs.items():
            h = histogram(values, start, width)
            write_artifact(hist_dir / f"hist_{name}.csv", _render(write_histogram, h),
                           {**meta, "histogram": name, "bin_width": width})


def cmd_centrality(args):
    tree = loads_tree(Path(args.tree).read_text(encoding="utf-8"))
    _write_centrality_outputs(tree, args.out, args.histograms, _meta("centrality", args),
                              args.strength_double)


def cmd_embed(args):
    d = _distance_from_args(args)
    seed = derive_seed(args.seed, "embed")
    e = embed_3d(d, iters=args.iters, seed=seed)
    side = json.loads(embedding_sidecar(e))
    write_artifact(args.out, _render(write_embedding, e), _meta("embed", args, embed_seed=seed, **side))


def cmd_synth(args):
    seed = derive_seed(args.seed, "synth")
    r = synth_gaussian(args.series, args.length, args.mean, args.std, seed)
    meta = _meta("synth", args, synth_seed=seed)
    if args.prices:
        write_artifact(args.out, _render(write_prices, prices_from_returns(r)), meta)
    else:
        write_artifact(args.out, _render(write_returns, r), meta)


def run_pipeline(cfg: RunConfig, threads=None):
    """Every stage end to end; artifacts land in ``cfg.output_dir``."""
    out = Path(cfg.output_dir)
    base = {"command": "pipeline", "config": asdict(cfg), "version": __version__}

    def emit(name, text, **extra):
        write_artifact(out / name, text, {**base, "artifact": name, **extra})

    prices = load_panel(_open_input(cfg.input), regions=_read_regions(cfg.metadata))
    r = log_returns(prices)
    emit("returns.csv", _render(write_returns, r), dropped_rows=prices.dropped_rows)

    c = spearman_matrix(r)
    d = to_distance(c)
    emit("correlation.csv", _render(lambda m, s: write_matrix(m.tickers, m.c, s), c))
    emit("distance.csv", _render(lambda m, s: write_matrix(m.tickers, m.d, s), d))

    tree = build_mst(d, r.regions)
    emit("mst.json", dumps_tree(tree), weight=tree.weight)
    emit("mst.dot", tree_to_dot(tree))

    t_seed = derive_seed(cfg.seed, "threshold")
    report = threshold_estimate(r, cfg.replicas, t_seed, cfg.statistic, threads=threads)
    emit("threshold.json", report.dumps(), replica_seed=t_seed)

    seq = window_adjacency(r, WindowSpec(cfg.window_length, cfg.window_step), threads)
    for order in ORDERS:
        emit(f"survival_{order}.csv", _render(write_curve, survival_curve(seq, order)),
             windows=len(seq))
    surv = survivability(seq, cfg.horizon, cfg.order)
    emit("survivability.csv", _render(write_survivability, surv), windows=len(seq))

    g = prune(tree, report.threshold, surv, cfg.min_survival)
    emit("pruned.json", dumps_pruned(g))
    emit("pruned.dot", pruned_to_dot(g, include_dropped=True))

    _write_centrality_outputs(tree, out / "centrality.csv", out / "histograms",
                              {**base, "artifact": "centrality.csv"})

    e_seed = derive_seed(cfg.seed, "embed")
    emb = embed_3d(d, iters=cfg.embed_iters, seed=e_seed)
    emit("embedding.csv", _render(write_embedding, emb), embed_seed=e_seed,
         **json.loads(embedding_sidecar(emb)))
    return g


def cmd_pipeline(args):
    if args.config:
        cfg = RunConfig.from_json(Path(args.config).read_text(encoding="utf-8"))
    elif args.input:
        cfg = RunConfig(input=args.input)
    else:
        raise SchemaError("pipeline needs --config or --input")
    if args.out:
        cfg.output_dir = args.out
    if args.seed is not None:
        cfg.seed = check_seed(args.seed)
    run_pipeline(cfg, threads=args.threads)


# -- argument parsing ------------------------------------------------------

def _add_returns_input(p, required=True):
    p.add_argument("--returns", required=required, help="return panel CSV ('-' for stdin)")


def _add_window(p):
    p.add_argument("--window", type=int, default=60, help="window length in rows")
    p.add_argument("--step", type=int, default=1, help="rows between window starts")


def _add_threads(p):
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap (default: $MSTPRUNE_THREADS or 1)")


def build_parser():
    parser = argparse.ArgumentParser(prog="mstprune", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("returns", help="log-returns from a wide price CSV")
    p.add_argument("--prices", required=True)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_returns)

    p = sub.add_parser("corr", help="Spearman correlation (and distance) matrix")
    _add_returns_input(p)
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--distance-out")
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("mst", help="minimum spanning tree as JSON (and DOT)")
    _add_returns_input(p, required=False)
    p.add_argument("--distance", help="distance matrix CSV instead of --returns")
    p.add_argument("--metadata", help="ticker,region CSV")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--dot")
    p.set_defaults(func=cmd_mst)

    p = sub.add_parser("threshold", help="noise threshold from shuffled replicas")
    _add_returns_input(p)
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--statistic", choices=STATISTICS, default="mean-min")
    p.add_argument("-o", "--out", required=True)
    _add_threads(p)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("survival", help="surviving-connection curve over sliding windows")
    _add_returns_input(p)
    _add_window(p)
    p.add_argument("--order", choices=ORDERS, default="first")
    p.add_argument("-o", "--out", required=True)
    _add_threads(p)
    p.set_defaults(func=cmd_survival)

    p = sub.add_parser("survivability", help="per-pair survivability matrix")
    _add_returns_input(p)
    _add_window(p)
    p.add_argument("--horizon", type=int, default=5)
    p.add_argument("--order", choices=ORDERS, default="second")
    p.add_argument("-o", "--out", required=True)
    _add_threads(p)
    p.set_defaults(func=cmd_survivability)

    p = sub.add_parser("prune", help="drop noise edges from a tree")
    p.add_argument("--tree", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--threshold", type=float)
    g.add_argument("--threshold-report")
    p.add_argument("--survivability", required=True)
    p.add_argument("--min-survival", type=float, default=0.8)
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--dot")
    p.add_argument("--include-dropped", action="store_true",
                   help="draw removed edges dashed in the DOT output")
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("centrality", help="degree, strength, betweenness, eigenvector")
    p.add_argument("--tree", required=True)
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--histograms", help="directory for frequency-distribution CSVs")
    p.add_argument("--strength-double", action="store_true",
                   help="count each incident edge twice in node strength")
    p.set_defaults(func=cmd_centrality)

    p = sub.add_parser("embed", help="3-D distance-preserving coordinates")
    _add_returns_input(p, required=False)
    p.add_argument("--distance")
    p.add_argument("--iters", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("synth", help="i.i.d. Gaussian return (or price) panel")
    p.add_argument("--series", type=int, default=40)
    p.add_argument("--length", type=int, default=125)
    p.add_argument("--mean", type=float, default=0.0)
    p.add_argument("--std", type=float, default=2.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prices", action="store_true", help="emit prices instead of returns")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pipeline", help="run every stage from a price CSV")
    p.add_argument("--config", help="RunConfig JSON")
    p.add_argument("--input", help=f"price CSV, or {BUNDLED_SYNTHETIC} for the bundled panel")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--seed", type=int, default=None)
    _add_threads(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if getattr(args, "threads", "missing") is None:
        args.threads = default_threads()
    if getattr(args, "command", None) in ("mst", "embed") and not (args.returns or args.distance):
        print(f"error: {args.command} needs --returns or --distance", file=sys.stderr)
        return 2
    try:
        args.func(args)
    except (MstPruneError, ValueError, OSError) as exc:
        print(f"error: {exc}".splitlines()[0], file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

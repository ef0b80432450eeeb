"""Command-line interface: ``homotop <subcommand> ...``.

Exit codes: 0 success, 1 validation error, 2 compute error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from ._validation import ComputeError, ValidationError
from ._version import __version__

EXIT_OK, EXIT_VALIDATION, EXIT_COMPUTE, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("homotop")


def _read_cloud(path):
    """Numeric CSV, optional header; embedding CSVs drop their two provenance columns."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValidationError(f"{path}: empty point cloud file")
    skip = 0
    if rows[0][:2] == ["method", "param_hash"]:
        skip = 2
    try:
        [float(c) for c in rows[0][skip:]]
        body = rows
    except ValueError:
        body = rows[1:]
    try:
        X = np.array([[float(c) for c in r[skip:]] for r in body])
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric cell ({exc})") from None
    if X.ndim != 2 or X.size == 0:
        raise ValidationError(f"{path}: expected a non-empty rectangular table")
    return X


def _write_cloud(X, path):
    lines = [",".join(f"x{j + 1}" for j in range(X.shape[1]))]
    lines += [",".join(repr(float(v)) for v in row) for row in X]
    text = "\n".join(lines) + "\n"
    _emit(text, path)


def _emit(text, path):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")


def _load_series(path, channel=None, rate=None):
    from .ingest import load_bonn_segment, load_csv_matrix

    path = Path(path)
    if path.suffix.lower() == ".csv":
        cs = load_csv_matrix(path, rate=rate or 1.0)
        if channel is None:
            return cs[0]
        if channel not in cs.labels:
            raise ValidationError(f"channel {channel!r} not in {path}")
        return cs[cs.labels.index(channel)]
    return load_bonn_segment(path, **({} if rate is None else {"rate": rate}))


def _parse_kv(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ValidationError(f"--param expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


# subcommands -------------------------------------------------------------

def cmd_ingest(args):
    from .ingest import ChannelSet, load_bonn_segment, select_channels, write_csv_matrix
    from .pipeline import load_channel_set

    path = Path(args.input)
    if path.is_dir() or path.suffix.lower() == ".csv":
        cs = load_channel_set(path, args.label or path.stem, args.orientation, args.rate)
    else:
        ts = load_bonn_segment(path, **({} if args.rate is None else {"rate": args.rate}))
        cs = ChannelSet((ts,), set_label=args.label or "")
    if args.channels:
        cs = select_channels(cs, args.channels, args.seed)
    text = write_csv_matrix(cs)
    _emit(text, args.out)
    log.info("%d channels, %d samples each", len(cs), min(len(c) for c in cs))


def cmd_embed(args):
    from .embedding import DelayParams, false_nearest_neighbors, takens_embed

    series = _load_series(args.input, args.channel, args.rate)
    dim = args.dim
    if args.fnn:
        res = false_nearest_neighbors(series, args.max_dim, args.lag)
        dim = res.dimension
        log.info("false nearest neighbours choose dim=%d (fractions %s)", dim,
                 np.round(res.fractions, 4).tolist())
    _write_cloud(takens_embed(series, DelayParams(dim, args.lag)), args.out)


def cmd_reduce(args):
    from .dimreduce import MethodParams, reduce

    X = _read_cloud(args.input)
    params = MethodParams(n_components=args.components, **_parse_kv(args.param))
    emb = reduce(X, args.method, params, args.seed)
    if args.out in (None, "-"):
        sys.stdout.write(emb.to_csv())
    else:
        emb.to_csv(args.out)


def _rips_from_cloud(args):
    from .complexes import distance_matrix, maxmin_subsample, rips_filtration
    from .pipeline import PipelineConfig

    X = _read_cloud(args.input)
    limit = PipelineConfig(max_points=args.max_points).effective_max_points()
    if X.shape[0] > limit:
        X = X[maxmin_subsample(X, limit)]
    scale = np.inf if args.max_scale is None else args.max_scale
    return rips_filtration(distance_matrix(X), 3 if args.max_dim is None else args.max_dim, scale)


def cmd_rips(args):
    fc = _rips_from_cloud(args)
    _emit(fc.to_text(), args.out)
    log.info("%d simplices", len(fc))


def cmd_persist(args):
    from .complexes import FilteredComplex
    from .persistence import persistence_diagram

    if args.filtration:
        fc = FilteredComplex.from_text(Path(args.input))
        fc = FilteredComplex(fc.simplices, fc.values, args.max_dim if args.max_dim is not None
                             else fc.max_dim)
    else:
        fc = _rips_from_cloud(args)
    dgm = persistence_diagram(fc, keep_zero=args.keep_zero)
    if args.cap_essential and np.isfinite(fc.max_scale):
        dgm = dgm.cap_essential(fc.max_scale)
    _emit(dgm.to_csv(), args.out)


def cmd_dist(args):
    from .metrics import pairwise_table
    from .persistence import PersistenceDiagram

    labels = args.labels.split(",") if args.labels else [Path(p).stem for p in args.inputs]
    if len(labels) != len(args.inputs):
        raise ValidationError("--labels must name every input diagram")
    dgms = [(lab, PersistenceDiagram.from_csv(Path(p))) for lab, p in zip(labels, args.inputs)]
    table = pairwise_table(dgms, args.dim, args.metric, args.p, args.root)
    if args.out not in (None, "-"):
        table.to_csv(args.out)
    sys.stdout.write(table.pretty())


def cmd_stats(args):
    from .metrics import DistanceTable
    from .persistence import PersistenceDiagram
    from .stats import median_bottleneck_summary, permutation_test, wilcoxon_mann_whitney

    if args.test == "wmw":
        a = [float(x) for x in args.a.split(",")]
        b = [float(x) for x in args.b.split(",")]
        rep = wilcoxon_mann_whitney(a, b)
        _emit(rep.to_json(), args.out)
    elif args.test == "perm":
        ga = [PersistenceDiagram.from_csv(Path(p)) for p in args.group_a]
        gb = [PersistenceDiagram.from_csv(Path(p)) for p in args.group_b]
        rep = permutation_test(ga, gb, args.dim, args.n_perm, args.seed, n_jobs=args.threads)
        _emit(rep.to_json(), args.out)
    else:
        tables = [DistanceTable.from_csv(p) for p in args.tables]
        med = median_bottleneck_summary(tables)
        if args.out not in (None, "-"):
            med.to_csv(args.out)
        sys.stdout.write(med.pretty())


def cmd_plot(args):
    from .persistence import PersistenceDiagram
    from .render import render

    if args.kind in ("barcode", "diagram"):
        payload = PersistenceDiagram.from_csv(Path(args.input))
        kwargs = {"cap": args.cap} if args.cap is not None else {}
    elif args.kind == "scatter3":
        payload = _read_cloud(args.input)
        kwargs = {}
    else:
        # distance_series.csv written by the pipeline: plot per-channel medians
        series = {}
        with open(args.input, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                if row["row"] == "median":
                    series.setdefault(int(row["dim"]), []).append(float(row["distance"]))
        payload, kwargs = series, {}
    text = render(args.kind, payload, None, **kwargs)
    _emit(text, args.out)


def cmd_run(args):
    from .pipeline import PipelineConfig, make_synthetic_sets, run

    if args.config:
        cfg = PipelineConfig.from_json(args.config)
    elif args.synthetic:
        cfg = PipelineConfig()
    else:
        raise ValidationError("run needs --config <json> or --synthetic")
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    if args.threads is not None:
        cfg.threads = args.threads
    if args.synthetic:
        cfg.inputs = make_synthetic_sets(Path(cfg.out_dir) / "synthetic_input", seed=cfg.seed)
        cfg.set_labels = None
    manifest = run(cfg)
    sys.stdout.write(f"{len(manifest.artifacts)} artifacts written to {cfg.out_dir}\n")


# parser ------------------------------------------------------------------

def _global_flags(default):
    """Global flags, accepted before or after the subcommand.

    Subcommand copies default to SUPPRESS so they never clobber a value
    given before the subcommand.
    """
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--seed", type=int, default=default, help="master random seed")
    g.add_argument("--out", default=default, help="output file or directory (default stdout)")
    g.add_argument("--config", default=default, help="JSON config (PipelineConfig fields)")
    g.add_argument("--threads", type=int, default=default, help="worker count")
    g.add_argument("-v", "--verbose", action="store_true",
                   default=False if default is None else default)
    return g


def build_parser():
    common = _global_flags(argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="homotop", parents=[_global_flags(None)],
                                     description="Persistent homology of delay-embedded signals "
                                                 "under several dimension reductions.")
    parser.add_argument("--version", action="version", version=f"homotop {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="load segments into a CSV channel matrix")
    p.add_argument("input", help="segment .txt, directory of segments, or CSV matrix")
    p.add_argument("--label", default=None)
    p.add_argument("--orientation", choices=("columns", "rows"), default="columns")
    p.add_argument("--rate", type=float, default=None)
    p.add_argument("--channels", type=int, default=None, help="draw this many channels")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("embed", parents=[common], help="Takens delay embedding")
    p.add_argument("input", help="segment .txt or CSV matrix")
    p.add_argument("--channel", default=None)
    p.add_argument("--rate", type=float, default=None)
    p.add_argument("--dim", type=int, default=12)
    p.add_argument("--lag", type=int, default=1)
    p.add_argument("--fnn", action="store_true", help="choose dim by false nearest neighbours")
    p.add_argument("--max-dim", type=int, default=15)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("reduce", parents=[common], help="dimension reduction of a point cloud")
    p.add_argument("input", help="point-cloud CSV")
    p.add_argument("--method", required=True,
                   choices=("isomap", "krr", "fastica", "leim", "tsne"))
    p.add_argument("--components", type=int, default=3)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="method parameter, e.g. perplexity=20 (repeatable)")
    p.set_defaults(func=cmd_reduce)

    def rips_args(p):
        p.add_argument("--max-dim", type=int, default=None, help="simplex dimension (default 3)")
        p.add_argument("--max-scale", type=float, default=None)
        p.add_argument("--max-points", type=int, default=200)

    p = sub.add_parser("rips", parents=[common], help="Vietoris-Rips filtration")
    p.add_argument("input", help="point-cloud CSV")
    rips_args(p)
    p.set_defaults(func=cmd_rips)

    p = sub.add_parser("persist", parents=[common], help="persistence diagram")
    p.add_argument("input", help="point-cloud CSV, or filtration text with --filtration")
    p.add_argument("--filtration", action="store_true")
    p.add_argument("--keep-zero", action="store_true")
    p.add_argument("--cap-essential", action="store_true")
    rips_args(p)
    p.set_defaults(func=cmd_persist)

    p = sub.add_parser("dist", parents=[common], help="pairwise diagram distances")
    p.add_argument("inputs", nargs="+", help="diagram CSV files")
    p.add_argument("--labels", default=None, help="comma-separated labels")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--metric", choices=("bottleneck", "wasserstein"), default="bottleneck")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--root", action="store_true", help="p-th root of the Wasserstein sum")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("stats", parents=[common], help="hypothesis tests")
    tests = p.add_subparsers(dest="test", required=True)
    q = tests.add_parser("wmw", parents=[common], help="Wilcoxon-Mann-Whitney on two samples")
    q.add_argument("--a", required=True, help="comma-separated sample A")
    q.add_argument("--b", required=True, help="comma-separated sample B")
    q = tests.add_parser("perm", parents=[common], help="landscape permutation test")
    q.add_argument("--group-a", nargs="+", required=True)
    q.add_argument("--group-b", nargs="+", required=True)
    q.add_argument("--dim", type=int, default=1)
    q.add_argument("--n-perm", type=int, default=999)
    q = tests.add_parser("median", parents=[common], help="cell-wise median of distance tables")
    q.add_argument("tables", nargs="+")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("plot", parents=[common], help="render an SVG figure")
    p.add_argument("kind", choices=("barcode", "diagram", "scatter3", "distance_series"))
    p.add_argument("input")
    p.add_argument("--cap", type=float, default=None)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("run", parents=[common], help="full pipeline")
    p.add_argument("--synthetic", action="store_true",
                   help="generate a 5-set x 15-channel sine fixture as input")
    p.set_defaults(func=cmd_run)
    return parser


def _merge_config_defaults(args):
    """Fill unset global flags from ``--config`` (for subcommands other than run)."""
    if not args.config or args.command == "run":
        return
    from .pipeline import PipelineConfig

    cfg = PipelineConfig.from_json(args.config)
    if args.seed is None:
        args.seed = cfg.seed
    if args.threads is None:
        args.threads = cfg.threads


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        _merge_config_defaults(args)
        if args.command != "run":
            args.seed = 0 if args.seed is None else args.seed
            args.threads = 1 if args.threads is None else args.threads
        with warnings.catch_warnings():
            if not args.verbose:
                warnings.simplefilter("ignore", RuntimeWarning)
            args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ComputeError as exc:
        cause = exc.__cause__
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(cause, ValidationError):
            return EXIT_VALIDATION
        if isinstance(cause, OSError):
            return EXIT_IO
        return EXIT_COMPUTE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command line surface: ``extopo <subcommand>``.

Subcommands: ingest-check, epd, featurize, dist, stability, classify,
train, plot.  Every run writes ``manifest.json`` into its output
directory recording the subcommand, the exact configuration, the seed,
library versions, and a sha256 per output file.  Manifests carry no
timestamps, so a rerun with identical inputs produces identical bytes.

Exit codes map error classes to stable numbers for scripting:

    0   success
    1   stability suite reported a failing trial
    2   usage errors (bad flags, unknown names, malformed config file)
    3   dataset ingestion failures
    4   filtration failures
    5   persistence computation failures
    6   vectorization failures
    7   metric failures
    8   loss or trainer failures
    9   augmentation or noise-injection failures
    10  input/output failures

Per-graph work (diagram computation) fans out across ``--workers``
processes (default from EXTOPO_WORKERS, then 1); results are collected
in dataset order and written by the parent alone, so worker count never
changes any output byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .contrastive import LossConfig, TrainResult, train_joint, train_topo
from .errors import (
    AugmentError,
    ExtopoError,
    FiltrationError,
    IngestError,
    LossError,
    MetricError,
    NoiseError,
    PersistenceError,
    VectorizeError,
)
from .evaluate import classify_features
from .filtration import CENTRALITY_NAMES, make_bundle
from .graphs import GraphDataset, parse_tudataset, random_connected_graph
from .metrics import (
    bottleneck,
    diagram_landscape_inf,
    landscape_distance,
    stability_trial,
    wasserstein,
)
from .persistence import epd_bundle, load_diagram, save_diagram
from .plotting import diagram_svg, landscape_svg
from .vectorization import (
    featurize_diagrams,
    fit_feature_config,
    landscape,
    load_landscape,
    read_feature_csv,
    write_feature_csv,
)

_EXIT_BY_CLASS: tuple[tuple[type[ExtopoError], int], ...] = (
    (IngestError, 3),
    (FiltrationError, 4),
    (PersistenceError, 5),
    (VectorizeError, 6),
    (MetricError, 7),
    (LossError, 8),
    (AugmentError, 9),
    (NoiseError, 9),
)


class UsageError(Exception):
    """Bad invocation discovered after argparse (config files, names)."""


## ------------------------------------------------------------- plumbing


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_manifest(out_dir: Path, subcommand: str, seed: int, config: dict, outputs: list[Path]) -> Path:
    manifest = {
        "subcommand": subcommand,
        "seed": seed,
        "config": config,
        "versions": {"extopo": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        "outputs": {p.name: _sha256(p) for p in outputs},
    }
    path = out_dir / "manifest.json"
    path.write_text(_dump_json(manifest))
    return path


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_dataset(spec: str) -> GraphDataset:
    path = Path(spec)
    if not path.is_dir():
        raise IngestError("file", f"dataset directory not found: {spec}")
    return parse_tudataset(path.parent, path.name)


def _parse_filtrations(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    if not names:
        raise UsageError("at least one filtration name required")
    for name in names:
        if name not in CENTRALITY_NAMES:
            raise UsageError(f"unknown filtration {name!r}; choose from {sorted(CENTRALITY_NAMES)}")
    return names


def _worker_count(args) -> int:
    if args.workers is not None:
        return max(1, args.workers)
    env = os.environ.get("EXTOPO_WORKERS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


_TASK_NAMES: list[str] = []


def _row_task_init(names: list[str]) -> None:
    # worker processes receive the filtration list once, not per task
    _TASK_NAMES.clear()
    _TASK_NAMES.extend(names)


def _row_task(graph):
    return epd_bundle(graph, make_bundle(graph, _TASK_NAMES))


def _diagram_rows(ds: GraphDataset, names: list[str], workers: int):
    """One tuple of diagrams per graph, always in dataset order."""
    if workers <= 1:
        _row_task_init(names)
        return [_row_task(g) for g in ds.graphs]
    from concurrent.futures import ProcessPoolExecutor

    chunk = max(1, len(ds.graphs) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers, initializer=_row_task_init, initargs=(names,)) as ex:
        return list(ex.map(_row_task, ds.graphs, chunksize=chunk))


def _summary_params(args) -> dict:
    if args.summary == "EPL":
        return {"k_max": args.k_max, "n_samples": args.samples, "grid": args.grid}
    return {
        "resolution": (args.resolution[0], args.resolution[1]),
        "sigma": args.sigma,
        "weight": args.weight,
    }


## ---------------------------------------------------------- subcommands


def cmd_ingest_check(args) -> int:
    ds = _load_dataset(args.dataset)
    out = _out_dir(args)
    sizes = np.array([g.num_vertices for g in ds.graphs])
    edges = np.array([g.num_edges for g in ds.graphs])
    labels = ds.labels()
    counts = {str(int(c)): int(n) for c, n in zip(*np.unique(labels, return_counts=True))}
    feat = ds.graphs[0].node_features
    report = {
        "name": ds.name,
        "num_graphs": len(ds.graphs),
        "num_classes": ds.num_classes,
        "label_counts": counts,
        "vertices": {"min": int(sizes.min()), "mean": float(sizes.mean()), "max": int(sizes.max())},
        "edges": {"min": int(edges.min()), "mean": float(edges.mean()), "max": int(edges.max())},
        "node_feature_dim": None if feat is None else int(feat.shape[1]),
    }
    report_path = out / "report.json"
    report_path.write_text(_dump_json(report))
    _write_manifest(out, "ingest-check", args.seed, {"dataset": args.dataset}, [report_path])
    print(
        f"{ds.name}: {report['num_graphs']} graphs, {ds.num_classes} classes, "
        f"vertices {report['vertices']['min']}..{report['vertices']['max']} "
        f"(mean {report['vertices']['mean']:.1f}), "
        f"edges {report['edges']['min']}..{report['edges']['max']} "
        f"(mean {report['edges']['mean']:.1f}), "
        f"node features: {report['node_feature_dim'] or 'none'}"
    )
    return 0


def cmd_epd(args) -> int:
    names = _parse_filtrations(args.filtrations)
    ds = _load_dataset(args.dataset)
    out = _out_dir(args)
    rows = _diagram_rows(ds, names, _worker_count(args))
    outputs = []
    for gi, row in enumerate(rows):
        for epd in row:
            path = out / f"g{gi:05d}_{epd.function_name}.txt"
            save_diagram(epd, path)
            outputs.append(path)
    config = {"dataset": args.dataset, "filtrations": names}
    _write_manifest(out, "epd", args.seed, config, outputs)
    print(f"wrote {len(outputs)} diagram files to {out}")
    return 0


def cmd_featurize(args) -> int:
    names = _parse_filtrations(args.filtrations)
    ds = _load_dataset(args.dataset)
    out = _out_dir(args)
    rows = _diagram_rows(ds, names, _worker_count(args))
    params = _summary_params(args)
    fcfg = fit_feature_config(rows, names, args.summary, **params)
    vectors = [featurize_diagrams(row, fcfg) for row in rows]
    csv_path = out / "features.csv"
    write_feature_csv(csv_path, vectors, ds.labels())
    config = {"dataset": args.dataset, "filtrations": names, "summary": args.summary, **params}
    if args.summary == "EPI":
        config["resolution"] = list(config["resolution"])
    _write_manifest(out, "featurize", args.seed, config, [csv_path])
    print(f"wrote {len(vectors)} rows x {fcfg.length()} features to {csv_path}")
    return 0


def _parse_order(p_text: str) -> float:
    if p_text.lower() in ("inf", "infinity"):
        return float("inf")
    try:
        return float(p_text)
    except ValueError:
        raise UsageError(f"--p must be a number or 'inf', got {p_text!r}") from None


def _pair_distance(epd_a, epd_b, args, p: float) -> float:
    if args.metric == "bottleneck":
        return bottleneck(epd_a, epd_b)
    if args.metric == "wasserstein":
        if not np.isfinite(p):
            raise UsageError("wasserstein order must be finite")
        return wasserstein(epd_a, epd_b, p)
    ls_a = landscape(epd_a, args.k_max, args.grid, args.samples)
    ls_b = landscape(epd_b, args.k_max, args.grid, args.samples)
    return landscape_distance(ls_a, ls_b, p)


def cmd_dist(args) -> int:
    p = _parse_order(args.p)
    out = _out_dir(args)
    path_a = Path(args.a)
    path_b = Path(args.b) if args.b is not None else None
    config = {
        "a": args.a,
        "b": args.b,
        "metric": args.metric,
        "p": args.p,
        "k_max": args.k_max,
        "samples": args.samples,
        "grid": args.grid,
    }
    if path_a.is_file():
        if path_b is None or not path_b.is_file():
            raise UsageError("dist needs two diagram files or one/two directories")
        d = _pair_distance(load_diagram(path_a), load_diagram(path_b), args, p)
        result_path = out / "result.json"
        result_path.write_text(_dump_json({"distance": d}))
        _write_manifest(out, "dist", args.seed, config, [result_path])
        print(f"{d:.17g}")
        return 0
    if not path_a.is_dir():
        raise IngestError("file", f"no such file or directory: {args.a}")
    files_a = sorted(path_a.glob("*.txt"))
    files_b = sorted(path_b.glob("*.txt")) if path_b is not None else files_a
    if not files_a or not files_b:
        raise IngestError("file", "no .txt diagram files found")
    diagrams_a = [load_diagram(f) for f in files_a]
    diagrams_b = [load_diagram(f) for f in files_b] if path_b is not None else diagrams_a
    matrix_path = out / "distances.csv"
    with open(matrix_path, "w") as fh:
        fh.write("," + ",".join(f.stem for f in files_b) + "\n")
        for name_a, epd_a in zip((f.stem for f in files_a), diagrams_a):
            cells = [f"{_pair_distance(epd_a, epd_b, args, p):.17g}" for epd_b in diagrams_b]
            fh.write(name_a + "," + ",".join(cells) + "\n")
    _write_manifest(out, "dist", args.seed, config, [matrix_path])
    print(f"wrote {len(files_a)}x{len(files_b)} distance matrix to {matrix_path}")
    return 0


def cmd_stability(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    if args.epsilon < 0:
        raise UsageError("--epsilon must be nonnegative")
    out = _out_dir(args)
    n = args.size
    m = min(2 * n, n * (n - 1) // 2)
    rows = []
    all_pass = True
    for trial in range(args.trials):
        graph_seed, shift_seed = (
            int(s) for s in np.random.SeedSequence((args.seed, trial)).generate_state(2)
        )
        g = random_connected_graph(n, m, graph_seed)
        f = make_bundle(g, [args.filtration]).functions[0]
        if args.epsilon == 0:
            # zero perturbation: the function is unchanged, all quantities vanish
            epd = epd_bundle(g, make_bundle(g, [args.filtration]))[0]
            report = {
                "lhs": diagram_landscape_inf(epd, epd),
                "mid": bottleneck(epd, epd),
                "rhs": 0.0,
                "pass": True,
            }
        else:
            report = stability_trial(g, f, args.epsilon, shift_seed)
        all_pass = all_pass and bool(report["pass"])
        rows.append({k: (bool(v) if k == "pass" else float(v)) for k, v in report.items()})
        print(
            f"trial {trial:4d}: landscape_inf={report['lhs']:.6g} "
            f"bottleneck={report['mid']:.6g} bound={report['rhs']:.6g} "
            f"{'pass' if report['pass'] else 'FAIL'}"
        )
    report_path = out / "report.json"
    report_path.write_text(_dump_json({"trials": rows, "all_pass": all_pass}))
    config = {
        "trials": args.trials,
        "size": args.size,
        "epsilon": args.epsilon,
        "filtration": args.filtration,
    }
    _write_manifest(out, "stability", args.seed, config, [report_path])
    print(f"{sum(r['pass'] for r in rows)}/{len(rows)} trials passed")
    return 0 if all_pass else 1


def cmd_classify(args) -> int:
    out = _out_dir(args)
    names, X, y = read_feature_csv(args.features)
    report = classify_features(X, y, args.folds, args.seed, step=args.step, iters=args.iters)
    for i, acc in enumerate(report.fold_accuracies):
        print(f"fold {i:2d}: accuracy {acc:.4f}")
    print(f"mean accuracy {report.mean:.4f} +- {report.std:.4f} over {args.folds} folds")
    report_path = out / "report.json"
    report_path.write_text(
        _dump_json(
            {
                "fold_accuracies": list(report.fold_accuracies),
                "mean": report.mean,
                "std": report.std,
                "n_features": len(names),
                "n_rows": int(X.shape[0]),
            }
        )
    )
    config = {"features": args.features, "folds": args.folds, "step": args.step, "iters": args.iters}
    _write_manifest(out, "classify", args.seed, config, [report_path])
    return 0


_TRAIN_KEYS = ("zeta", "alpha", "beta", "step", "epochs", "seed", "ratio", "filtrations", "summary")


def _parse_train_config(path: Path) -> dict[str, str]:
    """key = value lines; # starts a comment; unknown keys are rejected."""
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    out: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _TRAIN_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}; known: {', '.join(_TRAIN_KEYS)}")
        out[key] = value
    return out


def _train_settings(args) -> dict:
    """Merge defaults, config file, and explicit flags (flags win)."""
    merged = {
        "zeta": 0.2,
        "alpha": 1.0,
        "beta": 1.0,
        "step": 5e-3,
        "epochs": 50,
        "seed": 0,
        "ratio": 0.05,
        "filtrations": "degree,betweenness",
        "summary": "EPL",
    }
    if args.config is not None:
        raw = _parse_train_config(Path(args.config))
        casts = {
            "zeta": float,
            "alpha": float,
            "beta": float,
            "step": float,
            "epochs": int,
            "seed": int,
            "ratio": float,
            "filtrations": str,
            "summary": str,
        }
        for key, text in raw.items():
            try:
                merged[key] = casts[key](text)
            except ValueError:
                raise UsageError(f"config key {key!r}: cannot parse {text!r}") from None
    for key in _TRAIN_KEYS:
        flag = getattr(args, key if key != "filtrations" else "filtrations", None)
        if flag is not None:
            merged[key] = flag
    if merged["summary"] not in ("EPL", "EPI"):
        raise UsageError(f"summary must be EPL or EPI, got {merged['summary']!r}")
    return merged


def _model_payload(result: TrainResult, settings: dict, hidden: tuple[int, ...], out_dim: int) -> dict:
    plans = []
    for fn, plan in zip(result.feature_config.functions, result.feature_config.plans):
        entry = {"function": fn}
        if hasattr(plan, "t_grid"):
            entry["kind"] = "landscape"
            entry["k_max"] = plan.k_max
            entry["t_grid"] = [float(v) for v in plan.t_grid]
        else:
            entry["kind"] = "image"
            entry["bounds"] = [float(v) for v in plan.bounds]
            entry["sigma"] = [float(v) for v in plan.sigma]
            entry["resolution"] = list(plan.resolution)
            entry["weight"] = plan.weight
        plans.append(entry)
    return {
        "hidden": list(hidden),
        "out_dim": out_dim,
        "weights": [w.tolist() for w in result.mlp.weights],
        "biases": [b.tolist() for b in result.mlp.biases],
        "feature": {"summary": result.feature_config.summary, "plans": plans},
        "standardizer": {
            "mean": [float(v) for v in result.feat_mean],
            "scale": [float(v) for v in result.feat_scale],
        },
        "settings": {k: settings[k] for k in _TRAIN_KEYS},
    }


def cmd_train(args) -> int:
    settings = _train_settings(args)
    names = _parse_filtrations(settings["filtrations"])
    ds = _load_dataset(args.dataset)
    out = _out_dir(args)
    hidden = tuple(int(t) for t in str(args.hidden).split(",") if t.strip())
    cfg = LossConfig(zeta=settings["zeta"], alpha=settings["alpha"], beta=settings["beta"])
    trainer = train_joint if args.joint else train_topo
    result = trainer(
        ds,
        names,
        settings["summary"],
        cfg,
        settings["epochs"],
        settings["seed"],
        step=settings["step"],
        drop_ratio=settings["ratio"],
        hidden=hidden,
        out_dim=args.out_dim,
    )
    model_path = out / "model.json"
    model_path.write_text(_dump_json(_model_payload(result, settings, hidden, args.out_dim)))
    trace_path = out / "trace.csv"
    with open(trace_path, "w") as fh:
        fh.write("epoch,loss\n")
        for i, v in enumerate(result.losses):
            fh.write(f"{i},{v:.17g}\n")
    config = {
        "dataset": args.dataset,
        "joint": bool(args.joint),
        "hidden": list(hidden),
        "out_dim": args.out_dim,
        **{k: settings[k] for k in _TRAIN_KEYS if k != "seed"},
    }
    _write_manifest(out, "train", settings["seed"], config, [model_path, trace_path])
    if result.losses:
        first, last = result.losses[0], result.losses[-1]
        ratio = last / first if first else float("nan")
        print(f"trained {settings['epochs']} epochs: loss {first:.4f} -> {last:.4f} (ratio {ratio:.4f})")
    else:
        print("trained 0 epochs: model equals seeded initialization")
    return 0


def cmd_plot(args) -> int:
    path = Path(args.input)
    if not path.is_file():
        raise IngestError("file", f"no such file: {args.input}")
    out = _out_dir(args)
    with open(path) as fh:
        first = fh.readline()
    if first.startswith("#"):
        svg = diagram_svg(load_diagram(path))
    elif first.startswith("k_max"):
        svg = landscape_svg(load_landscape(path))
    else:
        raise VectorizeError("grid", f"{path}: neither a diagram nor a landscape file")
    svg_path = out / (path.stem + ".svg")
    svg_path.write_text(svg)
    _write_manifest(out, "plot", args.seed, {"input": args.input}, [svg_path])
    print(f"wrote {svg_path}")
    return 0


## --------------------------------------------------------------- parser


def _add_common(sub, *, seed_help: str = "seed recorded in the manifest") -> None:
    sub.add_argument("--out", default="extopo_out", help="output directory (default: extopo_out)")
    sub.add_argument("--seed", type=int, default=0, help=seed_help)


def _add_summary_flags(sub) -> None:
    sub.add_argument("--summary", choices=("EPL", "EPI"), default="EPL", help="feature summary kind")
    sub.add_argument("--k-max", dest="k_max", type=int, default=2, help="landscape levels per side")
    sub.add_argument("--samples", type=int, default=50, help="landscape grid sample count")
    sub.add_argument("--grid", default="uniform", help="landscape grid: uniform or critical")
    sub.add_argument(
        "--resolution", type=int, nargs=2, default=(50, 50), metavar=("ROWS", "COLS"),
        help="image resolution",
    )
    sub.add_argument("--sigma", type=float, default=None, help="image kernel width (default: fitted)")
    sub.add_argument(
        "--weight", choices=("persistence", "constant"), default="persistence",
        help="image point weight",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extopo",
        description="Extended-persistence features, distances, and contrastive training for graphs.",
    )
    subs = parser.add_subparsers(dest="subcommand", required=True)

    s = subs.add_parser("ingest-check", help="parse a dataset directory and report its shape")
    s.add_argument("dataset", help="dataset directory in the adjacency/indicator text layout")
    _add_common(s)
    s.set_defaults(func=cmd_ingest_check)

    s = subs.add_parser("epd", help="write one diagram file per graph and filtration")
    s.add_argument("dataset")
    s.add_argument("--filtrations", default="degree", help="comma list of vertex functions")
    s.add_argument("--workers", type=int, default=None, help="process count (default: EXTOPO_WORKERS or 1)")
    _add_common(s)
    s.set_defaults(func=cmd_epd)

    s = subs.add_parser("featurize", help="write a feature CSV for a dataset")
    s.add_argument("dataset")
    s.add_argument("--filtrations", default="degree,betweenness")
    s.add_argument("--workers", type=int, default=None)
    _add_summary_flags(s)
    _add_common(s)
    s.set_defaults(func=cmd_featurize)

    s = subs.add_parser("dist", help="distance between two diagram files, or a matrix over directories")
    s.add_argument("a", help="diagram file or directory")
    s.add_argument("b", nargs="?", default=None, help="second file or directory (default: all pairs of A)")
    s.add_argument("--metric", choices=("bottleneck", "wasserstein", "landscape"), default="bottleneck")
    s.add_argument("--p", default="2", help="order: wasserstein q or landscape p ('inf' allowed)")
    s.add_argument("--k-max", dest="k_max", type=int, default=2)
    s.add_argument("--samples", type=int, default=50)
    s.add_argument("--grid", default="uniform")
    _add_common(s)
    s.set_defaults(func=cmd_dist)

    s = subs.add_parser("stability", help="random perturbation trials of the distance chain")
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--size", type=int, default=10, help="vertices per random graph")
    s.add_argument("--epsilon", type=float, default=0.3, help="perturbation half-width")
    s.add_argument("--filtration", default="degree", choices=tuple(sorted(CENTRALITY_NAMES)))
    _add_common(s, seed_help="seed for graphs and perturbations")
    s.set_defaults(func=cmd_stability)

    s = subs.add_parser("classify", help="stratified k-fold accuracy of a feature CSV")
    s.add_argument("features", help="feature CSV with final label column")
    s.add_argument("--folds", type=int, default=10)
    s.add_argument("--step", type=float, default=0.5, help="classifier gradient step")
    s.add_argument("--iters", type=int, default=500, help="classifier gradient iterations")
    _add_common(s, seed_help="fold shuffling seed")
    s.set_defaults(func=cmd_classify)

    s = subs.add_parser("train", help="contrastive training of the topological head")
    s.add_argument("dataset")
    s.add_argument("--config", default=None, help="key = value file; flags override it")
    s.add_argument("--zeta", type=float, default=None)
    s.add_argument("--alpha", type=float, default=None)
    s.add_argument("--beta", type=float, default=None)
    s.add_argument("--step", type=float, default=None)
    s.add_argument("--epochs", type=int, default=None)
    s.add_argument("--ratio", type=float, default=None, help="node-drop ratio per view")
    s.add_argument("--filtrations", default=None)
    s.add_argument("--summary", choices=("EPL", "EPI"), default=None)
    s.add_argument("--hidden", default="128", help="comma list of hidden widths")
    s.add_argument("--out-dim", dest="out_dim", type=int, default=64)
    s.add_argument("--joint", action="store_true", help="add the fixed graph-encoder branch to the trace")
    _add_common(s, seed_help="training seed (overrides config file)")
    s.set_defaults(func=cmd_train, seed=None)

    s = subs.add_parser("plot", help="render a diagram or landscape file to SVG")
    s.add_argument("input", help="diagram (.txt) or landscape file")
    _add_common(s)
    s.set_defaults(func=cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"extopo: usage error: {e}", file=sys.stderr)
        return 2
    except ExtopoError as e:
        for cls, code in _EXIT_BY_CLASS:
            if isinstance(e, cls):
                print(f"extopo: {type(e).__name__}: {e}", file=sys.stderr)
                return code
        print(f"extopo: {type(e).__name__}: {e}", file=sys.stderr)
        return 10
    except (OSError, ValueError) as e:
        print(f"extopo: {type(e).__name__}: {e}", file=sys.stderr)
        return 10


if __name__ == "__main__":
    sys.exit(main())

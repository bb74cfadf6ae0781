"""``recipnet`` command line: one subcommand per analysis, CSV/JSON outputs.

Exit status: 0 on success, 2 on usage errors, 1 on data errors (with a
single JSON line on stderr).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

from . import __version__
from .hetero import (
    TruncationPolicy,
    first_response_table,
    mean_trust_response,
    restrict_to_common_window,
    trust_completion_table,
)
from .ingest import (
    IngestError,
    parse_demographics,
    parse_edge_log,
    sessionize_chat,
    write_demographics,
    write_edge_log,
)
from .model import Event, EventError, Layer, build_graph, events_window
from .netstats import DEGREE_MODES, MULTIPLICITIES, degree_distribution, fit_power_law
from .predict import (
    DEFAULT_ABLATION,
    FeatureConfig,
    FeatureIndex,
    Hyperparams,
    build_instances,
    evaluate,
    feature_ablation,
    feature_matrix,
)
from .reciprocity import (
    cancellation_analysis,
    collapse_trust,
    layer_partitions,
    reciprocation_stats,
    response_time_histogram,
)
from .synth import SynthConfig, generate, load_config

log = logging.getLogger("recipnet")

SUBCOMMANDS = (
    "ingest-check", "degree-dist", "recip-stats", "response-times", "cancellation",
    "hetero-first-response", "trust-completion", "extract-features", "train-eval",
    "ablation", "synth",
)


class DataError(Exception):
    pass


# -- output helpers -----------------------------------------------------------


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(path, rows, header=None) -> None:
    rows = list(rows)
    if header is None:
        header = list(rows[0].keys()) if rows else []
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(row.get(h)) for h in header])


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, allow_nan=False)
        fh.write("\n")


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _stat_rows(d: dict) -> list:
    return [{"stat": k, "value": v} for k, v in d.items()]


# -- argument parsing -----------------------------------------------------------


def parse_window(text: str):
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be START:END epoch seconds, got {text!r}")
    if lo > hi:
        raise argparse.ArgumentTypeError("window START must not exceed END")
    return lo, hi


def parse_k_range(text: str) -> list:
    """``A..B`` (inclusive), ``a,b,c`` or a single integer."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split(".."))
            ks = list(range(lo, hi + 1))
        else:
            ks = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad K range {text!r}")
    if not ks or min(ks) < 0:
        raise argparse.ArgumentTypeError("K values must be non-negative and non-empty")
    return ks


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _layer(text):
    try:
        return Layer.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="recipnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"recipnet {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", required=True)

    def add(name, help, *, edges=True, out=True, window=True):
        p = sub.add_parser(name, help=help)
        if edges:
            p.add_argument("--edges", required=True, metavar="PATH")
        if window:
            p.add_argument("--window", type=parse_window, metavar="START:END")
        if out:
            p.add_argument("--out", required=True, metavar="PATH")
            p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--threads", type=int, default=1, metavar="N")
        return p

    p = add("ingest-check", "validate an edge log (and demographics) and report accounting")
    p.add_argument("--demo", metavar="PATH")

    p = add("degree-dist", "degree distribution and power-law fit of one layer")
    p.add_argument("--layer", type=_layer, required=True)
    p.add_argument("--mode", choices=DEGREE_MODES, default="total")
    p.add_argument("--multiplicity", choices=MULTIPLICITIES, default="multi")

    p = add("recip-stats", "reciprocation counts, rates and mean response times")
    p.add_argument("--layer", type=_layer, required=True)

    p = add("response-times", "response-time histogram of one layer")
    p.add_argument("--layer", type=_layer, required=True)
    p.add_argument("--bin-days", type=_positive_float, default=1.0)

    add("cancellation", "trust cancellation reciprocation and patience")
    add("hetero-first-response", "first reply layer per first forward layer")
    p = add("trust-completion", "chat/trade replies for complete vs incomplete trust")
    p.add_argument("--horizon-days", type=_positive_float)

    def model_args(p, k_multi=False):
        p.add_argument("--demo", required=True, metavar="PATH")
        if k_multi:
            p.add_argument("--k", type=parse_k_range, default=list(range(0, 26)), metavar="RANGE")
        else:
            p.add_argument("--k", type=int, default=0, metavar="DAYS")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--l2", type=float, default=Hyperparams.l2)
        p.add_argument("--lr", type=float, default=Hyperparams.learning_rate)
        p.add_argument("--epochs", type=int, default=Hyperparams.epochs)

    p = add("extract-features", "one feature row per trust request")
    p.add_argument("--demo", metavar="PATH")
    p.add_argument("--features", default="trust+trade+homophily")
    p.add_argument("--k", type=int, default=0, metavar="DAYS")

    p = add("train-eval", "cross-validated logistic regression on one feature set")
    model_args(p)
    p.add_argument("--features", default="trust+trade")
    p.add_argument("--folds", type=int, default=5)

    p = add("ablation", "feature-set and window-K sweep")
    model_args(p, k_multi=True)
    p.add_argument("--feature-sets", default=",".join(
        c.label.replace("(K=0)", "") for c in DEFAULT_ABLATION
    ))
    p.add_argument("--folds", type=int, default=5)

    p = add("synth", "generate a seeded synthetic dataset", edges=False, out=False, window=False)
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", required=True, metavar="DIR")
    return parser


# -- loading --------------------------------------------------------------------


def _read_events(path):
    with open(path, "rb") as fh:
        return parse_edge_log(fh)


def load_graph(path, window=None):
    """Parse, sessionize chat, collapse trust and build the graph."""
    events, report = _read_events(path)
    events = sessionize_chat(events)
    events, collapse = collapse_trust(events)
    if window is not None:
        events = [e for e in events if window[0] <= e.ts <= window[1]]
    else:
        window = events_window(events)
    return build_graph(events, window), report, collapse


def load_demographics(path):
    rejects = []
    with open(path, "rb") as fh:
        demo = parse_demographics(fh, rejects)
    if rejects:
        log.info("demographics: %d records rejected", len(rejects))
    return demo, rejects


def _fmt(args) -> str:
    if args.format:
        return args.format
    return "csv" if str(args.out).lower().endswith(".csv") else "json"


# -- subcommands ------------------------------------------------------------------


def cmd_ingest_check(args):
    _, report = _read_events(args.edges)
    out = report.to_dict()
    out["first_rejections"] = [{"line": n, "reason": r} for n, r in report.rejected[:20]]
    if args.demo:
        demo, rejects = load_demographics(args.demo)
        out["demographics"] = {"players": len(demo), "rejected": len(rejects)}
    if _fmt(args) == "csv":
        write_csv(args.out, _stat_rows({k: v for k, v in out.items() if not isinstance(v, (dict, list))}))
    else:
        write_json(args.out, out)
    return [args.out]


def cmd_degree_dist(args):
    graph, _, _ = load_graph(args.edges, args.window)
    dist = degree_distribution(graph, args.layer, args.mode, args.multiplicity)
    try:
        fit = fit_power_law(dist.counts).to_dict()
    except ValueError as exc:
        log.info("no power-law fit: %s", exc)
        fit = None
    outputs = [args.out]
    if _fmt(args) == "csv":
        write_csv(args.out, [{"x": d, "count": c} for d, c in dist.counts.items()], ["x", "count"])
        fit_path = str(Path(args.out).with_suffix(".fit.json"))
        write_json(fit_path, {"layer": args.layer.tag, "mode": args.mode,
                              "multiplicity": args.multiplicity, "fit": fit})
        outputs.append(fit_path)
    else:
        write_json(args.out, {
            "layer": args.layer.tag, "mode": args.mode, "multiplicity": args.multiplicity,
            "distribution": [[d, c] for d, c in dist.counts.items()], "fit": fit,
        })
    return outputs


def cmd_recip_stats(args):
    graph, _, _ = load_graph(args.edges, args.window)
    row = reciprocation_stats(graph, args.layer, args.threads).to_dict()
    if _fmt(args) == "csv":
        write_csv(args.out, _stat_rows(row))
    else:
        write_json(args.out, row)
    return [args.out]


def cmd_response_times(args):
    graph, _, _ = load_graph(args.edges, args.window)
    parts = layer_partitions(graph, args.layer, args.threads)
    hist = response_time_histogram(parts, args.bin_days)
    rows = [{"bin_start_days": k * args.bin_days, "count": n} for k, n in hist.items()]
    if _fmt(args) == "csv":
        write_csv(args.out, rows, ["bin_start_days", "count"])
    else:
        mid = {(k + 0.5) * args.bin_days: n for k, n in hist.items()}
        try:
            fit = fit_power_law(mid).to_dict()
        except ValueError:
            fit = None
        closed = [p.response_time_days for p in parts if p.closed]
        write_json(args.out, {
            "layer": args.layer.tag,
            "bin_days": args.bin_days,
            "closed_partitions": len(closed),
            "mean_response_days": sum(closed) / len(closed) if closed else None,
            "histogram": rows,
            "fit_on_bin_midpoints": fit,
        })
    return [args.out]


def cmd_cancellation(args):
    graph, _, collapse = load_graph(args.edges, args.window)
    stats = cancellation_analysis(graph.events).to_dict()
    if _fmt(args) == "csv":
        write_csv(args.out, _stat_rows(stats))
    else:
        write_json(args.out, {**stats, "trust_collapse": collapse.to_dict()})
    return [args.out]


def cmd_hetero_first_response(args):
    graph, _, _ = load_graph(args.edges, args.window)
    graph = restrict_to_common_window(graph)
    rows = first_response_table(graph).rows()
    if _fmt(args) == "csv":
        write_csv(args.out, rows)
    else:
        write_json(args.out, {"window": list(graph.window), "rows": rows})
    return [args.out]


def cmd_trust_completion(args):
    graph, _, _ = load_graph(args.edges, args.window)
    graph = restrict_to_common_window(graph)
    if args.horizon_days:
        policy = TruncationPolicy(args.horizon_days)
    else:
        policy = mean_trust_response(graph)
    rows = trust_completion_table(graph, policy).rows()
    if _fmt(args) == "csv":
        write_csv(args.out, rows)
    else:
        write_json(args.out, {"window": list(graph.window), "horizon_days": policy.horizon_days, "rows": rows})
    return [args.out]


def _hp(args):
    return Hyperparams(l2=args.l2, learning_rate=args.lr, epochs=args.epochs)


def cmd_extract_features(args):
    graph, _, _ = load_graph(args.edges, args.window)
    config = FeatureConfig.parse(args.features, args.k)
    demo = load_demographics(args.demo)[0] if args.demo else {}
    if config.include_homophily and not args.demo:
        raise DataError("homophily features need --demo")
    fm = feature_matrix(build_instances(graph), FeatureIndex(graph), demo, config, args.threads)
    rows = []
    for inst, x in zip(fm.instances, fm.X):
        row = {"initiator": inst.initiator, "responder": inst.responder, "t0": inst.t0,
               "label": int(inst.reciprocated)}
        row.update({n: int(v) for n, v in zip(fm.names, x)})
        rows.append(row)
    header = ["initiator", "responder", "t0", "label"] + fm.names
    if _fmt(args) == "csv":
        write_csv(args.out, rows, header)
    else:
        write_json(args.out, {"features": fm.names, "skipped": len(fm.skipped), "rows": rows})
    if fm.skipped:
        log.info("skipped %d instances with missing demographics", len(fm.skipped))
    return [args.out]


MODEL_TABLE_HEADER = ["feature_set", "K", "CWA", "AUC", "avg_precision", "avg_recall", "F_measure"]


def _model_row(config, report, k=None):
    m = report.mean
    return {
        "feature_set": config.label, "K": k,
        "CWA": m["cwa"], "AUC": m["auc"], "avg_precision": m["avg_precision"],
        "avg_recall": m["avg_recall"], "F_measure": m["f_measure"],
    }


def cmd_train_eval(args):
    graph, _, _ = load_graph(args.edges, args.window)
    demo, _ = load_demographics(args.demo)
    config = FeatureConfig.parse(args.features, args.k)
    fm = feature_matrix(build_instances(graph), FeatureIndex(graph), demo, config, args.threads)
    report = evaluate(fm.X, fm.y, fm.names, args.folds, args.seed, _hp(args), args.threads)
    if _fmt(args) == "csv":
        write_csv(args.out, [_model_row(config, report, args.k if config.include_trade else None)], MODEL_TABLE_HEADER)
    else:
        write_json(args.out, {"feature_set": config.label, "skipped": len(fm.skipped), **report.to_dict()})
    return [args.out]


def cmd_ablation(args):
    graph, _, _ = load_graph(args.edges, args.window)
    demo, _ = load_demographics(args.demo)
    configs = [FeatureConfig.parse(s) for s in args.feature_sets.split(",") if s.strip()]
    results = feature_ablation(graph, demo, configs, args.k, args.folds, args.seed, _hp(args), args.threads)
    if _fmt(args) == "csv":
        rows = [_model_row(c, r, c.k_days if c.include_trade else None) for c, r in results]
        write_csv(args.out, rows, MODEL_TABLE_HEADER)
    else:
        write_json(args.out, [
            {"feature_set": c.label, "K": c.k_days if c.include_trade else None, **r.to_dict()}
            for c, r in results
        ])
    return [args.out]


def cmd_synth(args):
    config = load_config(args.config) if args.config else SynthConfig().validate()
    if args.seed is not None:
        config.seed = args.seed
    events, demo, truth = generate(config)
    events = sorted(events, key=Event.sort_key)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "edges.csv", out / "demographics.csv", out / "ground_truth.json"]
    with open(paths[0], "w", encoding="utf-8", newline="") as fh:
        write_edge_log(events, fh)
    with open(paths[1], "w", encoding="utf-8", newline="") as fh:
        write_demographics(demo, fh)
    write_json(paths[2], truth.to_dict())
    args.resolved_synth_config = config.to_dict()
    return [str(p) for p in paths]


COMMANDS = {
    "ingest-check": cmd_ingest_check,
    "degree-dist": cmd_degree_dist,
    "recip-stats": cmd_recip_stats,
    "response-times": cmd_response_times,
    "cancellation": cmd_cancellation,
    "hetero-first-response": cmd_hetero_first_response,
    "trust-completion": cmd_trust_completion,
    "extract-features": cmd_extract_features,
    "train-eval": cmd_train_eval,
    "ablation": cmd_ablation,
    "synth": cmd_synth,
}


def _manifest(args, outputs, elapsed):
    config = {}
    for k, v in sorted(vars(args).items()):
        if k == "command":
            continue
        if isinstance(v, Layer):
            v = v.tag
        elif isinstance(v, tuple):
            v = list(v)
        config[k] = v
    inputs = {}
    for key in ("edges", "demo", "config"):
        path = getattr(args, key, None)
        if path:
            inputs[path] = _digest(path)
    return {
        "subcommand": args.command,
        "config": config,
        "input_digests": inputs,
        "outputs": outputs,
        "wall_clock_seconds": elapsed,
        "version": __version__,
    }


def _setup_logging():
    level = os.environ.get("RECIPNET_LOG", "error").upper()
    if level not in ("ERROR", "INFO", "DEBUG"):
        level = "ERROR"
    logging.basicConfig(level=getattr(logging, level), format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "threads", 1) < 1:
        parser.print_usage(sys.stderr)
        print("recipnet: error: --threads must be >= 1", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        outputs = COMMANDS[args.command](args)
    except (DataError, IngestError, EventError, ValueError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "command": args.command, "message": str(exc)}),
              file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - start
    if args.command == "synth":
        manifest_path = Path(args.out_dir) / "manifest.json"
    else:
        manifest_path = Path(str(args.out) + ".manifest.json")
    write_json(manifest_path, _manifest(args, outputs, elapsed))
    return 0


if __name__ == "__main__":
    sys.exit(main())

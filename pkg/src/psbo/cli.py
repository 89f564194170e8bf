"""Command-line interface: ``psbo search|bench|predict|trace``.

Exit codes: 0 on success, 1 when a run fails, 2 for usage, configuration
and input errors. Configuration comes from the built-in defaults, then the
optional ``--config`` file, then command-line flags, each layer overriding
the previous one.
"""

from __future__ import annotations

import argparse
import collections
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, SearchConfig, make_config, read_config_file
from .dataset import DatasetError, load_dataset, load_feature_rows

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad flags, configuration or input files (exit code 2)."""


def _err(msg: str) -> None:
    print(f"psbo: error: {msg}", file=sys.stderr)


# ----------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------

def build_config(args) -> SearchConfig:
    """Defaults, then the config file, then flags."""
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    flags = {"data": getattr(args, "data", None), "format": getattr(args, "format", None),
             "target": getattr(args, "target", None), "seed": getattr(args, "seed", None),
             "clock": getattr(args, "clock", None), "budget": getattr(args, "budget", None),
             "out": getattr(args, "out", None)}
    if isinstance(flags["data"], list):  # bench takes several data files
        flags["data"] = None
    values.update({k: v for k, v in flags.items() if v is not None})
    if getattr(args, "technique_off", None):
        values["technique_off"] = sorted(set(args.technique_off))
    if getattr(args, "algorithms", None):
        values["algorithms"] = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    for pair in getattr(args, "set", None) or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, raw = (s.strip() for s in pair.split("=", 1))
        try:
            values[key] = json.loads(raw)
        except json.JSONDecodeError:
            values[key] = raw
    return make_config(values)


def _load(path, format, target):
    try:
        return load_dataset(path, format=format, target=target)
    except FileNotFoundError:
        raise UsageError(f"data file not found: {path}") from None
    except DatasetError as exc:
        raise UsageError(f"{path}: {exc}") from None


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_search(args) -> int:
    from .engine import Trace, run_search
    from .learnzoo import save_model

    cfg = build_config(args)
    if cfg.data is None:
        raise UsageError("--data is required (or set data in the config file)")
    data = _load(cfg.data, cfg.format, cfg.target)
    out = Path(cfg.out or "psbo-out")
    out.mkdir(parents=True, exist_ok=True)
    trace = Trace(out / "trace.jsonl")
    try:
        report = run_search(cfg, data, trace=trace)
    finally:
        trace.close()
    (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    save_model(report.model, out / "model.json", data)
    if not args.quiet:
        ch = report.champion
        cv = "n/a" if ch["cv_error"] is None else f"{ch['cv_error']:.4f}"
        print(f"champion: {ch['algorithm']} ({ch['family']}), cross-validated error {cv}")
        print(f"distinct combinations tested: {report.total_distinct}; "
              f"search cost: {report.search_cost:.1f}"
              + (" (stopped by the global budget)" if report.truncated else ""))
        print(f"wrote {out / 'report.json'}, {out / 'model.json'}, {out / 'trace.jsonl'}")
    return EXIT_OK


def cmd_bench(args) -> int:
    from . import bench

    cfg = build_config(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    methods += [f"no-t{t}" for t in sorted(set(args.technique_off or ()))]
    try:
        for m in methods:
            bench.parse_method(m)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    # the ablation flags name methods here; the shared config keeps all techniques on
    cfg = cfg.replace(technique_off=[])
    datasets = []
    for name in args.dataset or ([] if args.data else list(bench.DEFAULT_DATASETS)):
        try:
            datasets.append(bench.get_dataset(name))
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    for path in args.data or []:
        datasets.append(_load(path, args.format, args.target))
    if args.repeats < 1:
        raise UsageError("--repeats must be at least 1")
    seeds = list(range(cfg.seed, cfg.seed + args.repeats))
    out = Path(cfg.out or "psbo-bench")

    def progress(cell):
        if not args.quiet:
            print(f"{cell.dataset} {cell.method} seed {cell.seed}: test error "
                  f"{cell.test_error:.4f}, cost {cell.search_cost:.1f}, "
                  f"{cell.distinct} distinct", flush=True)

    bench.run_bench(datasets, seeds, methods, cfg, out_dir=out / "cells", progress=progress)
    rows = bench.aggregate(bench.load_cells(out / "cells"))
    bench.write_summary(rows, out)
    print(bench.render_table(rows))
    return EXIT_OK


def cmd_predict(args) -> int:
    from .learnzoo import load_model
    from .learnzoo.registry import ModelFileError

    try:
        model, doc = load_model(args.model)
    except FileNotFoundError:
        raise UsageError(f"model file not found: {args.model}") from None
    except (ModelFileError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"{args.model}: {exc}") from None
    features = model.encoder.features
    fills = [f.get("fill") for f in doc["features"]]
    try:
        X = load_feature_rows(args.data, features, None if None in fills else fills, args.format)
    except FileNotFoundError:
        raise UsageError(f"data file not found: {args.data}") from None
    except DatasetError as exc:
        raise UsageError(f"{args.data}: {exc}") from None
    labels = model.predict_labels(X) if len(X) else []
    target = doc.get("target", "class")
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"predicted_{target}"])
        w.writerows([lab] for lab in labels)
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


def summarize_records(records) -> dict:
    """Counts per record kind and per round, plus the champion line."""
    kinds = collections.Counter(r["kind"] for r in records)
    rounds: dict = {}
    for r in records:
        if r["kind"] not in ("eval", "skip", "final-cv"):
            continue
        row = rounds.setdefault(r["round"], collections.Counter())
        row[r["kind"] if r["kind"] != "skip" else r["status"]] += 1
        if r["kind"] == "eval":
            row["cost"] += r["fs_time"] + r["train_time"] + r["validate_time"]
        elif r["kind"] == "final-cv":
            row["cost"] += r["time"]
    champion = next((r for r in reversed(records) if r["kind"] == "champion"), None)
    return {"records": len(records), "kinds": dict(kinds),
            "rounds": {k: dict(v) for k, v in sorted(rounds.items())}, "champion": champion}


def cmd_trace(args) -> int:
    from .engine import read_trace

    try:
        records = read_trace(args.path)
    except FileNotFoundError:
        raise UsageError(f"trace file not found: {args.path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.path}: not a JSON-lines trace ({exc})") from None
    if args.kind:
        wanted = set(args.kind)
        for r in records:
            if r["kind"] in wanted:
                print(json.dumps(r, sort_keys=True))
        return EXIT_OK
    s = summarize_records(records)
    if args.json:
        print(json.dumps(s, indent=1, sort_keys=True))
        return EXIT_OK
    print(f"{s['records']} records: " + ", ".join(f"{k} {v}" for k, v in sorted(s["kinds"].items())))
    for rnd, row in s["rounds"].items():
        cost = row.pop("cost", 0.0)
        parts = ", ".join(f"{k} {v}" for k, v in sorted(row.items()))
        print(f"round {rnd}: {parts}; cost {cost:.1f}")
    ch = s["champion"]
    if ch is not None:
        err = "n/a" if ch.get("raw") is None else f"{ch['raw']:.4f}"
        print(f"champion: {ch['algorithm']} with error {err}, total cost {ch['cost']:.1f}")
    return EXIT_OK


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, data_many: bool = False):
    if data_many:
        p.add_argument("--data", action="append", metavar="PATH",
                       help="dataset file (repeatable); CSV with a header row or ARFF")
    else:
        p.add_argument("--data", metavar="PATH", help="dataset file: CSV with a header row or ARFF")
    p.add_argument("--format", choices=("csv", "arff"), help="input format (default: by suffix)")
    p.add_argument("--target", help="target column (default: the last column)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--clock", choices=("virtual", "wall"),
                   help="charge predicted cost units (virtual, reproducible) or seconds (wall)")
    p.add_argument("--budget", type=float, help="optional global budget in clock units")
    p.add_argument("--config", metavar="FILE", help="key = value configuration file")
    p.add_argument("--technique-off", type=int, action="append", metavar="N",
                   dest="technique_off", help="switch off technique N (1..8); repeatable")
    p.add_argument("--algorithms", metavar="IDS", help="comma-separated algorithm ids to search")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override any configuration field; repeatable")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("-q", "--quiet", action="store_true", help="print less")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psbo", description="Progressive-sampling Bayesian optimization for choosing a "
                                 "classification algorithm and its hyper-parameters.")
    parser.add_argument("--version", action="version", version=f"psbo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("search", help="search for the best algorithm and combination")
    _common(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("bench", help="compare against random search and ablations")
    _common(p, data_many=True)
    p.add_argument("--dataset", action="append", metavar="NAME",
                   help="built-in benchmark dataset (repeatable); "
                        "default: car_like, credit_like, breast_cancer")
    p.add_argument("--methods", default="psbo,random",
                   help="comma-separated methods: psbo, random, no-t1 .. no-t8")
    p.add_argument("--repeats", type=int, default=1, help="seeds per dataset, counting up from --seed")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("predict", help="label new rows with a saved model")
    p.add_argument("--model", required=True, metavar="PATH", help="model.json written by search")
    p.add_argument("--data", required=True, metavar="PATH", help="rows to label")
    p.add_argument("--format", choices=("csv", "arff"), help="input format (default: by suffix)")
    p.add_argument("--out", metavar="FILE", help="output CSV (default: standard output)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("trace", help="summarize a trace file")
    p.add_argument("path", help="trace.jsonl written by search")
    p.add_argument("--kind", action="append", help="print only records of this kind (repeatable)")
    p.add_argument("--json", action="store_true", help="print the summary as JSON")
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except KeyboardInterrupt:
        _err("interrupted")
        return EXIT_FAILURE
    except Exception as exc:  # any other failure is a runtime failure
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

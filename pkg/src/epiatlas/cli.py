"""Command-line entry point.

Subcommands: ingest, compute, serve, export, demo.  Stdout carries exactly
one machine-parseable JSON document per invocation; diagnostics go to
stderr.  Exit codes are a stable contract: 0 success, 1 environment or
usage error, 2 partial ingest (rows rejected), 3 empty result.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import socket
import sys
from pathlib import Path

from . import pipeline, surprise
from .demo import DEFAULT_SEED, generate_demo
from .ingest import CdcColumns, SchemaError
from .jsonutil import canonical
from .metrics import parse_metric
from .store import export_csv, export_json_obj

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2
EXIT_EMPTY = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract reserves 2
    for partial ingests, so map usage errors to exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="epiatlas", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", parents=[], help="parse a CSV source into the store")
    p_ingest.add_argument("--source", required=True, choices=pipeline.SOURCES)
    p_ingest.add_argument("--file", required=True)
    p_ingest.add_argument("--data-dir", required=True)
    p_ingest.add_argument("--columns", help="JSON column-mapping file (cdc only)")
    p_ingest.add_argument("--strict", action="store_true",
                          help="treat any rejected row as fatal; nothing is loaded")

    p_compute = sub.add_parser("compute", help="write surprise frames to a file")
    p_compute.add_argument("--data-dir", required=True)
    p_compute.add_argument("--metric", required=True)
    p_compute.add_argument("--from", dest="start", required=True)
    p_compute.add_argument("--to", dest="end", required=True)
    p_compute.add_argument("--models", help="comma-separated model names")
    p_compute.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p_compute.add_argument("--out", required=True)

    p_serve = sub.add_parser("serve", help="run the HTTP API")
    p_serve.add_argument("--config", required=True)

    p_export = sub.add_parser("export", help="dump stored series for interchange")
    p_export.add_argument("--data-dir", required=True)
    p_export.add_argument("--metric", action="append",
                          help="restrict to a metric (repeatable)")
    p_export.add_argument("--format", choices=("csv", "json"), default="csv")
    p_export.add_argument("--out", required=True)

    p_demo = sub.add_parser("demo", help="generate the desk-scale fixture set")
    p_demo.add_argument("--out", required=True)
    p_demo.add_argument("--seed", type=int, default=DEFAULT_SEED)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"epiatlas: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    handler = {
        "ingest": cmd_ingest,
        "compute": cmd_compute,
        "serve": cmd_serve,
        "export": cmd_export,
        "demo": cmd_demo,
    }[args.command]
    try:
        return handler(args)
    except (OSError, ValueError, SchemaError) as err:
        print(f"epiatlas: error: {err}", file=sys.stderr)
        return EXIT_USAGE


def _parse_date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise ValueError(f"bad date {text!r}, expected YYYY-MM-DD") from None


def cmd_ingest(args) -> int:
    path = Path(args.file)
    if not path.is_file():
        print(f"epiatlas: error: no such file: {path}", file=sys.stderr)
        return EXIT_USAGE
    columns = CdcColumns.from_json_file(args.columns) if args.columns else None

    if args.strict:
        # parse first; load nothing when any row is rejected
        probe_store = pipeline.Store()
        report = pipeline.ingest_file(probe_store, args.source, path, columns)
        if report.rejected:
            print(f"epiatlas: strict ingest aborted: {report.rejected} row(s) rejected",
                  file=sys.stderr)
            print(canonical(report.to_json_obj()))
            return EXIT_USAGE

    store = pipeline.open_store(args.data_dir)
    report = pipeline.ingest_file(store, args.source, path, columns)
    print(canonical(report.to_json_obj()))
    return EXIT_PARTIAL if report.rejected else EXIT_OK


def cmd_compute(args) -> int:
    store = pipeline.open_store(args.data_dir)
    snapshot = store.snapshot()
    metric = parse_metric(args.metric)
    start, end = _parse_date(args.start), _parse_date(args.end)
    if args.models:
        models = [surprise.parse_model_name(n.strip())
                  for n in args.models.split(",") if n.strip()]
    else:
        models = surprise.default_models(snapshot)
    frames = surprise.run_surprise_range(metric, start, end, models, snapshot)
    if not frames:
        print("epiatlas: error: date range has no intersection with loaded data",
              file=sys.stderr)
        return EXIT_EMPTY

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.format == "jsonl":
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            for frame in frames:
                fh.write(canonical(frame.to_json_obj()) + "\n")
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["date", "metric", "fips", "observed", "expected",
                             "surprise", "signed"])
            for frame in frames:
                writer.writerows(frame.to_csv_rows())
    print(canonical({"frames": len(frames), "out": str(out), "format": args.format}))
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import ApiConfig, create_app  # deferred: pulls in fastapi

    try:
        config = ApiConfig.load(args.config)
    except (OSError, ValueError, json.JSONDecodeError) as err:
        print(f"epiatlas: bad config: {err}", file=sys.stderr)
        return EXIT_USAGE

    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as probe:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            probe.bind(("0.0.0.0", config.port))
        except OSError:
            print(f"epiatlas: error: port {config.port} is already in use",
                  file=sys.stderr)
            return EXIT_USAGE

    import uvicorn

    app = create_app(config)
    print(f"epiatlas: listening on http://0.0.0.0:{config.port}", file=sys.stderr)
    uvicorn.run(app, host="0.0.0.0", port=config.port, log_level="warning")
    return EXIT_OK


def cmd_export(args) -> int:
    store = pipeline.open_store(args.data_dir)
    snapshot = store.snapshot()
    metrics = [parse_metric(m) for m in args.metric] if args.metric else None
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.format == "csv":
        with open(out, "w", encoding="utf-8", newline="") as fh:
            rows = export_csv(snapshot, fh, metrics)
    else:
        obj = export_json_obj(snapshot, metrics)
        rows = sum(len(s["points"]) for s in obj["series"])
        out.write_text(canonical(obj) + "\n", encoding="utf-8")
    if rows == 0:
        print("epiatlas: error: nothing to export", file=sys.stderr)
        return EXIT_EMPTY
    print(canonical({"rows": rows, "out": str(out), "format": args.format}))
    return EXIT_OK


def cmd_demo(args) -> int:
    out = Path(args.out)
    try:
        paths = generate_demo(out, args.seed)
    except OSError as err:
        print(f"epiatlas: error: cannot write demo fixtures: {err}", file=sys.stderr)
        return EXIT_USAGE
    print(canonical({"out": str(out),
                     "files": {k: str(v) for k, v in sorted(paths.items())}}))
    return EXIT_OK


def main_entry() -> None:  # console_scripts hook
    sys.exit(main())


if __name__ == "__main__":
    main_entry()

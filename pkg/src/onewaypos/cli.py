"""Command line: ``onewaypos run | validate | report``."""
from __future__ import annotations

import argparse
import collections
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import ValidationError
from .report import ReportRecord, csv_text, execute
from .scenario_io import load_scenario

EXIT_OK, EXIT_LOAD, EXIT_IO = 0, 2, 3


def _run_one(args):
    path, seed, timing = args
    return execute(load_scenario(path, seed), timing).to_json()


def _load_all(paths, seed, err):
    ok, failed = [], False
    for p in paths:
        try:
            load_scenario(p, seed)
        except ValidationError as exc:
            print(f"{p}: {exc}", file=err)
            failed = True
        except OSError as exc:
            print(f"{p}: cannot read: {exc}", file=err)
            failed = True
        else:
            ok.append(p)
    return ok, failed


def run_command(paths, seed_override=None, output_format="jsonl", parallelism=1, out=None,
                timing=False, err=None) -> int:
    """Run every scenario and emit one record per run, in input order."""
    err = err or sys.stderr
    good, failed = _load_all(paths, seed_override, err)
    jobs = [(p, seed_override, timing) for p in good]
    if parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            lines = list(pool.map(_run_one, jobs))
    else:
        lines = [_run_one(j) for j in jobs]
    if output_format == "csv":
        text = csv_text([ReportRecord.from_json(l) for l in lines])
    else:
        text = "".join(l + "\n" for l in lines)
    try:
        if out is None or str(out) == "-":
            sys.stdout.write(text)
            sys.stdout.flush()
        else:
            Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        print(f"write failed: {exc}", file=err)
        return EXIT_IO
    return EXIT_LOAD if failed else EXIT_OK


def validate_command(paths, err=None) -> int:
    err = err or sys.stderr
    good, failed = _load_all(paths, None, err)
    for p in good:
        print(f"{p}: ok")
    return EXIT_LOAD if failed else EXIT_OK


def summary_text(records) -> str:
    by_outcome = collections.Counter(r.outcome for r in records)
    by_class = collections.Counter(r.classification for r in records)
    lines = [f"records: {len(records)}", "", "outcome                 count"]
    lines += [f"{k:<24}{v}" for k, v in sorted(by_outcome.items())]
    lines += ["", "classification          count"]
    lines += [f"{k:<24}{v}" for k, v in sorted(by_class.items())]
    bidir = collections.Counter(r.bidir_outcome for r in records if r.bidir_outcome)
    if bidir:
        lines += ["", "bidirectional           count"]
        lines += [f"{k:<24}{v}" for k, v in sorted(bidir.items())]
    violations = sum(r.physics_violations for r in records)
    lines += ["", f"physics violations: {violations}"]
    return "\n".join(lines) + "\n"


def report_command(path, summary=True, err=None) -> int:
    err = err or sys.stderr
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"{path}: cannot read: {exc}", file=err)
        return EXIT_IO
    records = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            records.append(ReportRecord.from_json(line))
        except (ValueError, TypeError) as exc:
            print(f"{path}:{n}: bad record: {exc}", file=err)
            return EXIT_LOAD
    if summary:
        sys.stdout.write(summary_text(records))
    else:
        for r in records:
            sys.stdout.write(r.to_json() + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onewaypos", description="One-way secure positioning simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run scenario files")
    run.add_argument("files", nargs="+")
    run.add_argument("--seed", type=int, default=None, help="override every file's meta.seed")
    run.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    run.add_argument("--out", default=None, help="output path (default stdout)")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--timing", action="store_true", help="record wall-clock runtime (breaks byte-stability)")

    val = sub.add_parser("validate", help="check scenario files")
    val.add_argument("files", nargs="+")

    rep = sub.add_parser("report", help="summarise a JSONL report")
    rep.add_argument("jsonl")
    rep.add_argument("--summary", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run_command(args.files, args.seed, args.format, max(1, args.jobs), args.out, args.timing)
    if args.command == "validate":
        return validate_command(args.files)
    return report_command(args.jsonl, args.summary)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""`socsim-harness` entry point: run a scripted scenario and report on it."""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys
from typing import Optional, Sequence

from .latency import measure_latency
from .runner import run_scenario, write_transcripts
from .scenario import ScriptError, load_script
from .verify import verify_transcripts


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="socsim-harness")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario script against a live server")
    run.add_argument("--script", required=True, help="scenario JSON path")
    run.add_argument("--server", required=True, help="server address, e.g. ws://127.0.0.1:8080")
    run.add_argument("--out", help="directory for per-client JSONL transcripts")
    run.add_argument("--teacher-token",
                     default=os.environ.get("SOCSIM_TEACHER_TOKEN"),
                     help="teacher secret for teacher actors and export fetch")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        script = load_script(args.script)
    except ScriptError as exc:
        print(f"socsim-harness: {exc}", file=sys.stderr)
        return 2

    result = asyncio.run(run_scenario(script, args.server, args.teacher_token))

    if args.out:
        write_transcripts(result, args.out)

    report = verify_transcripts(result)
    stats = measure_latency(result.transcripts.values())

    print(report.summary())
    for fault in result.all_faults():
        print(f"fault: {fault}")
    print("latency:", json.dumps(stats["overall"]))
    for kind, kind_stats in stats["byKind"].items():
        print(f"  {kind}: {json.dumps(kind_stats)}")

    if args.out:
        from pathlib import Path
        out = Path(args.out)
        (out / "conformance.txt").write_text(report.summary() + "\n", encoding="utf-8")
        (out / "latency.json").write_text(json.dumps(stats, indent=2), encoding="utf-8")

    return 0 if report.ok and not result.all_faults() else 1


if __name__ == "__main__":
    sys.exit(main())

"""Command line: run a demo against an input script and write its trace.

    python cli.py list
    python cli.py run bounce --script scripts/bounce_resize_close.script --trace out.trace
"""

from __future__ import annotations

import argparse
import os
import sys

import structlog

import config
import logs
import run
from errors import FrameworkError, ResourceError, ScriptError
from resources import Manifest
from script import ScriptFeeder, load_script, terminal_events

log = structlog.get_logger(__name__)


def _run_once(demo, events, manifest, seed, max_ms, echo, strict=True):
    display = run.make_display(manifest)
    display.idle = ScriptFeeder(events, max_ms, echo=echo, strict=strict)
    code = run.doit(run.DEMOS[demo], seed=seed, display=display)
    return code, display


def cli_run(demo, script_path=None, trace_path=None, manifest_path=None, seed=None,
            max_ms=config.DEFAULT_MAX_MS, summary_path=None, repeat=1, interactive=False,
            out=None, stdin=None) -> int:
    """Run `demo` and return the process exit status: the demo's quit code,
    or 64 and up for harness errors."""
    out = out or sys.stdout
    stdin = stdin or sys.stdin
    if demo not in run.DEMOS:
        print(f"❌ unknown demo {demo!r}; available: {', '.join(sorted(run.DEMOS))}", file=out)
        return config.EXIT_USAGE
    if repeat < 1:
        print(f"❌ --repeat must be at least 1, got {repeat}", file=out)
        return config.EXIT_USAGE

    manifest_path = manifest_path or config.DEFAULT_MANIFEST
    if not os.path.exists(manifest_path):
        print(f"❌ manifest not found: {manifest_path}", file=out)
        return config.EXIT_NOINPUT
    try:
        manifest = Manifest.load(manifest_path)
    except ResourceError as exc:
        print(f"❌ {exc}", file=out)
        return config.EXIT_DATAERR

    events = []
    if script_path is not None:
        try:
            events = load_script(script_path)
        except OSError as exc:
            print(f"❌ cannot read script: {exc}", file=out)
            return config.EXIT_NOINPUT
        except ScriptError as exc:
            print(f"❌ {script_path}: {exc}", file=out)
            return config.EXIT_DATAERR

    seed = config.DEFAULT_SEED if seed is None else seed
    traces = []
    try:
        if interactive:
            code, display = _run_once(demo, terminal_events(stdin, out), manifest, seed, max_ms, out, strict=False)
            traces.append(display.trace.text())
        else:
            for _ in range(repeat):
                code, display = _run_once(demo, events, manifest, seed, max_ms, None)
                if display.idle.error is not None:
                    print(f"❌ {script_path}: {display.idle.error}", file=out)
                    return config.EXIT_DATAERR
                traces.append(display.trace.text())
    except FrameworkError as exc:
        log.error("run_failed", demo=demo, error=repr(exc))
        print(f"❌ {demo} failed: {exc}", file=out)
        return config.EXIT_SOFTWARE

    if len(set(traces)) > 1:
        first_bad = next(i for i, t in enumerate(traces) if t != traces[0])
        print(f"❌ run {first_bad + 1} of {repeat} produced a different trace", file=out)
        return config.EXIT_SOFTWARE

    if trace_path:
        display.trace.write(trace_path)
    summary = run.summarize(demo, code, display)
    if summary_path:
        run.save_json(summary_path, summary)

    ops = " | ".join(f"{op}: {n}" for op, n in summary["ops"].items())
    print(f"✅ {demo} exited {code} at {summary['clock_ms']} ms → {summary['records']} records ({ops})", file=out)
    if repeat > 1:
        print(f"🔁 {repeat} runs, identical traces", file=out)
    return code


def build_parser():
    parser = argparse.ArgumentParser(prog="cmlwin", description="Run demos on the simulated window system.")
    parser.add_argument("--log-level", default=None, help="structlog level (default from CMLWIN_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a demo")
    p_run.add_argument("demo")
    p_run.add_argument("--script", dest="script_path")
    p_run.add_argument("--trace", dest="trace_path")
    p_run.add_argument("--manifest", dest="manifest_path")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--max-ms", type=int, default=config.DEFAULT_MAX_MS)
    p_run.add_argument("--summary", dest="summary_path")
    p_run.add_argument("--repeat", type=int, default=1)
    p_run.add_argument("--interactive", action="store_true",
                       help="read script lines from stdin and echo new trace records")

    sub.add_parser("list", help="list demos")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return config.EXIT_USAGE if exc.code else 0
    logs.configure(args.log_level)

    if args.command == "list":
        for name, winmain in sorted(run.DEMOS.items()):
            doc = (sys.modules[winmain.__module__].__doc__ or "").strip().splitlines()
            print(f"  📦 {name:<10} {doc[0] if doc else ''}")
        return 0

    return cli_run(
        args.demo,
        script_path=args.script_path,
        trace_path=args.trace_path,
        manifest_path=args.manifest_path,
        seed=args.seed,
        max_ms=args.max_ms,
        summary_path=args.summary_path,
        repeat=args.repeat,
        interactive=args.interactive,
    )


if __name__ == "__main__":
    sys.exit(main())

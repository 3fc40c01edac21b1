"""Command line: ``generate`` a stream file, ``run`` an experiment, ``report`` its plots.

Exit codes: 0 on success, 2 for configuration errors, 3 for runtime failures.
The default output directory comes from ``$DELAYSTREAM_OUT``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigurationError
from .experiment import STREAM_KEYS, default_output_dir, load_plan, preset_plan, run_experiment
from .report import emit_report
from .streamio import write_stream
from .streams import StreamConfig, generate_stream

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


def _parser():
    p = argparse.ArgumentParser(prog="delaystream", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write one synthetic stream as a DBS1 file")
    g.add_argument("--config", help="JSON file with stream parameters (the 'streams' object or flat keys)")
    g.add_argument("--preset", choices=["paper"], help="use the default 500x250x20 stream")
    g.add_argument("--n-drifts", type=int, help="override the number of drifts")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--seed-offset", type=int, default=0)
    g.add_argument("--out", help="output file (default: $DELAYSTREAM_OUT/stream.dbs)")

    r = sub.add_parser("run", help="execute an experiment grid")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="experiment config JSON")
    src.add_argument("--preset", choices=["paper"], help="the full 2520-run grid")
    r.add_argument("--out", help="output directory (default: $DELAYSTREAM_OUT or ./delaystream-out)")
    r.add_argument("--jobs", type=int, default=1, help="worker processes")
    r.add_argument("--seed-offset", type=int, default=0, help="added to every seed")
    r.add_argument("--quiet", action="store_true")

    rep = sub.add_parser("report", help="re-emit SVG plots from a finished run directory")
    rep.add_argument("--out", help="run directory (default: $DELAYSTREAM_OUT or ./delaystream-out)")
    rep.add_argument("--traces", choices=["first", "all", "none"], default="first")
    return p


def _stream_config(args):
    params = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except FileNotFoundError:
            raise ConfigurationError(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"{args.config}: invalid JSON ({exc})") from None
        raw = raw.get("streams", raw)
        for key in raw:
            if key not in STREAM_KEYS + ("seed",):
                raise ConfigurationError(f"streams: unknown key {key!r}")
        params.update(raw)
    if isinstance(params.get("n_drifts"), list):
        params["n_drifts"] = params["n_drifts"][0]
    if args.n_drifts is not None:
        params["n_drifts"] = args.n_drifts
    params["seed"] = params.get("seed", args.seed) + args.seed_offset
    return StreamConfig(**params)


def cmd_generate(args):
    stream = generate_stream(_stream_config(args))
    out = Path(args.out) if args.out else default_output_dir() / "stream.dbs"
    out.parent.mkdir(parents=True, exist_ok=True)
    side = write_stream(stream, out)
    print(f"wrote {out} and {side}")


def cmd_run(args):
    if args.jobs < 1:
        raise ConfigurationError(f"--jobs must be positive, got {args.jobs}")
    plan = preset_plan(args.seed_offset) if args.preset else load_plan(args.config, args.seed_offset)
    total = len(plan.runs)
    progress = None
    if not args.quiet:
        step = max(1, total // 20)

        def progress(k):
            if k % step == 0 or k == total:
                print(f"\r{k}/{total} runs", end="" if k < total else "\n", file=sys.stderr, flush=True)

    art = run_experiment(plan, args.out, jobs=args.jobs, progress=progress)
    print(f"{total} runs in {art.wall_time:.1f}s; summary at {art.summary}")


def cmd_report(args):
    out = Path(args.out) if args.out else default_output_dir()
    if not (out / "summary.csv").exists():
        raise ConfigurationError(f"no summary.csv in {out}")
    plots = emit_report(out, traces=args.traces)
    print(f"plots in {plots}")


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        {"generate": cmd_generate, "run": cmd_run, "report": cmd_report}[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        if os.environ.get("DELAYSTREAM_DEBUG"):
            raise
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

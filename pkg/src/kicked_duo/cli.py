"""Command-line entry point ``kicked-duo``.

Exit codes: 0 success, 2 configuration error, 3 numerical-guard abort.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness
from .hilbert import CheckpointError
from .params import PARAM_KEYS, ConfigError, load_config
from .quantum import AliasingError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3

log = logging.getLogger("kicked_duo")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kicked-duo", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a config file and/or a figure preset")
    run.add_argument("--config", type=Path, help="key = value parameter file")
    run.add_argument("--preset", choices=harness.PRESETS)
    run.add_argument("--scale", choices=("paper", "desk"), default="desk")
    run.add_argument("--resume", help="checkpoint to continue a quantum run from")
    run.add_argument("--workers", type=int, help=f"parallel runs (default: ${harness.WORKERS_ENV} or 1)")
    run.add_argument("--out", type=Path, help="output directory (overrides output_dir)")

    cmp_ = sub.add_parser("compare", help="Delta_cl - Delta_qm of two time-series CSVs")
    cmp_.add_argument("quantum_csv", type=Path)
    cmp_.add_argument("classical_csv", type=Path)
    cmp_.add_argument("--out", type=Path, help="write the difference series here")
    cmp_.add_argument("--window", type=int, nargs=2, metavar=("LO", "HI"))

    sub.add_parser("presets", help="list the figure presets")
    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config) if args.config else {}
    if args.out is not None:
        config["output_dir"] = str(args.out)
    if args.preset:
        if args.resume:
            raise ConfigError("--resume cannot be combined with --preset")
        overrides = {k: config[k] for k in PARAM_KEYS if k in config}
        metas = harness.run_preset(
            args.preset,
            args.scale,
            output_dir=config.get("output_dir", "out"),
            workers=args.workers,
            overrides=overrides,
            seed=config.get("seed", 0),
        )
        for meta in metas:
            log.info("%s: done in %.1fs", meta["name"], meta["wall_time_s"])
        return EXIT_OK
    if not args.config:
        raise ConfigError("run needs --config or --preset")
    spec = harness.spec_from_config(config)
    meta = harness.run(spec, resume=args.resume, workers=args.workers)
    log.info("%s: done in %.1fs -> %s", meta["name"], meta["wall_time_s"], spec.run_dir)
    return EXIT_OK


def _cmd_compare(args) -> int:
    window = tuple(args.window) if args.window else None
    summary = harness.compare(args.quantum_csv, args.classical_csv, args.out, window)
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def _cmd_presets(args) -> int:
    for name in harness.PRESETS:
        for scale in ("desk", "paper"):
            specs = harness.fig_presets(name, scale)
            print(f"{name} [{scale}]: " + ", ".join(f"{s.name} ({s.mode})" for s in specs))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"run": _cmd_run, "compare": _cmd_compare, "presets": _cmd_presets}[args.command]
    try:
        return handler(args)
    except (ConfigError, CheckpointError, FileNotFoundError) as exc:
        print(f"kicked-duo: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AliasingError as exc:
        print(f"kicked-duo: numerical guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as exc:
        # misaligned series in compare, bad CSV content
        print(f"kicked-duo: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

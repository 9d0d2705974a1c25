"""Command line entry point.

    enantiosep run CONFIG [--out-dir DIR] [--engine ENGINE] [--dump-effective-config]
    enantiosep sweep CONFIG [--out-dir DIR] [--engine ENGINE] [--dump-effective-config]
    enantiosep presets list
    enantiosep presets show NAME

CONFIG is a JSON file path or the name of a bundled preset. Exit status is 0
on success, 1 for an invalid configuration and 2 for a numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from .config import ConfigError, preset_names, preset_text, resolve
from .core import NormalizationError
from .metrics import Engine, SweepError
from .runner import run_scenario, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

log = logging.getLogger("enantiosep")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="enantiosep", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for verb, help_text in (
        ("run", "propagate one scenario and write trace.csv + summary.json"),
        ("sweep", "evaluate an imperfection grid and write sweep.csv + sweep_summary.json"),
    ):
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("config", help="config file path or preset name")
        p.add_argument("--out-dir", default=".", help="output directory (default: cwd)")
        p.add_argument("--engine", choices=[e.value for e in Engine], help="override the config engine")
        p.add_argument(
            "--dump-effective-config",
            action="store_true",
            help="print the fully explicit config to stdout and exit",
        )
    presets = sub.add_parser("presets", help="inspect bundled presets")
    psub = presets.add_subparsers(dest="presets_command", required=True)
    psub.add_parser("list", help="list preset names")
    show = psub.add_parser("show", help="print a preset's JSON")
    show.add_argument("name")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "presets":
        if args.presets_command == "list":
            for name in preset_names():
                print(name)
            return EXIT_OK
        try:
            sys.stdout.write(preset_text(args.name))
        except KeyError:
            print(f"error: unknown preset {args.name!r}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK

    try:
        scenario = resolve(args.config)
        if args.engine:
            scenario = replace(scenario, engine=Engine(args.engine))
        if args.dump_effective_config:
            json.dump(scenario.to_dict(), sys.stdout, indent=2)
            sys.stdout.write("\n")
            return EXIT_OK
        if args.command == "run":
            result = run_scenario(scenario, args.out_dir)
            final = result.final
            print("final populations  L: {:.6f} {:.6f} {:.6f}   R: {:.6f} {:.6f} {:.6f}".format(*final))
        else:
            result = run_sweep(scenario, args.out_dir)
            print(f"{len(result.points)} grid points written to {args.out_dir}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NormalizationError, SweepError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

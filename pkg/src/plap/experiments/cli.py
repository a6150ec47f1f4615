"""``plap <command> --config <path> [--out <dir>]``."""
from __future__ import annotations

import argparse
import logging
import sys

from ..errors import DisconnectedError
from .commands import COMMAND_DEFAULTS, COMMANDS, EXIT_CONFIG, EXIT_CONNECTIVITY, EXIT_FAILED, CommandError
from .config import ConfigError, ExperimentConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plap", description="Graph and hypergraph p-Laplacian experiments.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="flat key=value config file")
    parser.add_argument("--out", help="output directory (overrides the out key)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    overrides = {"out": args.out} if args.out else {}
    try:
        cfg = ExperimentConfig.load(args.config, COMMAND_DEFAULTS[args.command], overrides)
        return COMMANDS[args.command](cfg, cfg["out"])
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DisconnectedError as exc:
        print(f"error: {exc}; increase epsilon", file=sys.stderr)
        return EXIT_CONNECTIVITY
    except OSError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())

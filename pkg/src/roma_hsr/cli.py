"""``roma <subcommand> --config PATH --out PATH [--seed N]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .experiments import MODES, RUNNERS, ConfigError, load_config, parse_config

EXIT_CONFIG_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="roma", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode, help=RUNNERS[mode].__doc__.splitlines()[0])
        p.add_argument("--config", help="key = value config file (defaults used when omitted)")
        p.add_argument("--out", required=True, help="output CSV path, '-' for stdout")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.config:
            config = load_config(args.config, seed=args.seed)
        else:
            config = parse_config("", seed=args.seed)
        table = RUNNERS[args.mode](config)
    except ConfigError as exc:
        print(f"roma: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    text = table.to_csv()
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    if table.summary:
        print(json.dumps(table.summary), file=sys.stderr if args.out == "-" else sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

    chaoslab <kind> --config FILE [--set key=value ...] --out DIR
    chaoslab figure <tag> [--set key=value ...] --out DIR

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import KINDS, ConfigError, load, parse_overrides
from .figures import available, figure_configs
from .runner import NumericalFailure, run

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chaoslab", description="Dicke / Tavis-Cummings chaos experiments")
    ap.add_argument("kind", choices=KINDS + ("figure",))
    ap.add_argument("tag", nargs="?", help="figure tag (only with 'figure')")
    ap.add_argument("--config", help="flat YAML config file")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.kind == "figure":
            if not args.tag:
                raise ConfigError("tag", f"figure needs a tag; available: {', '.join(available())}")
            try:
                parts = figure_configs(args.tag, parse_overrides(args.set))
            except KeyError as exc:
                raise ConfigError("tag", exc.args[0]) from None
            for name, cfg in parts:
                run(cfg, f"{args.out}/{name}")
        else:
            if args.tag:
                raise ConfigError("tag", f"unexpected positional argument {args.tag!r}")
            run(load(args.kind, args.config, args.set), args.out)
    except ConfigError as exc:
        print(f"chaoslab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"chaoslab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""plotkit command line: ``plotkit render --spec <path>``."""

from __future__ import annotations

import argparse
import sys

from .render import SchemaError, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="plotkit", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("render", help="render a figure from a plot-spec JSON")
    r.add_argument("--spec", required=True, help="path to the plot-spec JSON file")
    ns = ap.parse_args(argv)
    try:
        out = render(ns.spec)
    except SchemaError as e:
        print(f"schema error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``plots --spec <file> --outdir <dir>``."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .figures import SpecError, load_figure_spec, render_figures


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); keep 1 for usage
        raise SpecError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="plots", description=__doc__)
    parser.add_argument("--spec", required=True, help="figure spec file (flat key = value)")
    parser.add_argument("--outdir", required=True, help="directory for rendered images")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        spec = load_figure_spec(args.spec)
        written, lines = render_figures(spec, args.outdir)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for line in lines:
        print(line)
    for path in written:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: run (benchmark episodes to CSV), gen-traces (archive
feature/action/reward traces), export-cdpi (symbolic examples from an
archive), ground-macros (macro lengths from a fresh belief), summarize
(aggregate CSVs).  Exit codes: 0 success, 1 config or usage error,
2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from typing import Optional, Sequence

from .bench import (
    ExperimentConfig,
    export_examples,
    generate_traces,
    ground_report,
    load_experiment_config,
    run_experiment,
    summarize,
    summary_table,
    write_summary_csv,
)
from .flatconfig import ConfigError


class _Parser(argparse.ArgumentParser):
    # usage mistakes should exit 1 like any other config error, not argparse's 2
    def error(self, message: str):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="macroplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def experiment_command(name: str, help_text: str, out_required: bool = True):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="flat key-value experiment file")
        p.add_argument("--out", required=out_required, help="output file path")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument(
            "--episodes", type=int, default=None, help="override the episode count"
        )
        return p

    run = experiment_command("run", "run benchmark episodes, write one CSV row each")
    run.add_argument(
        "--parallel", type=int, default=1, help="worker processes (rows stay ordered)"
    )
    experiment_command("gen-traces", "run episodes and archive their traces")
    experiment_command(
        "export-cdpi", "emit symbolic examples from the config's trace archive"
    )
    experiment_command(
        "ground-macros", "print grounded macro lengths for a fresh belief",
        out_required=False,
    )

    s = sub.add_parser("summarize", help="aggregate benchmark CSVs")
    s.add_argument("csvs", nargs="+", help="benchmark CSV files")
    s.add_argument("--out", default=None, help="also write the summary as CSV here")
    return parser


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = load_experiment_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.episodes is not None:
        if args.episodes < 0:
            raise ConfigError("episodes must be nonnegative")
        overrides["episodes"] = args.episodes
    return replace(config, **overrides) if overrides else config


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "run":
            if args.parallel < 1:
                raise ConfigError("parallel must be at least 1")
            run_experiment(_load_config(args), args.out, args.parallel)
        elif args.command == "gen-traces":
            generate_traces(_load_config(args), args.out)
        elif args.command == "export-cdpi":
            count = export_examples(_load_config(args), args.out)
            print(f"wrote {count} examples to {args.out}")
        elif args.command == "ground-macros":
            report = ground_report(_load_config(args))
            if args.out:
                with open(args.out, "w") as handle:
                    handle.write(report)
            else:
                sys.stdout.write(report)
        else:
            rows = summarize(args.csvs)
            if args.out:
                write_summary_csv(rows, args.out)
            sys.stdout.write(summary_table(rows))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary, map to exit code
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

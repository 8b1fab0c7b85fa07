"""Command line entry point: ``pcrlab run | emit-plot | list-experiments``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError
from .lab import EXPERIMENTS, SERIES, ExperimentConfig, ExperimentReport, emit_plot_data, run
from .io import read_yaml

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcrlab", description="Perturbed Cauchy-Riemann experiments on the cylinder.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment from a YAML config")
    p_run.add_argument("--config", required=True, help="YAML experiment config")
    p_run.add_argument("--output-dir", help="directory for report.json and report.csv")
    p_run.add_argument("--seed", type=int, help="override the config seed")
    p_run.add_argument("--grid", nargs=2, type=int, metavar=("N_S", "N_T"), help="override grid resolution")
    p_run.add_argument("--half-length", type=float, help="override the cylinder half length")
    p_run.add_argument("--workers", type=int, help="worker processes for sweeps")

    p_plot = sub.add_parser("emit-plot", help="write one series of a saved report as TSV")
    p_plot.add_argument("--report", required=True, help="report.json from a previous run")
    p_plot.add_argument("--series", required=True, help=f"one of {', '.join(SERIES)}")
    p_plot.add_argument("--out", help="output file (stdout if omitted)")

    sub.add_parser("list-experiments", help="print the experiment names")
    return parser


def _run(args) -> int:
    data = read_yaml(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.output_dir is not None:
        data["output_dir"] = args.output_dir
    if args.workers is not None:
        data["workers"] = args.workers
    grid = dict(data.get("grid") or {})
    if args.grid is not None:
        grid["n_s"], grid["n_t"] = args.grid
    if args.half_length is not None:
        grid["half_length"] = args.half_length
    data["grid"] = grid
    config = ExperimentConfig.from_dict(data)
    report = run(config)
    js, cs = report.write(config.output_dir)
    for row in report.rows:
        print(f"{'PASS' if row['pass'] else 'FAIL'}  {row.get('case', '')}  (tolerance {row.get('tolerance')})")
    print(f"verdict: {'pass' if report.verdict else 'fail'}; wrote {js} and {cs}")
    return EXIT_PASS if report.verdict else EXIT_FAIL


def _emit(args) -> int:
    try:
        report = ExperimentReport.from_json(Path(args.report).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read report {args.report}: {exc}") from exc
    text = emit_plot_data(report, args.series, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_PASS


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-experiments":
            print("\n".join(EXPERIMENTS))
            return EXIT_PASS
        if args.command == "run":
            return _run(args)
        return _emit(args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # unknown series or empty report
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

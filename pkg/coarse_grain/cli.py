"""
Command-line interface for quantum-coarse-grain.

Provides commands for:
- Commutativity benchmarks over random states
- Cross-generator residual matrices
- Time and Werner-parameter sweeps
- Reproducing the SDP tables
- Dumping Petz emergent channels and measuring diamond distances
- Reading back JSON outputs
- Managing configuration
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, TextIO

import numpy as np
from dotenv import load_dotenv

from . import __version__
from .core.bayes import petz_emergent
from .core.channels import (
    KrausChannel,
    depolarizing_channel,
    identity_channel,
    kraus_to_choi,
    unitary_channel,
)
from .core.bloch import PAULIS
from .core.config import CoarseGrainConfig, Profile, get_config, set_config
from .core.errors import CoarseGrainError, InfeasibleError
from .core.exporters import CompositeExporter
from .core.interfaces import RecordExporter
from .core.scenarios import get_scenario, swap_channel, z_channel
from .experiments.harness import (
    TABLE_COLUMNS,
    run_commutativity,
    run_cross_generator_matrix,
    run_sdp_tables,
    run_time_sweep,
    run_werner_sweep,
)
from .experiments.records import CSV_COLUMNS, BenchmarkRecord, ExperimentConfig, summarize
from .processing.pipeline import OutputPipeline, Serializer
from .sdp.programs import diamond_norm, feasibility_emergent
from .storage.exporter import CsvRecordExporter, JsonRecordExporter, exporter_for

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


def setup_logging(log_level: Optional[str] = None, log_file: Optional[str] = None):
    """
    Setup logging configuration.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR). Defaults to config.log_level.
        log_file: Optional path to log file. Defaults to config.log_path, else stderr.
    """
    config = get_config()
    log_level = log_level or config.log_level
    log_file = log_file or config.log_path
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        filename=log_file,
    )


def parse_grid(text: str) -> List[float]:
    """Either "start:stop:count" (inclusive linspace) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"grid {text!r} must be start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        return [float(v) for v in np.linspace(start, stop, count)]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid {text!r} is not a list of numbers")


def parse_channel(text: str, config: CoarseGrainConfig) -> KrausChannel:
    """
    Channel from a short name.

    id:D, x, y, z (qubit Pauli conjugations), depol:P, swap, zint:T, or
    @path.json holding a serialized KrausChannel.
    """
    name, _, arg = text.partition(":")
    name = name.lower()
    if name.startswith("@"):
        return KrausChannel.from_dict(json.loads(Path(text[1:]).read_text()))
    if name == "id":
        return identity_channel(int(arg or 2))
    if name in ("x", "y", "z"):
        return unitary_channel(PAULIS["xyz".index(name)], label=f"sigma_{name}")
    if name == "depol":
        return depolarizing_channel(float(arg))
    if name == "swap":
        return swap_channel()
    if name == "zint":
        return z_channel(float(arg or 1.0), config.coupling)
    raise CoarseGrainError(f"unknown channel {text!r}")


def _experiment(args, **extra) -> ExperimentConfig:
    return ExperimentConfig.from_config(
        get_config(),
        scenario_id=args.scenario,
        generator=args.generator,
        samples=args.samples,
        seed=args.seed,
        t=args.t,
        output_path=args.out,
        format=args.format,
        workers=getattr(args, "workers", None),
        **extra,
    )


def _write_rows(path: str, rows: List[List[str]]):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        csv.writer(f, lineterminator="\n").writerows(rows)


def _write_json(path: Optional[str], data) -> None:
    if path:
        OutputPipeline(get_config()).write(path, data)
        print(f"💾 Wrote {path}")
    else:
        print(json.dumps(data, indent=2, default=str))


def _status_stream(exp: ExperimentConfig) -> TextIO:
    """Progress goes to stderr when the records themselves go to stdout."""
    return sys.stdout if exp.output_path else sys.stderr


def _print_records(records, exp: ExperimentConfig) -> None:
    """Records on stdout, in the run's format."""
    if exp.format == "json":
        document = {"meta": exp.to_dict(), "records": [r.to_dict() for r in records]}
        print(Serializer.serialize(document).decode("utf-8"))
        return
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(r.to_row() for r in records)


def _run_records(run, exp: ExperimentConfig, json_copy: Optional[str] = None, **kwargs):
    """Run a record-producing experiment, streaming to the output file(s) or stdout."""
    config = get_config()
    exporters: List[RecordExporter] = []
    if exp.output_path:
        exporters.append(exporter_for(exp.output_path, exp.format, config, **exp.to_dict()))
    if json_copy:
        exporters.append(JsonRecordExporter(json_copy, config=config, meta=exp.to_dict()))
    if not exporters:
        records = run(exp, **kwargs)
        _print_records(records, exp)
        return records
    exporter = CompositeExporter(exporters)
    exporter.initialize()
    try:
        records = run(exp, sink=exporter.export_batch, **kwargs)
    finally:
        exporter.shutdown()
    stats = exporter.get_stats()
    logger.info(f"record sinks: {stats}")
    for i, path in enumerate(p for p in (exp.output_path, json_copy) if p):
        if i in exporter.failed:
            print(f"⚠️  {path} is incomplete: its writer failed during the run")
        else:
            print(f"💾 Wrote {len(records)} records to {path}")
    return records


def _print_summary(records, out: Optional[TextIO] = None):
    out = out or sys.stdout
    summary = summarize(records, get_config().commutation_tol)
    print(
        f"📊 {summary.get('count', 0)} records, {summary.get('commuting', 0)} commuting",
        file=out,
    )
    for key in ("min", "p01", "median", "mean", "max"):
        if key in summary:
            print(f"  {key:>6}: {summary[key]:.3e}", file=out)


def cmd_bench(args):
    """Commutativity benchmark over random states."""
    setup_logging(args.log_level, args.log_file)
    exp = _experiment(args, project_condition=args.project_condition)
    out = _status_stream(exp)
    print(
        f"🚀 Benchmarking scenario {exp.scenario_id} with generator {exp.generator_label} "
        f"on {exp.samples} states (seed {exp.seed})",
        file=out,
    )
    records = _run_records(run_commutativity, exp, json_copy=args.json_copy)
    _print_summary(records, out)
    return EXIT_OK


def cmd_matrix(args):
    """Cross-generator residual matrix."""
    setup_logging(args.log_level, args.log_file)
    exp = _experiment(args)
    matrix = run_cross_generator_matrix(exp)
    rows = matrix.to_rows()
    if args.out and args.format == "csv":
        _write_rows(args.out, rows)
        print(f"💾 Wrote {args.out}")
    elif args.out:
        _write_json(args.out, matrix.to_dict())
    else:
        print(f"📊 Scenario {matrix.scenario}, t = {matrix.t}")
        for row in rows:
            print("  " + "  ".join(f"{cell:>24}" for cell in row))
    return EXIT_OK


def cmd_timesweep(args):
    """Residual against time."""
    setup_logging(args.log_level, args.log_file)
    exp = _experiment(args, t_grid=args.t_grid, project_condition=args.project_condition)
    out = _status_stream(exp)
    print(f"🚀 Time sweep on scenario {exp.scenario_id} for {exp.samples} states", file=out)
    records = _run_records(run_time_sweep, exp, json_copy=args.json_copy)
    _print_summary(records, out)
    return EXIT_OK


def cmd_wernersweep(args):
    """Residual against the Werner generator parameter."""
    setup_logging(args.log_level, args.log_file)
    exp = _experiment(args, lambda_grid=args.lambda_grid)
    scenarios = [args.scenario] if args.only_scenario else [1, 2, 3, 4]
    out = _status_stream(exp)
    print(f"🚀 Werner sweep on scenarios {scenarios}", file=out)
    records = _run_records(
        run_werner_sweep, exp, json_copy=args.json_copy, scenarios=scenarios
    )
    for scenario_id in scenarios:
        rows = [r for r in records if r.scenario == scenario_id]
        if rows:
            worst = max(rows, key=lambda r: r.residual)
            print(
                f"  scenario {scenario_id}: state {rows[0].state_id}, "
                f"worst residual {worst.residual:.3e} at lambda {worst.lam:.4f}",
                file=out,
            )
    return EXIT_OK


def cmd_sdp_tables(args):
    """Reproduce the SDP tables, one status per cell."""
    setup_logging(args.log_level, args.log_file)
    print("🚀 Solving SDP table cells...")
    cells = run_sdp_tables(
        t=args.t, seed=args.seed, tol=args.bisection_tol, solver_tol=args.tol
    )
    for cell in cells:
        value = "-" if cell.value is None else f"{cell.value:.4f}"
        ref = "" if cell.reference is None else f" (reference {cell.reference})"
        flag = " ⚠️" if cell.deviates else ""
        print(
            f"  {cell.table:<26} s{cell.scenario} {cell.cell:<24} "
            f"{cell.status:<14} {value}{ref}{flag}"
        )
    if args.out:
        if args.format == "csv":
            exporter = CsvRecordExporter(args.out, columns=TABLE_COLUMNS)
            exporter.initialize()
            exporter.export_batch([c.to_dict() for c in cells])
            exporter.shutdown()
            print(f"💾 Wrote {args.out}")
        else:
            _write_json(args.out, {"cells": [c.to_dict() for c in cells]})
    return EXIT_OK


def cmd_petz(args):
    """Dump the Petz emergent channel of a scenario and generator."""
    setup_logging(args.log_level, args.log_file)
    exp = _experiment(args)
    sc = get_scenario(exp.scenario_id, exp.coupling)
    gamma = petz_emergent(sc.unitary(exp.t), sc.cg, exp.build_generator(), exp.rank_tol)
    data = {
        "scenario": sc.id,
        "generator": exp.generator_label,
        "t": exp.t,
        "kraus": gamma.to_dict(),
        "choi": kraus_to_choi(gamma).to_dict(),
    }
    _write_json(args.out, data)
    return EXIT_OK


def cmd_diamond(args):
    """Diamond distance between two channels."""
    setup_logging(args.log_level, args.log_file)
    config = get_config()
    a = parse_channel(args.channel_a, config)
    b = parse_channel(args.channel_b, config)
    delta = kraus_to_choi(a) - kraus_to_choi(b)
    value = diamond_norm(delta, formulation=args.formulation, **config.solver_options(args.tol))
    print(f"✅ ||{args.channel_a} - {args.channel_b}||_diamond = {value:.10f}")
    return EXIT_OK


def cmd_feasibility(args):
    """Search for a state-independent emergent channel."""
    setup_logging(args.log_level, args.log_file)
    config = get_config()
    sc = get_scenario(args.scenario, config.coupling)
    try:
        choi = feasibility_emergent(sc, args.t, **config.solver_options(args.tol))
    except InfeasibleError as e:
        print(f"ℹ️  Scenario {sc.id} at t = {args.t}: no emergent channel exists ({e})")
        return EXIT_INFEASIBLE
    print(f"✅ Scenario {sc.id} at t = {args.t}: emergent channel found")
    _write_json(args.out, {"scenario": sc.id, "t": args.t, "choi": choi.to_dict()})
    return EXIT_OK


def cmd_show(args):
    """Summarize a JSON output file, gzip-compressed or plain."""
    setup_logging(args.log_level, args.log_file)
    try:
        data = OutputPipeline(get_config()).read(args.path)
    except RuntimeError as e:
        raise ValueError(f"cannot read {args.path}: {e}") from e
    if not isinstance(data, dict):
        raise ValueError(f"{args.path} is not an output document")
    if "records" in data:
        records = [BenchmarkRecord.from_dict(r) for r in data["records"]]
        meta = data.get("meta", {})
        if meta:
            print(f"📄 scenario {meta.get('scenario_id')}, seed {meta.get('seed')}")
        _print_summary(records)
    elif "cells" in data:
        for cell in data["cells"]:
            value = "-" if cell["value"] is None else f"{cell['value']:.4f}"
            print(f"  {cell['table']:<26} s{cell['scenario']} {cell['cell']:<24} {value}")
    else:
        print(json.dumps(data, indent=2))
    return EXIT_OK


def cmd_config(args):
    """View or set configuration."""
    config = get_config()

    if args.show:
        print("⚙️  Current Configuration\n")
        print(config.to_json())
    elif args.profile:
        try:
            profile = Profile(args.profile.lower())
        except ValueError as e:
            print(f"❌ Invalid profile: {e}")
            return EXIT_ERROR
        set_config(CoarseGrainConfig.for_profile(profile))
        print(f"✅ Configuration set to {profile.value} profile")
    else:
        print("⚙️  quantum-coarse-grain Configuration\n")
        print(f"Samples: {config.samples:,}")
        print(f"Seed: {config.seed}")
        print(f"Workers: {config.workers} (batch size {config.batch_size})")
        print(
            f"Solver: feas_tol={config.feas_tol:g}, gap_tol={config.gap_tol:g}, "
            f"max_iter={config.max_iter}"
        )
        print(f"Output: {config.output_format}")
        print(f"Compression: {'Enabled' if config.compression_enabled else 'Disabled'}")

    return EXIT_OK


def _add_common_flags(p: argparse.ArgumentParser):
    p.add_argument(
        "--tol",
        type=float,
        help="Solver feasibility and gap tolerance (default: from config)",
    )
    p.add_argument(
        "--log-level",
        type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Log level (default: from config)",
    )
    p.add_argument("--log-file", type=str, help="Path to log file (default: stderr)")


def _add_experiment_flags(p: argparse.ArgumentParser, scenario_default: int = 1):
    p.add_argument(
        "--scenario",
        type=int,
        default=scenario_default,
        choices=[1, 2, 3, 4],
        help=f"Scenario id (default: {scenario_default})",
    )
    p.add_argument(
        "--generator",
        type=str,
        default="MM",
        help="ME, MM, RAND or WERNER:<lambda> (default: MM)",
    )
    p.add_argument("--samples", type=int, help="Evaluation states (default: from config)")
    p.add_argument("--seed", type=int, help="Sampling seed (default: from config)")
    p.add_argument("--t", type=float, default=1.0, help="Time in seconds (default: 1.0)")
    p.add_argument("--workers", type=int, help="Worker threads (default: from config)")
    _add_output_flags(p)


def _add_json_copy_flag(p: argparse.ArgumentParser):
    p.add_argument(
        "--json-copy",
        type=str,
        help="Also write the records as a JSON document to this path",
    )


def _add_output_flags(p: argparse.ArgumentParser):
    p.add_argument("--out", type=str, help="Output file (default: print to stdout)")
    p.add_argument(
        "--format",
        type=str,
        choices=["csv", "json"],
        default="csv",
        help="Output format (default: csv)",
    )
    _add_common_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coarse-grain",
        description="Emergent dynamics of coarse-grained quantum systems",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Benchmark the Petz emergent channel on scenario 2
  coarse-grain bench --scenario 2 --generator MM --samples 10000 --out bench.csv

  # Residual matrix of the four generators
  coarse-grain matrix --scenario 4

  # Time sweep on 50 points over one period
  coarse-grain timesweep --scenario 4 --t-grid 0:6.283185307179586:50 --samples 20

  # Werner sweep
  coarse-grain wernersweep --lambda-grid -0.3333:0.95:40 --out werner.csv

  # Reproduce the SDP tables
  coarse-grain sdp-tables --out tables.csv

  # Diamond distance between identity and sigma_z conjugation
  coarse-grain diamond id z

  # Is there a state-independent emergent channel?
  coarse-grain feasibility --scenario 3

  # Summarize a compressed JSON copy
  coarse-grain show bench.json.gz
        """,
    )

    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}",
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    bench_parser = subparsers.add_parser(
        "bench",
        help="Commutativity benchmark",
        description="Commutation residual of the Petz emergent channel over random states",
    )
    _add_experiment_flags(bench_parser)
    _add_json_copy_flag(bench_parser)
    bench_parser.add_argument(
        "--project-condition",
        action="store_true",
        help="Twirl each state onto the scenario's existence condition",
    )

    matrix_parser = subparsers.add_parser(
        "matrix",
        help="Cross-generator residual matrix",
        description="Residual of each generator's emergent channel on each generator state",
    )
    _add_experiment_flags(matrix_parser)

    time_parser = subparsers.add_parser(
        "timesweep",
        help="Residual against time",
        description="Residual over a time grid for fixed states (scenarios 2 and 4)",
    )
    _add_experiment_flags(time_parser, scenario_default=4)
    _add_json_copy_flag(time_parser)
    time_parser.add_argument(
        "--t-grid",
        type=parse_grid,
        help="start:stop:count or comma list (default: 50 points over [0, 2pi])",
    )
    time_parser.add_argument(
        "--project-condition",
        action="store_true",
        help="Twirl each state onto the scenario's existence condition",
    )

    werner_parser = subparsers.add_parser(
        "wernersweep",
        help="Residual against the Werner parameter",
        description="Werner-generator residual on each scenario's best state",
    )
    _add_experiment_flags(werner_parser)
    _add_json_copy_flag(werner_parser)
    werner_parser.add_argument(
        "--lambda-grid",
        type=parse_grid,
        help="start:stop:count or comma list within [-1/3, 1) (default: 40 points)",
    )
    werner_parser.add_argument(
        "--only-scenario",
        action="store_true",
        help="Sweep only --scenario instead of all four",
    )

    tables_parser = subparsers.add_parser(
        "sdp-tables",
        help="Reproduce the SDP tables",
        description="Closest state-independent channels, feasibility, robustness and thresholds",
    )
    tables_parser.add_argument("--t", type=float, default=1.0, help="Time (default: 1.0)")
    tables_parser.add_argument("--seed", type=int, help="Seed for random noise channels")
    tables_parser.add_argument(
        "--bisection-tol", type=float, help="Threshold search width (default: from config)"
    )
    _add_output_flags(tables_parser)

    petz_parser = subparsers.add_parser(
        "petz",
        help="Dump a Petz emergent channel",
        description="Kraus and Choi form of the Petz emergent channel as JSON",
    )
    _add_experiment_flags(petz_parser)

    diamond_parser = subparsers.add_parser(
        "diamond",
        help="Diamond distance between two channels",
        description="Channels: id[:D], x, y, z, depol:P, swap, zint:T or @file.json",
    )
    diamond_parser.add_argument("channel_a", type=str, help="First channel")
    diamond_parser.add_argument("channel_b", type=str, help="Second channel")
    diamond_parser.add_argument(
        "--formulation",
        choices=["dual", "primal"],
        default="dual",
        help="Program formulation (default: dual)",
    )
    _add_common_flags(diamond_parser)

    feas_parser = subparsers.add_parser(
        "feasibility",
        help="Search for a state-independent emergent channel",
        description="Exit code 2 when the scenario admits none",
    )
    feas_parser.add_argument("--scenario", type=int, default=1, choices=[1, 2, 3, 4])
    feas_parser.add_argument("--t", type=float, default=1.0, help="Time (default: 1.0)")
    _add_output_flags(feas_parser)

    show_parser = subparsers.add_parser(
        "show",
        help="Summarize a JSON output file",
        description="Read a JSON document written with --format json or --json-copy",
    )
    show_parser.add_argument("path", type=str, help="Output file (.json or .json.gz)")
    _add_common_flags(show_parser)

    config_parser = subparsers.add_parser(
        "config",
        help="View or set configuration",
        description="View current configuration or set a profile preset",
    )
    config_parser.add_argument(
        "--show",
        action="store_true",
        help="Show full configuration",
    )
    config_parser.add_argument(
        "--profile",
        type=str,
        choices=["desk", "paper", "debug"],
        help="Set configuration profile (desk, paper, debug)",
    )

    return parser


COMMANDS = {
    "bench": cmd_bench,
    "matrix": cmd_matrix,
    "timesweep": cmd_timesweep,
    "wernersweep": cmd_wernersweep,
    "sdp-tables": cmd_sdp_tables,
    "petz": cmd_petz,
    "diamond": cmd_diamond,
    "feasibility": cmd_feasibility,
    "show": cmd_show,
    "config": cmd_config,
}


def main(argv: Optional[List[str]] = None):
    """Main entry point for CLI."""
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)

    handler = COMMANDS.get(args.command)
    if handler is None:
        parser.print_help()
        return EXIT_OK

    try:
        return handler(args)
    except (ValueError, OSError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main() or 0)

#!/usr/bin/env python3
"""
fiberweb command-line front end

Runs one experiment per invocation and writes a result bundle (outputs,
``config.json`` echo, ``provenance.json``) into the output directory.

Usage:
    # Settle and drive a network, store its readout trace
    python -m src.cli.main simulate --config fiberweb_config.json --out runs/base

    # Capacity report (and figures) for a stored trace
    python -m src.cli.main evaluate runs/base/trace.npz --tasks legendre memory narma:2

    # Grid sweep over the axes in the config's sweep section
    python -m src.cli.main sweep --workers 4 --out runs/sweep

    # Readout feature down-selection on a stored trace
    python -m src.cli.main features runs/base/trace.npz --groups all midpoint_lateral

Exit codes: 0 success, 1 configuration or input error, 2 numerical failure,
3 sweep finished with failed points.
"""

import argparse
import io
import json
import logging
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import pandas as pd

from fiberweb_config import FiberWebConfigManager, LoggingSection, RunConfig, status_marks
from src import __version__
from src.analysis.features import compare_feature_groups, scores_frame
from src.analysis.sweep import SweepGrid, failed_count, run_sweep, split_timings
from src.errors import ConfigError, FiberWebError, NumericalFailure
from src.files import write_json_atomic, write_text_atomic
from src.network.assembly import assemble
from src.network.simulator import settle, simulate
from src.reservoir.report import build_report
from src.reservoir.trace import load_trace, save_trace
from src.signals.spline_input import generate_spline_input, signal_to_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_PARTIAL = 3


def _progress(kind: str, message: str) -> None:
    print(f"{status_marks()[kind]} {message}", flush=True)


def configure_logging(section: LoggingSection) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if section.file_logging:
        handlers.append(logging.FileHandler(section.log_file, encoding="utf-8"))
    logging.basicConfig(level=section.level, format=section.format, handlers=handlers, force=True)


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Config file, then environment, then command-line flags; validated before anything runs."""
    if args.config and not Path(args.config).expanduser().exists():
        raise ConfigError([f"config file {args.config} not found"])
    manager = FiberWebConfigManager(config_file=args.config)
    overrides = {
        "run.seed": args.seed,
        "run.workers": getattr(args, "workers", None),
        "output.directory": args.out,
        "output.format": getattr(args, "format", None),
    }
    for key, value in overrides.items():
        if value is not None:
            manager.set(key, value)
    if getattr(args, "tasks", None):
        manager.set("tasks", list(args.tasks))
    if getattr(args, "groups", None):
        manager.set("features.groups", list(args.groups))
    if getattr(args, "no_plots", False):
        manager.set("output.plots", False)
    return manager.run_config()


def provenance(cfg: RunConfig, command: str, started: str) -> Dict[str, Any]:
    return {
        "toolkit": "fiberweb-rc",
        "version": __version__,
        "command": command,
        "seed": cfg.run.seed,
        "started": started,
        "finished": _timestamp(),
    }


def _timestamp() -> str:
    epoch = os.getenv("SOURCE_DATE_EPOCH")
    if epoch:
        return datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()
    return datetime.now(tz=timezone.utc).isoformat()


def write_table(frame: pd.DataFrame, path: Path) -> Path:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format="%.12g", lineterminator="\n")
    return write_text_atomic(path, buffer.getvalue())


def write_records(frame: pd.DataFrame, path: Path) -> Path:
    # NaN -> null; write_json_atomic rejects bare NaN
    records = json.loads(frame.to_json(orient="records", double_precision=15))
    return write_json_atomic(path, {"rows": records})


# ----- commands ----------------------------------------------------------

def cmd_simulate(cfg: RunConfig, args: argparse.Namespace, out: Path) -> int:
    spec = cfg.network.to_spec()
    signal = generate_spline_input(cfg.signal.to_spec(cfg.run.seed))
    _progress("run", f"Assembling {spec.topology.label} at {spec.node_spacing * 1e3:.1f} mm spacing")
    network = assemble(spec)
    _progress("run", f"Settling {len(network.fibers)} fibers, {len(network.couplings)} couplings")
    network = settle(
        network,
        tolerance=cfg.settle.tolerance,
        max_time=cfg.settle.max_time,
        safety=cfg.integration.safety,
        perturbation=cfg.settle.perturbation,
        seed=cfg.run.seed,
    )
    _progress(
        "run", f"Simulating {signal.duration:g} s at {signal.sample_rate:g} Hz, F_max = {spec.input_force_max:g} N"
    )
    trace = simulate(network, signal, spec.input_force_max, cfg.integration.safety)
    data_path, _ = save_trace(trace, out / "trace", cfg.output.format)
    signal_to_csv(signal, out / "input.csv")
    _progress("ok", f"Trace {data_path} ({len(trace)} rows x {trace.features.shape[1]} columns)")
    return EXIT_OK


def cmd_evaluate(cfg: RunConfig, args: argparse.Namespace, out: Path) -> int:
    tasks = cfg.capacity_tasks()
    if not tasks:
        raise ConfigError(["tasks: no capacity task requested (legendre, memory or narma:<n>)"])
    trace = load_trace(args.trace)
    _progress("run", f"Evaluating {', '.join(tasks)} on {Path(args.trace).name}")
    report = build_report(
        trace,
        cfg.ridge.to_config(),
        tasks,
        cfg.task_options.horizon,
        cfg.task_options.lag_step,
        cfg.narma.to_config(),
        cfg.task_options.max_order,
    )
    report.context["trace"] = Path(args.trace).name
    json_path, _ = report.write(out)
    if cfg.output.plots:
        from src.analysis import plots

        if report.legendre:
            plots.plot_legendre(report, out / "legendre_capacity.svg")
        if report.memory:
            plots.plot_memory_curve(report, out / "memory_curve.svg")
        if report.narma:
            plots.plot_narma(report.narma, out / "narma.svg")
    summary = [f"C_nl={report.c_nl:.4f}" if report.c_nl is not None else "",
               f"C_m={report.c_m:.4f}" if report.c_m is not None else ""]
    summary += [f"NARMA-{r.order} rmse={r.rmse:.5f}" for r in report.narma]
    _progress("ok", f"Report {json_path}: {' '.join(s for s in summary if s)}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args: argparse.Namespace, out: Path) -> int:
    if not cfg.sweep.axes:
        raise ConfigError(["sweep.axes: a sweep needs at least one axis"])
    grid = SweepGrid(
        base=cfg.network.to_spec(),
        axes=cfg.sweep.axes,
        signal=cfg.signal.to_spec(cfg.run.seed),
        ridge=cfg.ridge.to_config(),
        tasks=tuple(cfg.capacity_tasks()),
        narma=cfg.narma.to_config(),
        horizon=cfg.task_options.horizon,
        lag_step=cfg.task_options.lag_step,
        settle_tolerance=cfg.settle.tolerance,
        settle_max_time=cfg.settle.max_time,
        perturbation=cfg.settle.perturbation,
        max_order=cfg.task_options.max_order,
        safety=cfg.integration.safety,
        seed=cfg.run.seed,
    )
    _progress("run", f"Sweeping {len(grid)} points over {', '.join(grid.axes)} with {cfg.run.workers} worker(s)")
    frame = run_sweep(grid, cfg.run.workers)
    results, timings = split_timings(frame)
    write_table(results, out / "sweep_results.csv")
    write_records(results, out / "sweep_results.json")
    write_table(timings, out / "sweep_timings.csv")
    if cfg.output.plots:
        _sweep_figures(cfg, results, out)
    failed = failed_count(results)
    if failed:
        _progress("warn", f"{failed} of {len(results)} sweep points failed; see the error column")
        return EXIT_PARTIAL
    _progress("ok", f"Sweep table {out / 'sweep_results.csv'} ({len(results)} rows)")
    return EXIT_OK


def _sweep_figures(cfg: RunConfig, results: pd.DataFrame, out: Path) -> None:
    from src.analysis import plots

    metrics = [m for m in ("C_nl", "C_m") if m in results]
    if not metrics:
        return
    ok = results[results["status"] == "ok"]
    if len(ok) and ok["force_max"].nunique() > 1 and ok["node_spacing"].nunique() > 1:
        for metric in metrics:
            plots.plot_capacity_heatmap(
                results,
                metric,
                out / f"heatmap_{metric}.svg",
                cfg.network.material(),
                cfg.sweep.reference_deflection,
            )
    plots.plot_capacity_vs_buckling(results, out / "capacity_vs_B.svg")


def cmd_features(cfg: RunConfig, args: argparse.Namespace, out: Path) -> int:
    trace = load_trace(args.trace)
    groups = cfg.feature_groups()
    _progress("run", f"Comparing {len(groups)} feature group(s) on {Path(args.trace).name}")
    scores = compare_feature_groups(
        trace,
        groups,
        cfg.ridge.to_config(alpha=cfg.features.alpha),
        cfg.features.actuation_radius,
        cfg.features.spring_band,
        cfg.task_options.horizon,
        cfg.task_options.lag_step,
    )
    frame = scores_frame(scores)
    write_table(frame, out / "feature_groups.csv")
    write_records(frame, out / "feature_groups.json")
    if cfg.output.plots:
        from src.analysis import plots

        plots.plot_feature_groups(scores, out / "feature_groups.svg")
    for s in scores:
        ratio = f"{s.c_nl_ratio:.3f}" if s.c_nl_ratio is not None else "n/a"
        _progress("ok", f"{s.group.value}: {s.columns} of {s.total_columns} columns, C_nl ratio {ratio}")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig, argparse.Namespace, Path], int]] = {
    "simulate": cmd_simulate,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "features": cmd_features,
}


# ----- CLI ---------------------------------------------------------------

def _create_argument_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", default=None, help="Path to configuration file")
    common.add_argument("--seed", type=int, default=None, help="Seed for the input signal and perturbation")
    common.add_argument("--out", default=None, help="Output directory (overrides output.directory)")
    common.add_argument("--no-plots", dest="no_plots", action="store_true", help="Skip SVG figures")

    parser = argparse.ArgumentParser(
        description="Fiber-network reservoir simulator and capacity toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    sub = parser.add_subparsers(dest="command", help="Available commands")

    sim = sub.add_parser("simulate", parents=[common], help="Simulate a network and store its trace")
    sim.add_argument("--format", choices=["csv", "binary"], default=None, help="Trace storage format")

    ev = sub.add_parser("evaluate", parents=[common], help="Capacity report for a stored trace")
    ev.add_argument("trace", help="Trace data file or its .json sidecar")
    ev.add_argument("--tasks", nargs="+", default=None, help="legendre, memory, narma:<n>")

    sw = sub.add_parser("sweep", parents=[common], help="Run the configured parameter sweep")
    sw.add_argument("--workers", type=int, default=None, help="Parallel worker processes")

    feat = sub.add_parser("features", parents=[common], help="Compare readout feature groups")
    feat.add_argument("trace", help="Trace data file or its .json sidecar")
    feat.add_argument("--groups", nargs="+", default=None, help="Feature group names")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = _create_argument_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_CONFIG

    marks = status_marks()
    try:
        cfg = load_run_config(args)
    except ConfigError as e:
        print(f"{marks['err']} Configuration validation failed:")
        for issue in e.issues:
            print(f"  • {issue}")
        return EXIT_CONFIG

    configure_logging(cfg.logging)
    out = Path(cfg.output.directory)
    started = _timestamp()
    try:
        code = COMMANDS[args.command](cfg, args, out)
        write_json_atomic(out / "config.json", cfg.model_dump(mode="json"))
        write_json_atomic(out / "provenance.json", provenance(cfg, args.command, started))
        return code
    except NumericalFailure as e:
        print(f"{marks['err']} Numerical failure: {type(e).__name__}: {e}")
        return EXIT_NUMERICAL
    except ConfigError as e:
        print(f"{marks['err']} Configuration error: {e}")
        return EXIT_CONFIG
    except FiberWebError as e:
        print(f"{marks['err']} {type(e).__name__}: {e}")
        return EXIT_CONFIG
    except KeyboardInterrupt:
        print(f"\n{marks['warn']} Interrupted")
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())

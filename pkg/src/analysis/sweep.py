"""Parameter sweeps: assemble, settle, simulate and evaluate every grid point.

Points are independent jobs. They run in a process pool when more than one
worker is requested, and the table is always assembled in row-major grid
order. A failing point becomes a ``status == "failed"`` row and never aborts
the sweep.
"""
import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.analysis.predictors import BucklingQuery, buckling_number, force_for_buckling_number, force_for_deflection
from src.errors import FiberWebError, InvalidArgumentError
from src.network.assembly import assemble
from src.network.simulator import (
    DEFAULT_SETTLE_MAX_TIME,
    DEFAULT_SETTLE_TOLERANCE,
    PERTURBATION,
    settle,
    simulate,
)
from src.network.topology import NetworkSpec, Topology, TopologyKind
from src.reservoir.readout import RidgeConfig
from src.reservoir.report import CapacityReport, build_report, parse_task
from src.reservoir.tasks import DEFAULT_HORIZON, DEFAULT_LAG_STEP, DEFAULT_MAX_ORDER, NarmaConfig
from src.signals.spline_input import SignalSpec, generate_spline_input

logger = logging.getLogger(__name__)

AXES = ("topology", "size", "length", "spacing", "pretension", "force", "buckling_number", "deflection")
FORCE_AXES = ("force", "buckling_number", "deflection")
TIMING_COLUMN = "wall_time_s"


@dataclass(frozen=True)
class SweepGrid:
    """Axes (name -> values) over a base network; every other setting is shared by all points.

    ``force`` is in N, ``deflection`` in m (force from the central-load
    deflection formula), ``buckling_number`` is B (force from the inverted
    buckling predictor). ``length`` keeps the outer fiber length fixed so the
    pitch becomes L/(N+1).
    """

    base: NetworkSpec
    axes: Dict[str, Tuple[Any, ...]]
    signal: SignalSpec = field(default_factory=SignalSpec)
    ridge: RidgeConfig = field(default_factory=RidgeConfig)
    tasks: Tuple[str, ...] = ("legendre", "memory")
    narma: NarmaConfig = field(default_factory=NarmaConfig)
    horizon: float = DEFAULT_HORIZON
    lag_step: float = DEFAULT_LAG_STEP
    settle_tolerance: float = DEFAULT_SETTLE_TOLERANCE
    settle_max_time: float = DEFAULT_SETTLE_MAX_TIME
    perturbation: float = PERTURBATION
    max_order: int = DEFAULT_MAX_ORDER
    safety: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        axes = {name: tuple(values) for name, values in self.axes.items()}
        object.__setattr__(self, "axes", axes)
        if not axes:
            raise InvalidArgumentError("a sweep needs at least one axis")
        for name, values in axes.items():
            if name not in AXES:
                raise InvalidArgumentError(f"unknown sweep axis {name!r}; expected one of {', '.join(AXES)}")
            if not values:
                raise InvalidArgumentError(f"sweep axis {name!r} is empty")
        if sum(name in axes for name in FORCE_AXES) > 1:
            raise InvalidArgumentError(f"at most one of {', '.join(FORCE_AXES)} may be swept")
        if "length" in axes and "spacing" in axes:
            raise InvalidArgumentError("sweep either spacing or length, not both")
        for task in self.tasks:
            parse_task(task)

    def points(self) -> List[Dict[str, Any]]:
        names = list(self.axes)
        return [dict(zip(names, combo)) for combo in itertools.product(*self.axes.values())]

    def __len__(self) -> int:
        return math.prod(len(v) for v in self.axes.values())


def resolve_point(grid: SweepGrid, params: Dict[str, Any]) -> NetworkSpec:
    """Apply one point's axis values to the base network."""
    spec = grid.base
    topology = spec.topology
    if "topology" in params:
        topology = Topology.parse(params["topology"])
    if "size" in params:
        topology = Topology(topology.kind, int(params["size"]))
    changes: Dict[str, Any] = {"topology": topology}
    if "length" in params:
        if topology.kind is not TopologyKind.CROSSHATCH:
            raise InvalidArgumentError("the length axis applies to crosshatch networks")
        changes["node_spacing"] = float(params["length"]) / (topology.size + 1)
    if "spacing" in params:
        changes["node_spacing"] = float(params["spacing"])
    if "pretension" in params:
        changes["pretension"] = float(params["pretension"])
    spacing = changes.get("node_spacing", spec.node_spacing)
    e_mod, inertia = spec.material.youngs_modulus, spec.material.second_moment
    if "force" in params:
        changes["input_force_max"] = float(params["force"])
    elif "buckling_number" in params:
        changes["input_force_max"] = force_for_buckling_number(float(params["buckling_number"]), spacing, e_mod, inertia)
    elif "deflection" in params:
        changes["input_force_max"] = force_for_deflection(float(params["deflection"]), e_mod, inertia, spacing)
    return spec.with_changes(**changes)


def report_row(report: CapacityReport) -> Dict[str, Any]:
    row: Dict[str, Any] = {"C_nl": report.c_nl, "C_m": report.c_m}
    if report.legendre:
        for p in report.legendre.points:
            row[f"legendre_{int(p.key)}"] = p.test
    if report.memory:
        for p in report.memory.points:
            row[f"memory_{p.key:.2f}"] = p.test
    for r in report.narma:
        row[f"narma{r.order}_rmse"] = r.rmse
        row[f"narma{r.order}_idr"] = r.idr
    return row


def evaluate_point(grid: SweepGrid, index: int, params: Dict[str, Any]) -> Dict[str, Any]:
    """Run one grid point; errors of the toolkit become a failed row."""
    started = time.perf_counter()
    row: Dict[str, Any] = {"point": index, **params}
    try:
        spec = resolve_point(grid, params)
        row.update(
            topology=spec.topology.label,
            node_spacing=spec.node_spacing,
            pretension=spec.pretension,
            force_max=spec.input_force_max,
            buckling_number=buckling_number(
                BucklingQuery(
                    spec.input_force_max,
                    spec.node_spacing,
                    spec.material.youngs_modulus,
                    spec.material.second_moment,
                )
            ),
        )
        logger.info("Sweep point %d: %s", index, params)
        signal = generate_spline_input(grid.signal)
        network = settle(
            assemble(spec),
            tolerance=grid.settle_tolerance,
            max_time=grid.settle_max_time,
            safety=grid.safety,
            perturbation=grid.perturbation,
            seed=grid.seed,
        )
        trace = simulate(network, signal, spec.input_force_max, grid.safety)
        report = build_report(
            trace, grid.ridge, grid.tasks, grid.horizon, grid.lag_step, grid.narma, grid.max_order
        )
        row.update(report_row(report))
        row.update(status="ok", error="")
    except (FiberWebError, FloatingPointError) as e:
        logger.warning("Sweep point %d failed: %s", index, e)
        row.update(status="failed", error=f"{type(e).__name__}: {e}")
    row[TIMING_COLUMN] = time.perf_counter() - started
    return row


def run_sweep(grid: SweepGrid, workers: int = 1) -> pd.DataFrame:
    """One row per grid point in row-major order; ``wall_time_s`` is the only nondeterministic column."""
    points = grid.points()
    logger.info("Sweeping %d points with %d worker(s)", len(points), workers)
    if workers <= 1 or len(points) == 1:
        rows = [evaluate_point(grid, i, p) for i, p in enumerate(points)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(evaluate_point, grid, i, p) for i, p in enumerate(points)]
            rows = [f.result() for f in futures]
    frame = pd.DataFrame(rows)
    leading = ["point", *grid.axes, "topology", "node_spacing", "pretension", "force_max", "buckling_number",
               "status", "error", "C_nl", "C_m"]
    ordered = list(dict.fromkeys(c for c in leading if c in frame.columns))
    rest = [c for c in frame.columns if c not in ordered and c != TIMING_COLUMN]
    return frame[ordered + rest + [TIMING_COLUMN]]


def split_timings(frame: pd.DataFrame) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """``(results, timings)``: the results table without wall-clock time, and point -> seconds."""
    return frame.drop(columns=[TIMING_COLUMN]), frame[["point", TIMING_COLUMN]]


def failed_count(frame: pd.DataFrame) -> int:
    return int((frame["status"] != "ok").sum())


def grid_matrix(frame: pd.DataFrame, value: str, rows: str, cols: str) -> Tuple[np.ndarray, list, list]:
    """Pivot one metric over two axes; failed points become NaN (masked cells)."""
    ok = frame.where(frame["status"] == "ok")
    ok[rows], ok[cols] = frame[rows], frame[cols]
    table = ok.pivot_table(index=rows, columns=cols, values=value, aggfunc="first", dropna=False)
    return table.to_numpy(dtype=float), list(table.index), list(table.columns)


def axes_from_config(axes: Dict[str, Optional[Sequence[Any]]]) -> Dict[str, Tuple[Any, ...]]:
    return {name: tuple(values) for name, values in axes.items() if values}

"""Reservoir traces, ridge readouts and capacity benchmarks."""
from .readout import ReadoutFit, RidgeConfig, RidgeSolver, capacity, train_readout
from .report import CapacityReport, build_report, parse_task
from .tasks import (
    CapacityCurve,
    NarmaConfig,
    NarmaResult,
    TaskCapacity,
    evaluate_narma,
    lag_grid,
    legendre_targets,
    memory_capacity,
    narma_input_baseline,
    narma_series,
    nonlinear_capacity,
)
from .trace import FeatureColumn, ReservoirTrace, load_trace, save_trace

__all__ = [
    "CapacityCurve",
    "CapacityReport",
    "FeatureColumn",
    "NarmaConfig",
    "NarmaResult",
    "ReadoutFit",
    "ReservoirTrace",
    "RidgeConfig",
    "RidgeSolver",
    "TaskCapacity",
    "build_report",
    "capacity",
    "evaluate_narma",
    "lag_grid",
    "legendre_targets",
    "load_trace",
    "memory_capacity",
    "narma_input_baseline",
    "narma_series",
    "nonlinear_capacity",
    "parse_task",
    "save_trace",
    "train_readout",
]

"""Capacity report: JSON document plus a flat per-target CSV table."""
import io
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from src.errors import InvalidArgumentError
from src.files import write_json_atomic, write_text_atomic
from src.reservoir.readout import RidgeConfig, RidgeSolver
from src.reservoir.tasks import (
    DEFAULT_HORIZON,
    DEFAULT_LAG_STEP,
    DEFAULT_MAX_ORDER,
    CapacityCurve,
    NarmaConfig,
    NarmaResult,
    TaskCapacity,
    evaluate_narma,
    memory_capacity,
    nonlinear_capacity,
)
from src.reservoir.trace import ReservoirTrace

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["task", "key", "train_capacity", "test_capacity", "rmse", "idr", "bias", "baseline_rmse"]


@dataclass
class CapacityReport:
    legendre: Optional[CapacityCurve] = None
    memory: Optional[CapacityCurve] = None
    narma: List[NarmaResult] = field(default_factory=list)
    context: Dict[str, Any] = field(default_factory=dict)

    @property
    def c_nl(self) -> Optional[float]:
        return self.legendre.aggregate if self.legendre else None

    @property
    def c_m(self) -> Optional[float]:
        return self.memory.aggregate if self.memory else None

    def memory_curve(self) -> List[Tuple[float, Optional[float]]]:
        return [(p.key, p.test) for p in self.memory.points] if self.memory else []

    def to_dict(self) -> Dict[str, Any]:
        def curve(c: Optional[CapacityCurve]) -> Optional[List[Dict[str, Any]]]:
            if c is None:
                return None
            return [{"key": p.key, "train": p.train, "test": p.test} for p in c.points]

        return {
            "C_nl": self.c_nl,
            "C_m": self.c_m,
            "legendre": curve(self.legendre),
            "memory": curve(self.memory),
            "narma": [r.summary() for r in self.narma],
            "context": self.context,
        }

    def rows(self) -> List[Dict[str, Any]]:
        out: List[Dict[str, Any]] = []
        for c in (self.legendre, self.memory):
            if c is None:
                continue
            for p in c.points:
                out.append({"task": c.task, "key": p.key, "train_capacity": p.train, "test_capacity": p.test})
            out.append({"task": "C_nl" if c.task == "legendre" else "C_m", "test_capacity": c.aggregate})
        for r in self.narma:
            out.append(
                {
                    "task": "narma",
                    "key": r.order,
                    "rmse": r.rmse,
                    "idr": r.idr,
                    "bias": r.bias,
                    "baseline_rmse": r.baseline_rmse,
                }
            )
        return out

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows(), columns=CSV_COLUMNS)

    def write(self, directory: Union[str, Path], stem: str = "capacity_report") -> Tuple[Path, Path]:
        directory = Path(directory)
        json_path = write_json_atomic(directory / f"{stem}.json", self.to_dict())
        buffer = io.StringIO()
        self.to_frame().to_csv(buffer, index=False, float_format="%.12g", lineterminator="\n")
        csv_path = write_text_atomic(directory / f"{stem}.csv", buffer.getvalue())
        logger.info("Wrote capacity report to %s", directory)
        return json_path, csv_path

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CapacityReport":
        def curve(task: str, items: Optional[List[Dict[str, Any]]]) -> Optional[CapacityCurve]:
            if items is None:
                return None
            return CapacityCurve(task, [TaskCapacity(task, i["key"], i["train"], i["test"]) for i in items])

        narma = [
            NarmaResult(
                order=n["order"],
                rmse=n["rmse"],
                idr=n["idr"],
                bias=n["bias"],
                predictions=None,
                target=None,
                baseline_rmse=n.get("baseline_rmse"),
            )
            for n in data.get("narma", [])
        ]
        return cls(curve("legendre", data.get("legendre")), curve("memory", data.get("memory")), narma,
                   dict(data.get("context") or {}))


TASK_NAMES = ("legendre", "memory", "narma")


def parse_task(text: str) -> Tuple[str, Optional[int]]:
    """``"legendre"``, ``"memory"`` or ``"narma:<n>"`` -> ``(name, order)``."""
    name, _, arg = str(text).strip().lower().partition(":")
    if name not in TASK_NAMES:
        raise InvalidArgumentError(f"unknown task {text!r}; expected legendre, memory or narma:<n>")
    if name == "narma":
        try:
            return name, int(arg)
        except ValueError as e:
            raise InvalidArgumentError(f"task {text!r} needs an integer order, e.g. narma:2") from e
    if arg:
        raise InvalidArgumentError(f"task {name!r} takes no argument")
    return name, None


def build_report(
    trace: ReservoirTrace,
    ridge: RidgeConfig,
    tasks: Sequence[str],
    horizon: float = DEFAULT_HORIZON,
    lag_step: float = DEFAULT_LAG_STEP,
    narma: Optional[NarmaConfig] = None,
    max_order: int = DEFAULT_MAX_ORDER,
) -> CapacityReport:
    """Run every requested task on ``trace``; the Legendre and memory targets share one solver."""
    parsed = [parse_task(t) for t in tasks]
    narma = narma or NarmaConfig()
    report = CapacityReport(context={"tasks": [str(t) for t in tasks], "ridge": asdict(ridge)})
    solver = RidgeSolver.for_trace(trace, ridge)
    for name, order in parsed:
        if name == "legendre":
            report.legendre = nonlinear_capacity(trace, ridge, max_order, solver=solver)
        elif name == "memory":
            report.memory = memory_capacity(trace, ridge, horizon, lag_step, solver=solver)
        else:
            report.narma.append(evaluate_narma(trace, ridge, replace(narma, order=order), with_baseline=True))
    return report

"""Reservoir traces and their on-disk formats.

A trace is stored as a data file (``.npz`` or ``.csv``) next to a JSON
sidecar with the same stem. The sidecar carries everything that is not a
number per sample: column metadata, the drive specification, the readout
registry and the network description.
"""
import io
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from src.errors import InvalidArgumentError, SchemaError
from src.files import write_json_atomic, write_text_atomic, write_with_atomic
from src.signals.spline_input import InputSignal, SignalSpec, check_factor, decimate

logger = logging.getLogger(__name__)

SCHEMA = "fiberweb-trace/1"
FORMATS = ("binary", "csv")


@dataclass(frozen=True)
class FeatureColumn:
    name: str
    point_index: int
    kind: str
    component: str

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "point_index": self.point_index, "kind": self.kind, "component": self.component}


@dataclass
class ReservoirTrace:
    """Readout displacements (m), one row per sample of ``input``.

    ``registry`` is the serialized readout registry of the simulated network;
    synthetic traces leave it ``None``.
    """

    times: NDArray[np.float64]
    features: NDArray[np.float64]
    feature_meta: List[FeatureColumn]
    input: InputSignal
    registry: Optional[Dict[str, Any]] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=np.float64).reshape(-1)
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise InvalidArgumentError("features must be a 2-D matrix")
        rows = self.features.shape[0]
        if not rows == self.times.shape[0] == len(self.input):
            raise InvalidArgumentError(
                f"row mismatch: {rows} feature rows, {self.times.shape[0]} times, {len(self.input)} input samples"
            )
        if self.features.shape[1] != len(self.feature_meta):
            raise InvalidArgumentError(
                f"{self.features.shape[1]} feature columns but {len(self.feature_meta)} column descriptions"
            )

    @classmethod
    def from_columns(
        cls, features: NDArray[np.float64], names: Sequence[str], signal: InputSignal, kind: str = "synthetic"
    ) -> "ReservoirTrace":
        """Trace built from arbitrary columns (synthetic oracles, delay lines)."""
        meta = [FeatureColumn(name, i, kind, "x") for i, name in enumerate(names)]
        return cls(signal.times(), features, meta, signal)

    @property
    def sample_rate(self) -> float:
        return self.input.sample_rate

    @property
    def column_names(self) -> List[str]:
        return [c.name for c in self.feature_meta]

    def __len__(self) -> int:
        return self.features.shape[0]

    def select(self, columns: Sequence[int]) -> "ReservoirTrace":
        columns = list(columns)
        return ReservoirTrace(
            self.times,
            self.features[:, columns],
            [self.feature_meta[c] for c in columns],
            self.input,
            self.registry,
            dict(self.metadata),
        )

    def sidecar(self, data_format: str, data_file: str) -> Dict[str, Any]:
        return {
            "schema": SCHEMA,
            "format": data_format,
            "data_file": data_file,
            "rows": len(self),
            "sample_rate": self.sample_rate,
            "input_range": list(self.input.value_range),
            "signal": self.input.spec.to_dict(),
            "columns": [c.to_dict() for c in self.feature_meta],
            "registry": self.registry,
            "metadata": self.metadata,
        }


@decimate.register
def _(series: ReservoirTrace, factor: int) -> ReservoirTrace:
    factor = check_factor(factor)
    if factor == 1:
        return series
    return ReservoirTrace(
        series.times[::factor],
        series.features[::factor],
        list(series.feature_meta),
        decimate(series.input, factor),
        series.registry,
        dict(series.metadata),
    )


def _csv_frame(trace: ReservoirTrace) -> pd.DataFrame:
    frame = pd.DataFrame(trace.features, columns=trace.column_names)
    frame.insert(0, "u", trace.input.samples)
    frame.insert(0, "time_s", trace.times)
    return frame


def save_trace(trace: ReservoirTrace, stem: Union[str, Path], data_format: str = "binary") -> Tuple[Path, Path]:
    """Write ``<stem>.npz`` or ``<stem>.csv`` plus ``<stem>.json``; returns ``(data_path, sidecar_path)``."""
    if data_format not in FORMATS:
        raise InvalidArgumentError(f"trace format must be one of {FORMATS}, got {data_format!r}")
    stem = Path(stem)
    if data_format == "binary":
        data_path = stem.with_suffix(".npz")

        def write_npz(tmp: Path) -> None:
            # a file handle keeps numpy from appending its own suffix to the temp name
            with open(tmp, "wb") as fh:
                np.savez(fh, times=trace.times, features=trace.features, input=np.asarray(trace.input.samples))

        write_with_atomic(data_path, write_npz)
    else:
        data_path = stem.with_suffix(".csv")
        buffer = io.StringIO()
        _csv_frame(trace).to_csv(buffer, index=False, float_format="%.17g", lineterminator="\n")
        write_text_atomic(data_path, buffer.getvalue())
    sidecar_path = write_json_atomic(stem.with_suffix(".json"), trace.sidecar(data_format, data_path.name))
    logger.info("Saved trace %s (%d x %d)", data_path, len(trace), trace.features.shape[1])
    return data_path, sidecar_path


def _read_sidecar(path: Path) -> Dict[str, Any]:
    try:
        meta = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise SchemaError(f"trace sidecar {path} not found") from e
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    for key in ("schema", "format", "data_file", "rows", "sample_rate", "signal", "columns"):
        if key not in meta:
            raise SchemaError(f"{path}: missing field {key!r}")
    if meta["schema"] != SCHEMA:
        raise SchemaError(f"{path}: unsupported schema {meta['schema']!r}")
    return meta


def load_trace(path: Union[str, Path]) -> ReservoirTrace:
    """Load a trace from its sidecar or data file, validating columns and sample rate."""
    path = Path(path)
    meta = _read_sidecar(path.with_suffix(".json"))
    data_path = path.with_name(meta["data_file"])
    columns = [FeatureColumn(**c) for c in meta["columns"]]
    names = [c.name for c in columns]
    try:
        if meta["format"] == "binary":
            with np.load(data_path) as data:
                times, features, samples = data["times"], data["features"], data["input"]
        else:
            frame = pd.read_csv(data_path)
            expected = ["time_s", "u"] + names
            if list(frame.columns) != expected:
                missing = [c for c in expected if c not in frame.columns]
                raise SchemaError(f"{data_path}: column mismatch (missing {missing[:5]})")
            times = frame["time_s"].to_numpy()
            samples = frame["u"].to_numpy()
            features = frame[names].to_numpy()
    except (OSError, KeyError) as e:
        raise SchemaError(f"cannot read trace data {data_path}: {e}") from e

    if features.ndim != 2 or features.shape != (meta["rows"], len(columns)):
        raise SchemaError(f"{data_path}: expected {meta['rows']} x {len(columns)} features, got {features.shape}")
    rate = float(meta["sample_rate"])
    if times.size > 1:
        observed = 1.0 / float(np.median(np.diff(times)))
        if not math.isclose(observed, rate, rel_tol=1e-6):
            raise SchemaError(f"{data_path}: sample spacing gives {observed:.6g} Hz, sidecar says {rate:.6g} Hz")

    spec = SignalSpec(**meta["signal"])
    signal = InputSignal(samples, rate, spec, tuple(meta.get("input_range") or (-spec.amplitude, spec.amplitude)))
    return ReservoirTrace(times, features, columns, signal, meta.get("registry"), meta.get("metadata") or {})

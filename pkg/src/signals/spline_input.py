"""Smooth random drive signal: a natural cubic spline through seeded uniform knots."""
import functools
import io
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from scipy.interpolate import CubicSpline

from src.errors import InvalidArgumentError, SchemaError
from src.files import write_text_atomic

logger = logging.getLogger(__name__)

MIN_KNOTS = 4


@dataclass(frozen=True)
class SignalSpec:
    seed: int = 0
    knot_rate: float = 5.0
    duration: float = 100.0
    sample_rate: float = 250.0
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise InvalidArgumentError(f"duration must be positive, got {self.duration!r}")
        if not (self.knot_rate > 0.0 and self.sample_rate > 0.0):
            raise InvalidArgumentError("knot_rate and sample_rate must be positive")
        if not self.knot_rate < self.sample_rate:
            raise InvalidArgumentError(
                f"knot_rate ({self.knot_rate} Hz) must be below sample_rate ({self.sample_rate} Hz)"
            )
        if not 0.0 < self.amplitude <= 1.0:
            raise InvalidArgumentError(f"amplitude must lie in (0, 1], got {self.amplitude!r}")

    @property
    def knot_count(self) -> int:
        return int(round(self.duration * self.knot_rate))

    @property
    def sample_count(self) -> int:
        return int(round(self.duration * self.sample_rate))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "knot_rate": self.knot_rate,
            "duration": self.duration,
            "sample_rate": self.sample_rate,
            "amplitude": self.amplitude,
        }


@dataclass(frozen=True)
class InputSignal:
    """Sampled drive ``u(t)``; ``value_range`` is the interval the samples are confined to."""

    samples: NDArray[np.float64]
    sample_rate: float
    spec: SignalSpec
    value_range: Optional[Tuple[float, float]] = field(default=None)

    def __post_init__(self) -> None:
        samples = np.array(self.samples, dtype=np.float64).reshape(-1)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if self.value_range is None:
            object.__setattr__(self, "value_range", (-self.spec.amplitude, self.spec.amplitude))
        lo, hi = self.value_range
        if samples.size and (samples.min() < lo - 1e-12 or samples.max() > hi + 1e-12):
            raise InvalidArgumentError(f"signal leaves its range [{lo}, {hi}]")

    def __len__(self) -> int:
        return self.samples.shape[0]

    def times(self) -> NDArray[np.float64]:
        return np.arange(len(self)) / self.sample_rate

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


def knot_times(spec: SignalSpec) -> NDArray[np.float64]:
    """Knots at ``k / knot_rate`` plus one closing knot at ``duration``, so no sample is extrapolated."""
    return np.append(np.arange(spec.knot_count) / spec.knot_rate, spec.duration)


def draw_knots(spec: SignalSpec) -> NDArray[np.float64]:
    return np.random.default_rng(spec.seed).uniform(-1.0, 1.0, size=spec.knot_count + 1)


def rescale_overshoot(values: NDArray[np.float64]) -> NDArray[np.float64]:
    """Divide by the peak magnitude only when it exceeds 1."""
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    return values / peak if peak > 1.0 else values


def generate_spline_input(spec: SignalSpec, knot_values: Optional[Sequence[float]] = None) -> InputSignal:
    """Sample the spline at ``spec.sample_rate``.

    ``knot_values`` replaces the random draw (test hook) and must include the closing knot.
    """
    if spec.knot_count < MIN_KNOTS:
        raise InvalidArgumentError(
            f"duration*knot_rate gives {spec.knot_count} knots; a cubic spline needs at least {MIN_KNOTS}"
        )
    if knot_values is None:
        knots = draw_knots(spec)
    else:
        knots = np.asarray(knot_values, dtype=np.float64)
        if knots.shape != (spec.knot_count + 1,):
            raise InvalidArgumentError(f"expected {spec.knot_count + 1} knot values, got {knots.shape}")
    spline = CubicSpline(knot_times(spec), knots, bc_type="natural", extrapolate=False)
    t = np.arange(spec.sample_count) / spec.sample_rate
    samples = rescale_overshoot(spline(t)) * spec.amplitude
    logger.debug("Generated %d samples from %d knots (seed %d)", samples.size, knots.size, spec.seed)
    return InputSignal(samples, spec.sample_rate, spec)


def scale_force(u: InputSignal, force_max: float) -> NDArray[np.float64]:
    """Actuation force series ``force_max * u(t)`` in N."""
    return force_max * np.asarray(u.samples)


def normalize_to_range(u: InputSignal, lo: float, hi: float) -> InputSignal:
    """Affine map of the signal range (``[-amplitude, amplitude]`` for a raw drive) onto ``[lo, hi]``."""
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise InvalidArgumentError(f"normalization range must satisfy lo < hi, got [{lo}, {hi}]")
    v_lo, v_hi = u.value_range
    mapped = lo + (np.asarray(u.samples) - v_lo) / (v_hi - v_lo) * (hi - lo)
    return InputSignal(np.clip(mapped, lo, hi), u.sample_rate, u.spec, (lo, hi))


@functools.singledispatch
def decimate(series: Any, factor: int) -> Any:
    """Keep every ``factor``-th sample starting at index 0; a trailing remainder is truncated."""
    raise TypeError(f"cannot decimate {type(series).__name__}")


def check_factor(factor: int) -> int:
    if int(factor) != factor or factor < 1:
        raise InvalidArgumentError(f"decimation factor must be an integer >= 1, got {factor!r}")
    return int(factor)


@decimate.register
def _(series: InputSignal, factor: int) -> InputSignal:
    factor = check_factor(factor)
    if factor == 1:
        return series
    return replace(series, samples=np.asarray(series.samples)[::factor], sample_rate=series.sample_rate / factor)


def signal_to_csv(u: InputSignal, path: Union[str, Path]) -> Path:
    """Two-column CSV ``time_s,value``."""
    frame = pd.DataFrame({"time_s": u.times(), "value": u.samples})
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format="%.10g", lineterminator="\n")
    return write_text_atomic(path, buffer.getvalue())


def signal_from_csv(path: Union[str, Path], spec: SignalSpec) -> InputSignal:
    frame = pd.read_csv(path)
    if list(frame.columns) != ["time_s", "value"]:
        raise SchemaError(f"{path}: expected columns time_s,value, got {','.join(map(str, frame.columns))}")
    t = frame["time_s"].to_numpy()
    if t.size > 1:
        rate = 1.0 / float(np.median(np.diff(t)))
        if not math.isclose(rate, spec.sample_rate, rel_tol=1e-6):
            raise SchemaError(f"{path}: sample rate {rate:.6g} Hz does not match {spec.sample_rate} Hz")
    return InputSignal(frame["value"].to_numpy(), spec.sample_rate, spec)

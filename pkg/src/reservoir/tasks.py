"""Benchmark tasks: Legendre nonlinear capacity, delayed-input memory capacity, NARMA-n."""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from src.errors import InvalidArgumentError, TaskDivergenceError
from src.reservoir.readout import ReadoutFit, RidgeConfig, RidgeSolver
from src.reservoir.trace import ReservoirTrace
from src.signals.spline_input import decimate, normalize_to_range

logger = logging.getLogger(__name__)

DEFAULT_MAX_ORDER = 10
DEFAULT_HORIZON = 1.0
DEFAULT_LAG_STEP = 0.02


@dataclass(frozen=True)
class TaskCapacity:
    """One target's capacities; ``None`` when the target is constant on that split."""

    task: str
    key: float
    train: Optional[float]
    test: Optional[float]

    @property
    def floored(self) -> float:
        return max(self.test or 0.0, 0.0)


@dataclass
class CapacityCurve:
    task: str
    points: List[TaskCapacity]

    @property
    def aggregate(self) -> float:
        """Mean test capacity with each constituent floored at zero."""
        return float(np.mean([p.floored for p in self.points]))

    def keys(self) -> List[float]:
        return [p.key for p in self.points]

    def tests(self) -> List[Optional[float]]:
        return [p.test for p in self.points]


def legendre_targets(u: NDArray[np.float64], max_order: int = DEFAULT_MAX_ORDER) -> NDArray[np.float64]:
    """Rows ``P_1(u) .. P_max_order(u)`` by Bonnet's recurrence."""
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if max_order < 1:
        raise InvalidArgumentError(f"max_order must be >= 1, got {max_order!r}")
    if np.any(np.abs(u) > 1.0 + 1e-12):
        raise InvalidArgumentError("Legendre targets need |u| <= 1")
    out = np.empty((max_order, u.size))
    p_prev, p = np.ones_like(u), u.copy()
    out[0] = p
    for k in range(1, max_order):
        p_prev, p = p, ((2 * k + 1) * u * p - k * p_prev) / (k + 1)
        out[k] = p
    return out


def _capacity_point(task: str, key: float, fit: ReadoutFit) -> TaskCapacity:
    train, test = fit.capacities()
    return TaskCapacity(task, key, train, test)


def nonlinear_capacity(
    trace: ReservoirTrace,
    cfg: RidgeConfig,
    max_order: int = DEFAULT_MAX_ORDER,
    solver: Optional[RidgeSolver] = None,
) -> CapacityCurve:
    """Per-order capacities for ``P_k(u(t))``; ``aggregate`` is C_nl."""
    solver = solver or RidgeSolver.for_trace(trace, cfg)
    targets = legendre_targets(trace.input.samples, max_order)
    points = [_capacity_point("legendre", k + 1, solver.fit(targets[k])) for k in range(max_order)]
    curve = CapacityCurve("legendre", points)
    logger.info("C_nl = %.4f over %d orders", curve.aggregate, max_order)
    return curve


def lag_grid(horizon: float = DEFAULT_HORIZON, lag_step: float = DEFAULT_LAG_STEP) -> NDArray[np.float64]:
    if not (lag_step > 0.0 and horizon >= 0.0):
        raise InvalidArgumentError("lag grid needs lag_step > 0 and horizon >= 0")
    count = int(round(horizon / lag_step)) + 1
    return np.round(np.arange(count) * lag_step, 12)


def lag_rows(tau: float, sample_rate: float) -> int:
    rows = tau * sample_rate
    if abs(rows - round(rows)) > 1e-6:
        raise InvalidArgumentError(f"lag {tau} s is not a whole number of samples at {sample_rate} Hz")
    return int(round(rows))


def delayed(u: NDArray[np.float64], rows: int) -> NDArray[np.float64]:
    """``z[t] = u[t - rows]``; the first ``rows`` entries are NaN."""
    z = np.full(u.shape[0], np.nan)
    z[rows:] = u[: u.shape[0] - rows]
    return z


def memory_capacity(
    trace: ReservoirTrace,
    cfg: RidgeConfig,
    horizon: float = DEFAULT_HORIZON,
    lag_step: float = DEFAULT_LAG_STEP,
    solver: Optional[RidgeSolver] = None,
) -> CapacityCurve:
    """Capacities for ``u(t - tau)`` over the lag grid; ``aggregate`` is C_m."""
    duration = len(trace) / trace.sample_rate
    if not horizon < duration - cfg.washout:
        raise InvalidArgumentError(f"horizon {horizon} s must be shorter than the post-washout trace")
    solver = solver or RidgeSolver.for_trace(trace, cfg)
    u = np.asarray(trace.input.samples)
    points = []
    for tau in lag_grid(horizon, lag_step):
        rows = lag_rows(float(tau), trace.sample_rate)
        points.append(_capacity_point("memory", float(tau), solver.fit(delayed(u, rows), start=rows)))
    curve = CapacityCurve("memory", points)
    logger.info("C_m = %.4f over %d lags", curve.aggregate, len(points))
    return curve


@dataclass(frozen=True)
class NarmaConfig:
    order: int = 2
    a: float = 0.3
    b: float = 0.05
    c: float = 1.5
    d: float = 0.1
    input_range: Tuple[float, float] = (0.0, 0.2)
    rate: float = 10.0
    divergence_bound: float = 1e3

    def __post_init__(self) -> None:
        if int(self.order) != self.order or self.order < 2:
            raise InvalidArgumentError(f"NARMA order must be an integer >= 2, got {self.order!r}")
        lo, hi = self.input_range
        if not lo < hi:
            raise InvalidArgumentError(f"input_range must satisfy lo < hi, got {self.input_range!r}")
        if not self.rate > 0.0:
            raise InvalidArgumentError("rate must be positive")


def narma_series(v: NDArray[np.float64], cfg: NarmaConfig) -> NDArray[np.float64]:
    """``y[t+1] = a*y[t] + b*y[t]*sum(y[t-n+1..t]) + c*v[t-n+1]*v[t] + d`` from zero history.

    ``y[t]`` is aligned with ``v[t]``; ``y[0] = 0``.
    """
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    n = int(cfg.order)
    if v.size <= n:
        raise InvalidArgumentError(f"NARMA-{n} needs more than {n} input samples")
    lo, hi = cfg.input_range
    if v.min() < lo - 1e-12 or v.max() > hi + 1e-12:
        raise InvalidArgumentError(f"NARMA input must lie in [{lo}, {hi}]")
    y = np.zeros(v.size)
    window = 0.0  # running sum of y[t-n+1..t]
    for t in range(v.size - 1):
        window += y[t]
        if t >= n:
            window -= y[t - n]
        past = v[t - n + 1] if t - n + 1 >= 0 else 0.0
        nxt = cfg.a * y[t] + cfg.b * y[t] * window + cfg.c * past * v[t] + cfg.d
        if not math.isfinite(nxt) or abs(nxt) > cfg.divergence_bound:
            raise TaskDivergenceError(n, t + 1, nxt)
        y[t + 1] = nxt
    return y


def interdecile_range(errors: NDArray[np.float64]) -> float:
    """90th minus 10th percentile, linear interpolation between order statistics."""
    p10, p90 = np.percentile(np.asarray(errors, dtype=np.float64), [10.0, 90.0])
    return float(p90 - p10)


@dataclass
class NarmaResult:
    order: int
    rmse: float
    idr: float
    bias: float
    predictions: NDArray[np.float64] = field(repr=False)
    target: NDArray[np.float64] = field(repr=False)
    baseline_rmse: Optional[float] = None

    def summary(self) -> dict:
        return {
            "order": self.order,
            "rmse": self.rmse,
            "idr": self.idr,
            "bias": self.bias,
            "baseline_rmse": self.baseline_rmse,
        }


def _narma_inputs(trace: ReservoirTrace, cfg: NarmaConfig) -> Tuple[ReservoirTrace, NDArray[np.float64]]:
    ratio = trace.sample_rate / cfg.rate
    factor = int(round(ratio))
    if factor < 1 or abs(ratio - factor) > 1e-9:
        raise InvalidArgumentError(f"{trace.sample_rate} Hz trace cannot be decimated to {cfg.rate} Hz")
    slow = decimate(trace, factor)
    lo, hi = cfg.input_range
    y = narma_series(normalize_to_range(slow.input, lo, hi).samples, cfg)
    return slow, y


def _fit_next_step(features: NDArray[np.float64], y: NDArray[np.float64], rate: float, ridge: RidgeConfig):
    # state row t predicts y[t+1]
    return RidgeSolver(features[:-1], rate, ridge).fit(y[1:])


def narma_input_baseline(trace: ReservoirTrace, ridge: RidgeConfig, cfg: NarmaConfig) -> float:
    """Test RMSE of a ridge readout on the raw input column alone."""
    slow, y = _narma_inputs(trace, cfg)
    fit = _fit_next_step(np.asarray(slow.input.samples)[:, None], y, slow.sample_rate, ridge)
    return float(np.sqrt(np.mean((fit.test_prediction - fit.test_target) ** 2)))


def evaluate_narma(
    trace: ReservoirTrace, ridge: RidgeConfig, cfg: NarmaConfig, with_baseline: bool = False
) -> NarmaResult:
    """Decimate, normalize, generate NARMA-n and score the readout on the test split."""
    slow, y = _narma_inputs(trace, cfg)
    fit = _fit_next_step(slow.features, y, slow.sample_rate, ridge)
    error = fit.test_prediction - fit.test_target
    result = NarmaResult(
        order=cfg.order,
        rmse=float(np.sqrt(np.mean(error**2))),
        idr=interdecile_range(error),
        bias=float(np.mean(error)),
        predictions=fit.test_prediction,
        target=fit.test_target,
    )
    if with_baseline:
        result.baseline_rmse = narma_input_baseline(trace, ridge, cfg)
    logger.info("NARMA-%d rmse=%.5f idr=%.5f", cfg.order, result.rmse, result.idr)
    return result

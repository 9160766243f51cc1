"""Linear ridge readout with a chronological train/test split."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from src.errors import InvalidArgumentError, NumericalError, UndefinedCapacityError
from src.reservoir.trace import ReservoirTrace

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RidgeConfig:
    """``washout`` is in seconds; ``standardize`` also divides centred features by their training std."""

    alpha: float = 0.01
    train_fraction: float = 0.75
    washout: float = 2.0
    standardize: bool = False

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and self.alpha > 0.0):
            raise InvalidArgumentError(f"alpha must be positive, got {self.alpha!r}")
        if not 0.0 < self.train_fraction < 1.0:
            raise InvalidArgumentError(f"train_fraction must lie in (0, 1), got {self.train_fraction!r}")
        if not self.washout >= 0.0:
            raise InvalidArgumentError(f"washout must be >= 0, got {self.washout!r}")


@dataclass
class ReadoutFit:
    weights: NDArray[np.float64]
    intercept: float
    train_prediction: NDArray[np.float64]
    test_prediction: NDArray[np.float64]
    train_target: NDArray[np.float64]
    test_target: NDArray[np.float64]
    degenerate: bool = False

    def capacities(self) -> Tuple[Optional[float], Optional[float]]:
        """``(train, test)`` capacities; ``None`` where the target is constant."""
        return _maybe_capacity(self.train_prediction, self.train_target), _maybe_capacity(
            self.test_prediction, self.test_target
        )


def _maybe_capacity(prediction: NDArray[np.float64], target: NDArray[np.float64]) -> Optional[float]:
    try:
        return capacity(prediction, target)
    except UndefinedCapacityError:
        return None


@dataclass
class _Split:
    train: slice
    test: slice
    mean: NDArray[np.float64]
    scale: NDArray[np.float64]
    x_train: NDArray[np.float64]
    x_test: NDArray[np.float64]
    factor: tuple


@dataclass
class RidgeSolver:
    """Ridge regression over a fixed feature matrix.

    The centred training block and its regularized Gram factorization are
    cached per start row, so many targets on the same trace share one
    Cholesky factorization.
    """

    features: NDArray[np.float64]
    sample_rate: float
    cfg: RidgeConfig = field(default_factory=RidgeConfig)
    _splits: Dict[int, _Split] = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise InvalidArgumentError("features must be a 2-D matrix")
        if not np.all(np.isfinite(self.features)):
            raise NumericalError("feature matrix contains non-finite values")
        duration = self.features.shape[0] / self.sample_rate
        if not self.cfg.washout < duration * (1.0 - self.cfg.train_fraction):
            raise InvalidArgumentError(
                f"washout {self.cfg.washout} s leaves too little data in a {duration:.3g} s trace"
            )

    @classmethod
    def for_trace(cls, trace: ReservoirTrace, cfg: RidgeConfig) -> "RidgeSolver":
        return cls(trace.features, trace.sample_rate, cfg)

    @property
    def washout_rows(self) -> int:
        return int(round(self.cfg.washout * self.sample_rate))

    def _split(self, start: int) -> _Split:
        if start in self._splits:
            return self._splits[start]
        n = self.features.shape[0]
        n_train = int(math.floor(self.cfg.train_fraction * (n - start)))
        if n_train < 2 or n - start - n_train < 2:
            raise InvalidArgumentError(f"not enough rows after row {start} for a train/test split")
        train = slice(start, start + n_train)
        test = slice(start + n_train, n)
        block = self.features[train]
        mean = block.mean(axis=0)
        scale = np.ones_like(mean)
        if self.cfg.standardize:
            std = block.std(axis=0)
            scale = np.where(std > 0.0, std, 1.0)
        x_train = (block - mean) / scale
        x_test = (self.features[test] - mean) / scale
        gram = x_train.T @ x_train
        gram[np.diag_indices_from(gram)] += self.cfg.alpha
        try:
            factor = cho_factor(gram, lower=True, check_finite=True)
        except (LinAlgError, ValueError) as e:
            raise NumericalError(f"ridge normal equations could not be factorized: {e}") from e
        logger.debug("Factorized %dx%d Gram for start row %d", gram.shape[0], gram.shape[1], start)
        split = _Split(train, test, mean, scale, x_train, x_test, factor)
        self._splits[start] = split
        return split

    def fit(self, target: NDArray[np.float64], start: Optional[int] = None) -> ReadoutFit:
        """Fit ``target`` (one value per trace row) using rows ``start`` onward (default: after washout)."""
        target = np.asarray(target, dtype=np.float64).reshape(-1)
        if target.shape[0] != self.features.shape[0]:
            raise InvalidArgumentError(
                f"target has {target.shape[0]} rows, trace has {self.features.shape[0]}"
            )
        if start is None:
            start = self.washout_rows
        split = self._split(max(start, self.washout_rows))
        z_train = target[split.train]
        z_test = target[split.test]
        if not (np.all(np.isfinite(z_train)) and np.all(np.isfinite(z_test))):
            raise NumericalError("target contains non-finite values")
        intercept = float(z_train.mean())
        degenerate = bool(np.ptp(z_train) == 0.0)
        if degenerate:
            logger.warning("Target is constant on the training rows; capacity is undefined")
        weights = cho_solve(split.factor, split.x_train.T @ (z_train - intercept))
        if not np.all(np.isfinite(weights)):
            raise NumericalError("ridge solution is not finite")
        return ReadoutFit(
            weights=weights / split.scale,
            intercept=intercept,
            train_prediction=split.x_train @ weights + intercept,
            test_prediction=split.x_test @ weights + intercept,
            train_target=z_train,
            test_target=z_test,
            degenerate=degenerate,
        )


def train_readout(trace: ReservoirTrace, target: NDArray[np.float64], cfg: RidgeConfig) -> ReadoutFit:
    """One-off ridge fit of ``target`` on ``trace``; use :class:`RidgeSolver` for many targets."""
    return RidgeSolver.for_trace(trace, cfg).fit(target)


def capacity(prediction: NDArray[np.float64], target: NDArray[np.float64]) -> float:
    """``1 - SSE/SST`` over the given interval; at most 1, may be negative."""
    prediction = np.asarray(prediction, dtype=np.float64).reshape(-1)
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    if prediction.shape != target.shape:
        raise InvalidArgumentError(f"length mismatch: {prediction.shape[0]} vs {target.shape[0]}")
    if target.shape[0] < 2:
        raise InvalidArgumentError("capacity needs at least 2 samples")
    sst = float(np.sum((target - target.mean()) ** 2))
    if sst <= 0.0:
        raise UndefinedCapacityError("target has zero variance")
    sse = float(np.sum((prediction - target) ** 2))
    return 1.0 - sse / sst

"""Closed-form design predictors for force scaling and buckling onset.

Both follow from a simply supported Euler-Bernoulli span of length s: the
central-load deflection F s^3 / (48 E I), and the Euler load pi^2 E I / s^2
compared against the compressive share P = F_max / 2 carried by each of the
two fibers flanking the actuation point.
"""
import math
from dataclasses import dataclass

from src.errors import InvalidArgumentError


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidArgumentError(message)


def force_for_deflection(delta: float, youngs_modulus: float, second_moment: float, spacing: float) -> float:
    """Central load (N) giving lateral deflection ``delta`` (m) over a span ``spacing``."""
    _require(delta >= 0.0, f"delta must be >= 0, got {delta!r}")
    _require(youngs_modulus > 0.0 and second_moment > 0.0 and spacing > 0.0, "E, I and spacing must be positive")
    return 48.0 * delta * youngs_modulus * second_moment / spacing**3


def deflection_for_force(force: float, youngs_modulus: float, second_moment: float, spacing: float) -> float:
    _require(youngs_modulus > 0.0 and second_moment > 0.0 and spacing > 0.0, "E, I and spacing must be positive")
    return force * spacing**3 / (48.0 * youngs_modulus * second_moment)


@dataclass(frozen=True)
class BucklingQuery:
    input_force_max: float
    spacing: float
    youngs_modulus: float
    second_moment: float

    def __post_init__(self) -> None:
        _require(self.input_force_max >= 0.0, f"input_force_max must be >= 0, got {self.input_force_max!r}")
        _require(
            self.spacing > 0.0 and self.youngs_modulus > 0.0 and self.second_moment > 0.0,
            "spacing, youngs_modulus and second_moment must be positive",
        )

    @property
    def compressive_load(self) -> float:
        return self.input_force_max / 2.0

    @property
    def euler_load(self) -> float:
        return math.pi**2 * self.youngs_modulus * self.second_moment / self.spacing**2


def buckling_number(q: BucklingQuery) -> float:
    """B = (F_max/2) s^2 / (pi^2 E I); B >= 1 predicts buckling of the flanking fibers."""
    return q.compressive_load / q.euler_load


def force_for_buckling_number(b: float, spacing: float, youngs_modulus: float, second_moment: float) -> float:
    _require(b >= 0.0, f"buckling number must be >= 0, got {b!r}")
    _require(spacing > 0.0 and youngs_modulus > 0.0 and second_moment > 0.0, "E, I and spacing must be positive")
    return 2.0 * b * math.pi**2 * youngs_modulus * second_moment / spacing**2


def critical_spacing(force_max: float, youngs_modulus: float, second_moment: float) -> float:
    """Spacing at which ``force_max`` gives B = 1."""
    _require(force_max > 0.0, f"force_max must be positive, got {force_max!r}")
    return math.pi * math.sqrt(2.0 * youngs_modulus * second_moment / force_max)

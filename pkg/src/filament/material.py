"""Fiber material and cross-section properties."""
import math
from dataclasses import dataclass, field

from src.errors import InvalidArgumentError

# Defaults follow the simulated fiber: 2 mm diameter, 100 MPa, 1000 kg/m^3.
DEFAULT_YOUNGS_MODULUS = 1.0e8
DEFAULT_DENSITY = 1000.0
DEFAULT_DIAMETER = 2.0e-3
DEFAULT_VISCOUS_DAMPING = 5.0


@dataclass(frozen=True)
class MaterialParams:
    """Elastic fiber of circular cross-section.

    ``viscous_damping`` is a velocity-proportional nodal damping rate in 1/s.
    Area and second moment are derived once at construction.
    """

    youngs_modulus: float = DEFAULT_YOUNGS_MODULUS
    density: float = DEFAULT_DENSITY
    diameter: float = DEFAULT_DIAMETER
    viscous_damping: float = DEFAULT_VISCOUS_DAMPING
    area: float = field(init=False, repr=False, compare=False)
    second_moment: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        for name in ("youngs_modulus", "density", "diameter"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise InvalidArgumentError(f"{name} must be positive, got {value!r}")
        if not math.isfinite(self.viscous_damping) or self.viscous_damping < 0.0:
            raise InvalidArgumentError(f"viscous_damping must be >= 0, got {self.viscous_damping!r}")
        object.__setattr__(self, "area", math.pi * self.diameter**2 / 4.0)
        object.__setattr__(self, "second_moment", math.pi * self.diameter**4 / 64.0)

    @property
    def axial_stiffness(self) -> float:
        """EA in N."""
        return self.youngs_modulus * self.area

    @property
    def bending_stiffness(self) -> float:
        """EI in N*m^2."""
        return self.youngs_modulus * self.second_moment

    @property
    def linear_density(self) -> float:
        """Mass per unit length, kg/m."""
        return self.density * self.area

    @property
    def wave_speed(self) -> float:
        """Axial wave speed sqrt(E/rho), m/s."""
        return math.sqrt(self.youngs_modulus / self.density)

    def with_damping(self, viscous_damping: float) -> "MaterialParams":
        return MaterialParams(self.youngs_modulus, self.density, self.diameter, viscous_damping)

    def to_dict(self) -> dict:
        return {
            "youngs_modulus": self.youngs_modulus,
            "density": self.density,
            "diameter": self.diameter,
            "viscous_damping": self.viscous_damping,
        }

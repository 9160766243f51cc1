"""Network specifications and fiber-line geometry.

A network is described by straight fiber lines; crossings come from exact
segment intersection, so crosshatch and polygon layouts share the rest of the
assembly pipeline.
"""
import enum
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.errors import InvalidArgumentError
from src.filament.material import MaterialParams

Point = Tuple[float, float]


class TopologyKind(str, enum.Enum):
    CROSSHATCH = "crosshatch"
    POLYGON = "polygon"


class TensionMode(str, enum.Enum):
    CONSTANT = "constant"
    SPRING = "spring"


@dataclass(frozen=True)
class Topology:
    kind: TopologyKind
    size: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", TopologyKind(self.kind))
        minimum = 2 if self.kind is TopologyKind.CROSSHATCH else 4
        if int(self.size) != self.size or self.size < minimum:
            raise InvalidArgumentError(f"{self.kind.value} size must be an integer >= {minimum}, got {self.size!r}")
        object.__setattr__(self, "size", int(self.size))

    @classmethod
    def parse(cls, text: str) -> "Topology":
        """Parse ``"crosshatch:4"`` or ``"polygon:6"``."""
        try:
            kind, size = text.split(":")
            return cls(TopologyKind(kind.strip().lower()), int(size))
        except ValueError as e:
            raise InvalidArgumentError(f"invalid topology {text!r}; expected 'crosshatch:N' or 'polygon:N'") from e

    @property
    def label(self) -> str:
        return f"{self.kind.value}:{self.size}"

    @property
    def fiber_count(self) -> int:
        n = self.size
        if self.kind is TopologyKind.CROSSHATCH:
            return 2 * n
        return n * (n - 3) // 2


@dataclass(frozen=True)
class NetworkSpec:
    """Everything needed to assemble one fiber network.

    ``node_spacing`` is the crossing pitch for a crosshatch and the
    circumradius for a polygon. ``coupling_stiffness``/``coupling_damping``
    default to 100*EA/l_seg and 0.01 s times the stiffness when left ``None``.
    ``actuation_fiber`` defaults to the central horizontal fiber (crosshatch)
    or the chord nearest the centroid (polygon).
    """

    topology: Topology
    node_spacing: float = 0.1
    material: MaterialParams = field(default_factory=MaterialParams)
    pretension: float = 0.01
    coupling_stiffness: Optional[float] = None
    coupling_damping: Optional[float] = None
    elements_per_segment: int = 4
    actuation_fiber: Optional[int] = None
    input_force_max: float = 0.05
    tension_mode: TensionMode = TensionMode.CONSTANT
    anchor_stiffness: float = 52.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "tension_mode", TensionMode(self.tension_mode))
        if not (math.isfinite(self.node_spacing) and self.node_spacing > 0.0):
            raise InvalidArgumentError(f"node_spacing must be positive, got {self.node_spacing!r}")
        if self.elements_per_segment < 4 or self.elements_per_segment % 2:
            raise InvalidArgumentError(
                f"elements_per_segment must be even and >= 4, got {self.elements_per_segment!r}"
            )
        if not (math.isfinite(self.pretension) and self.pretension >= 0.0):
            raise InvalidArgumentError(f"pretension must be >= 0, got {self.pretension!r}")
        if self.coupling_stiffness is not None and not self.coupling_stiffness > 0.0:
            raise InvalidArgumentError(f"coupling_stiffness must be positive, got {self.coupling_stiffness!r}")
        if self.coupling_damping is not None and not self.coupling_damping >= 0.0:
            raise InvalidArgumentError(f"coupling_damping must be >= 0, got {self.coupling_damping!r}")
        if not (math.isfinite(self.input_force_max) and self.input_force_max >= 0.0):
            raise InvalidArgumentError(f"input_force_max must be >= 0, got {self.input_force_max!r}")
        if self.anchor_stiffness <= 0.0:
            raise InvalidArgumentError("anchor_stiffness must be positive")
        if self.actuation_fiber is not None and not 0 <= self.actuation_fiber < self.topology.fiber_count:
            raise InvalidArgumentError(
                f"actuation_fiber {self.actuation_fiber} out of range for {self.topology.fiber_count} fibers"
            )

    @classmethod
    def from_total_length(cls, topology: Topology, total_length: float, **kwargs: Any) -> "NetworkSpec":
        """Crosshatch with a fixed outer fiber length L; the pitch becomes L/(N+1)."""
        if topology.kind is not TopologyKind.CROSSHATCH:
            raise InvalidArgumentError("total-length construction applies to crosshatch networks")
        return cls(topology=topology, node_spacing=total_length / (topology.size + 1), **kwargs)

    def with_changes(self, **changes: Any) -> "NetworkSpec":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "topology": self.topology.label,
            "node_spacing": self.node_spacing,
            "material": self.material.to_dict(),
            "pretension": self.pretension,
            "coupling_stiffness": self.coupling_stiffness,
            "coupling_damping": self.coupling_damping,
            "elements_per_segment": self.elements_per_segment,
            "actuation_fiber": self.actuation_fiber,
            "input_force_max": self.input_force_max,
            "tension_mode": self.tension_mode.value,
            "anchor_stiffness": self.anchor_stiffness,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "NetworkSpec":
        data = dict(data)
        data["topology"] = Topology.parse(data["topology"])
        data["material"] = MaterialParams(**data["material"])
        return cls(**data)


@dataclass(frozen=True)
class FiberLine:
    """A straight fiber from its clamped ``start`` to its tensioned ``end``."""

    start: Point
    end: Point

    @property
    def length(self) -> float:
        return math.dist(self.start, self.end)

    @property
    def axis(self) -> np.ndarray:
        d = np.subtract(self.end, self.start)
        return d / np.linalg.norm(d)

    @property
    def lateral(self) -> np.ndarray:
        """Axis rotated by +90 degrees."""
        ax = self.axis
        return np.array([-ax[1], ax[0]])

    @property
    def is_horizontal(self) -> bool:
        dx, dy = np.subtract(self.end, self.start)
        return abs(dx) >= abs(dy)

    def point_at(self, t: float) -> np.ndarray:
        return np.asarray(self.start) + t * np.subtract(self.end, self.start)


def crosshatch_lines(n: int, spacing: float) -> List[FiberLine]:
    """N horizontal then N vertical fibers of length (N+1)*s, clamped at left/bottom."""
    span = (n + 1) * spacing
    horizontal = [FiberLine((0.0, (j + 1) * spacing), (span, (j + 1) * spacing)) for j in range(n)]
    vertical = [FiberLine(((i + 1) * spacing, 0.0), ((i + 1) * spacing, span)) for i in range(n)]
    return horizontal + vertical


def polygon_vertices(n: int, radius: float) -> List[Point]:
    return [(radius * math.cos(2.0 * math.pi * k / n), radius * math.sin(2.0 * math.pi * k / n)) for k in range(n)]


def polygon_chords(n: int) -> List[Tuple[int, int]]:
    """All non-adjacent vertex pairs (a, b), a < b, in lexicographic order."""
    return [(a, b) for a in range(n) for b in range(a + 2, n) if not (a == 0 and b == n - 1)]


def polygon_lines(n: int, radius: float) -> List[FiberLine]:
    vertices = polygon_vertices(n, radius)
    return [FiberLine(vertices[a], vertices[b]) for a, b in polygon_chords(n)]


def fiber_lines(topology: Topology, spacing: float) -> List[FiberLine]:
    if topology.kind is TopologyKind.CROSSHATCH:
        return crosshatch_lines(topology.size, spacing)
    return polygon_lines(topology.size, spacing)


def intersect(a: FiberLine, b: FiberLine, end_tol: float = 1e-9) -> Optional[Tuple[float, float]]:
    """Parameters ``(t, u)`` of an interior crossing of two fiber lines, or ``None``.

    Touching at an endpoint (shared polygon vertex) is not a crossing.
    """
    p = np.asarray(a.start, dtype=float)
    r = np.subtract(a.end, a.start)
    q = np.asarray(b.start, dtype=float)
    s = np.subtract(b.end, b.start)
    denom = r[0] * s[1] - r[1] * s[0]
    if abs(denom) <= 1e-15 * np.linalg.norm(r) * np.linalg.norm(s):
        return None
    qp = q - p
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    u = (qp[0] * r[1] - qp[1] * r[0]) / denom
    t_tol = end_tol / a.length
    u_tol = end_tol / b.length
    if t_tol < t < 1.0 - t_tol and u_tol < u < 1.0 - u_tol:
        return float(t), float(u)
    return None


def default_actuation_fiber(topology: Topology, lines: List[FiberLine]) -> int:
    """Central horizontal fiber (index ceil(N/2) counted from 1), or the chord nearest the centroid."""
    if topology.kind is TopologyKind.CROSSHATCH:
        return math.ceil(topology.size / 2) - 1
    centroid = np.mean([line.start for line in lines] + [line.end for line in lines], axis=0)
    distances = [float(np.linalg.norm(line.point_at(0.5) - centroid)) for line in lines]
    best = min(distances)
    return next(i for i, d in enumerate(distances) if d <= best + 1e-12)

"""Readout registry: the ordered material points whose displacements form the reservoir state.

Every readout point sits on an exact mesh node and carries its "stations":
(fiber, arc length from the fiber's clamped end) for every fiber passing
through it. Stations are all the registry needs to answer the spatial
questions asked by feature selection, so a registry stored next to a trace is
enough to regroup its columns without rebuilding the network.
"""
import enum
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from src.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

Station = Tuple[int, float]

DEFAULT_ACTUATION_RADIUS = 2.0
DEFAULT_SPRING_BAND = 1.0
_TOL = 1e-9


class ReadoutKind(str, enum.Enum):
    CROSSING = "crossing"
    H_MIDPOINT = "h_midpoint"
    V_MIDPOINT = "v_midpoint"


class Zone(str, enum.Enum):
    NEAR_ACTUATION = "near_actuation"
    NEAR_SPRINGS = "near_springs"
    INTERIOR = "interior"


@dataclass(frozen=True)
class ReadoutPoint:
    fiber_id: int
    node_id: int
    kind: ReadoutKind
    zone: Zone = Zone.INTERIOR
    baseline_position: Tuple[float, float] = (0.0, 0.0)
    stations: Tuple[Station, ...] = ()

    def column_names(self, index: int) -> Tuple[str, str]:
        return f"p{index}_{self.kind.value}_x", f"p{index}_{self.kind.value}_y"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "fiber_id": self.fiber_id,
            "node_id": self.node_id,
            "kind": self.kind.value,
            "zone": self.zone.value,
            "baseline_position": list(self.baseline_position),
            "stations": [[f, a] for f, a in self.stations],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ReadoutPoint":
        return cls(
            fiber_id=int(data["fiber_id"]),
            node_id=int(data["node_id"]),
            kind=ReadoutKind(data["kind"]),
            zone=Zone(data["zone"]),
            baseline_position=(float(data["baseline_position"][0]), float(data["baseline_position"][1])),
            stations=tuple((int(f), float(a)) for f, a in data["stations"]),
        )


@dataclass
class ReadoutRegistry:
    """Ordered readout points plus the fiber geometry needed for zone queries.

    ``segment_length`` is the nominal crossing pitch used as the unit of the
    zone radii.
    """

    points: List[ReadoutPoint]
    fiber_lengths: List[float]
    actuation_station: Station
    segment_length: float
    topology: str = ""
    _distances: Optional[np.ndarray] = field(default=None, init=False, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def feature_count(self) -> int:
        return 2 * len(self.points)

    def column_names(self) -> List[str]:
        names: List[str] = []
        for index, point in enumerate(self.points):
            names.extend(point.column_names(index))
        return names

    def counts(self) -> Dict[str, int]:
        out = {kind.value: 0 for kind in ReadoutKind}
        for point in self.points:
            out[point.kind.value] += 1
        return out

    def actuation_distances(self) -> np.ndarray:
        """Along-fiber graph distance (m) from the actuation node to every readout point.

        Crossings join the fibers they bond; distances run only along fibers.
        """
        if self._distances is None:
            self._distances = self._compute_distances()
        return self._distances

    def _compute_distances(self) -> np.ndarray:
        source = len(self.points)
        on_fiber: Dict[int, List[Tuple[float, int]]] = {}
        for vertex, point in enumerate(self.points):
            for fiber, arc in point.stations:
                on_fiber.setdefault(fiber, []).append((arc, vertex))
        act_fiber, act_arc = self.actuation_station
        on_fiber.setdefault(act_fiber, []).append((act_arc, source))

        rows: List[int] = []
        cols: List[int] = []
        weights: List[float] = []
        for stations in on_fiber.values():
            stations.sort()
            for (a0, v0), (a1, v1) in zip(stations, stations[1:]):
                if v0 == v1:
                    continue
                # zero-length hops (actuation on a readout node) still need an edge
                rows.append(v0)
                cols.append(v1)
                weights.append(max(a1 - a0, 1e-15))
        size = source + 1
        graph = coo_matrix((weights, (rows, cols)), shape=(size, size)).tocsr()
        distances = dijkstra(graph, directed=False, indices=source)
        return np.asarray(distances[:source])

    def near_actuation(self, radius: float = DEFAULT_ACTUATION_RADIUS) -> List[int]:
        """Indices of points within ``radius`` segments of the actuation node."""
        if radius < 0:
            raise InvalidArgumentError(f"radius must be >= 0, got {radius!r}")
        limit = radius * self.segment_length + _TOL
        distances = self.actuation_distances()
        return [i for i, d in enumerate(distances) if d <= limit]

    def near_springs(self, band: float = DEFAULT_SPRING_BAND) -> List[int]:
        """Indices of points within ``band`` segments of some fiber's tensioned end."""
        if band < 0:
            raise InvalidArgumentError(f"band must be >= 0, got {band!r}")
        width = band * self.segment_length
        selected = []
        for index, point in enumerate(self.points):
            if any(arc >= self.fiber_lengths[fiber] - width - _TOL for fiber, arc in point.stations):
                selected.append(index)
        return selected

    def with_zones(
        self, radius: float = DEFAULT_ACTUATION_RADIUS, band: float = DEFAULT_SPRING_BAND
    ) -> "ReadoutRegistry":
        near_act = set(self.near_actuation(radius))
        near_spr = set(self.near_springs(band))
        points = []
        for index, point in enumerate(self.points):
            if index in near_act:
                zone = Zone.NEAR_ACTUATION
            elif index in near_spr:
                zone = Zone.NEAR_SPRINGS
            else:
                zone = Zone.INTERIOR
            points.append(replace(point, zone=zone))
        return self._with_points(points)

    def with_baselines(self, positions: Sequence[Sequence[float]]) -> "ReadoutRegistry":
        if len(positions) != len(self.points):
            raise InvalidArgumentError(f"expected {len(self.points)} baselines, got {len(positions)}")
        points = [
            replace(point, baseline_position=(float(p[0]), float(p[1]))) for point, p in zip(self.points, positions)
        ]
        return self._with_points(points)

    def baselines(self) -> np.ndarray:
        return np.array([p.baseline_position for p in self.points], dtype=np.float64).reshape(-1, 2)

    def _with_points(self, points: List[ReadoutPoint]) -> "ReadoutRegistry":
        return ReadoutRegistry(
            points=points,
            fiber_lengths=list(self.fiber_lengths),
            actuation_station=self.actuation_station,
            segment_length=self.segment_length,
            topology=self.topology,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "topology": self.topology,
            "segment_length": self.segment_length,
            "fiber_lengths": list(self.fiber_lengths),
            "actuation_station": [self.actuation_station[0], self.actuation_station[1]],
            "points": [p.to_dict() for p in self.points],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ReadoutRegistry":
        try:
            return cls(
                points=[ReadoutPoint.from_dict(p) for p in data["points"]],
                fiber_lengths=[float(x) for x in data["fiber_lengths"]],
                actuation_station=(int(data["actuation_station"][0]), float(data["actuation_station"][1])),
                segment_length=float(data["segment_length"]),
                topology=str(data.get("topology", "")),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidArgumentError(f"malformed readout registry: {e}") from e

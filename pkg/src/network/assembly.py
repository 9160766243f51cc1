"""Network assembly: discretize fiber lines, bond crossings, place loads and readouts."""
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import NDArray

from src.errors import AssemblyError
from src.filament.mesh import FilamentMesh
from src.network.readouts import ReadoutKind, ReadoutPoint, ReadoutRegistry, Station
from src.network.topology import (
    FiberLine,
    NetworkSpec,
    TensionMode,
    TopologyKind,
    default_actuation_fiber,
    fiber_lines,
    intersect,
    polygon_chords,
)

logger = logging.getLogger(__name__)

ALIGN_TOL = 1e-9


@dataclass(frozen=True)
class Coupling:
    fiber_a: int
    node_a: int
    fiber_b: int
    node_b: int


@dataclass(frozen=True)
class TensionLoad:
    """End load on a fiber's free node.

    Constant mode pushes ``magnitude`` along ``direction``; spring mode pulls
    the node toward ``anchor`` with ``stiffness`` (anchor placed so the initial
    force equals ``magnitude``).
    """

    fiber_id: int
    node_id: int
    direction: Tuple[float, float]
    magnitude: float
    mode: TensionMode = TensionMode.CONSTANT
    stiffness: float = 0.0
    anchor: Tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class ActuationSite:
    fiber_id: int
    node_id: int
    direction: Tuple[float, float]


@dataclass(frozen=True)
class Guide:
    """A single fixed coordinate (``component`` 0 = x, 1 = y) of one node: a roller support."""

    fiber_id: int
    node_id: int
    component: int


@dataclass
class NetworkAssembly:
    """A bonded fiber network ready to simulate.

    ``spec`` is ``None`` for hand-built assemblies (single test columns).
    """

    spec: Optional[NetworkSpec]
    fibers: List[FilamentMesh]
    couplings: List[Coupling]
    tension_loads: List[TensionLoad]
    actuation: ActuationSite
    registry: ReadoutRegistry
    coupling_stiffness: float
    coupling_damping: float
    guides: List[Guide] = field(default_factory=list)
    settled: bool = False

    @property
    def readouts(self) -> List[ReadoutPoint]:
        return self.registry.points

    @property
    def node_count(self) -> int:
        return sum(f.node_count for f in self.fibers)

    @property
    def feature_count(self) -> int:
        return self.registry.feature_count

    def copy(self) -> "NetworkAssembly":
        return replace(
            self,
            fibers=[f.copy() for f in self.fibers],
            couplings=list(self.couplings),
            tension_loads=list(self.tension_loads),
            guides=list(self.guides),
        )

    def summary(self) -> Dict[str, object]:
        return {
            "topology": self.registry.topology,
            "fibers": len(self.fibers),
            "nodes": self.node_count,
            "couplings": len(self.couplings),
            "readouts": len(self.registry),
            "features": self.feature_count,
        }


@dataclass
class _FiberGrid:
    line: FiberLine
    breaks: NDArray[np.float64]
    params: NDArray[np.float64]

    def break_node(self, t: float, per_segment: int) -> int:
        return int(np.argmin(np.abs(self.breaks - t))) * per_segment

    def arc(self, node: int) -> float:
        return float(self.params[node] * self.line.length)


def _merge_breaks(values: List[float], tol: float) -> NDArray[np.float64]:
    merged: List[float] = []
    for v in sorted(values):
        if merged and v - merged[-1] <= tol:
            continue
        merged.append(v)
    merged[-1] = 1.0
    return np.array(merged)


def _node_params(breaks: NDArray[np.float64], per_segment: int) -> NDArray[np.float64]:
    pieces = [np.linspace(a, b, per_segment + 1)[:-1] for a, b in zip(breaks[:-1], breaks[1:])]
    return np.concatenate(pieces + [np.array([1.0])])


def assemble(spec: NetworkSpec) -> NetworkAssembly:
    """Build the unsettled network: meshes, bonds, clamps, end loads, actuation and readouts."""
    topology = spec.topology
    eps = spec.elements_per_segment
    lines = fiber_lines(topology, spec.node_spacing)
    act_fiber = spec.actuation_fiber if spec.actuation_fiber is not None else default_actuation_fiber(topology, lines)

    crossings: List[Tuple[int, int, float, float]] = []
    for p in range(len(lines)):
        for q in range(p + 1, len(lines)):
            hit = intersect(lines[p], lines[q], ALIGN_TOL)
            if hit is not None:
                crossings.append((p, q, hit[0], hit[1]))

    raw: List[List[float]] = [[0.0, 1.0] for _ in lines]
    for p, q, t, u in crossings:
        raw[p].append(t)
        raw[q].append(u)

    grids: List[_FiberGrid] = []
    for index, line in enumerate(lines):
        tol = ALIGN_TOL / line.length
        breaks = _merge_breaks(raw[index], tol)
        params = _node_params(breaks, eps)
        if index == act_fiber and not np.any(np.abs(params - 0.5) <= tol):
            breaks = _merge_breaks(list(breaks) + [0.5], tol)
            params = _node_params(breaks, eps)
        grids.append(_FiberGrid(line, breaks, params))

    fibers = []
    for grid in grids:
        positions = np.array([grid.line.point_at(t) for t in grid.params])
        clamp = np.zeros(len(grid.params), dtype=bool)
        clamp[0] = True
        fibers.append(
            FilamentMesh(
                node_positions=positions,
                node_velocities=np.zeros_like(positions),
                rest_lengths=np.diff(grid.params) * grid.line.length,
                material=spec.material,
                clamp_flags=clamp,
            )
        )

    couplings = []
    for p, q, t, u in crossings:
        node_p = grids[p].break_node(t, eps)
        node_q = grids[q].break_node(u, eps)
        gap = float(np.linalg.norm(fibers[p].node_positions[node_p] - fibers[q].node_positions[node_q]))
        if gap > ALIGN_TOL:
            pair = polygon_chords(topology.size)[p] if topology.kind is TopologyKind.POLYGON else None
            other = polygon_chords(topology.size)[q] if topology.kind is TopologyKind.POLYGON else None
            label = f"{pair}-{other}" if pair is not None else f"{p}-{q}"
            raise AssemblyError(f"crossing {label} misaligned by {gap:.3e} m", chord_pair=(p, q))
        couplings.append(Coupling(p, node_p, q, node_q))

    segment_length = _segment_length(spec, grids)
    registry = _build_registry(spec, grids, couplings, act_fiber, segment_length)

    act_node = int(np.argmin(np.abs(grids[act_fiber].params - 0.5)))
    if not 0 < act_node < fibers[act_fiber].node_count - 1:
        raise AssemblyError(f"actuation node {act_node} is not interior to fiber {act_fiber}")
    actuation = ActuationSite(act_fiber, act_node, tuple(float(c) for c in lines[act_fiber].lateral))

    loads = [_tension_load(spec, index, fibers[index], line) for index, line in enumerate(lines)]

    k_c = spec.coupling_stiffness
    if k_c is None:
        k_c = 100.0 * spec.material.axial_stiffness / segment_length
    c_c = spec.coupling_damping if spec.coupling_damping is not None else 0.01 * k_c

    positions = [fibers[p.fiber_id].node_positions[p.node_id] for p in registry.points]
    assembly = NetworkAssembly(
        spec=spec,
        fibers=fibers,
        couplings=couplings,
        tension_loads=loads,
        actuation=actuation,
        registry=registry.with_zones().with_baselines(positions),
        coupling_stiffness=float(k_c),
        coupling_damping=float(c_c),
    )
    logger.info("Assembled %s", assembly.summary())
    return assembly


def _segment_length(spec: NetworkSpec, grids: List[_FiberGrid]) -> float:
    if spec.topology.kind is TopologyKind.CROSSHATCH:
        return spec.node_spacing
    lengths = np.concatenate([np.diff(g.breaks) * g.line.length for g in grids])
    return float(lengths.mean())


def _tension_load(spec: NetworkSpec, index: int, mesh: FilamentMesh, line: FiberLine) -> TensionLoad:
    node = mesh.node_count - 1
    axis = tuple(float(c) for c in line.axis)
    if spec.tension_mode is TensionMode.SPRING:
        anchor = mesh.node_positions[node] + spec.pretension / spec.anchor_stiffness * np.asarray(axis)
        return TensionLoad(
            index, node, axis, spec.pretension, TensionMode.SPRING, spec.anchor_stiffness,
            (float(anchor[0]), float(anchor[1])),
        )
    return TensionLoad(index, node, axis, spec.pretension)


def _build_registry(
    spec: NetworkSpec,
    grids: List[_FiberGrid],
    couplings: List[Coupling],
    act_fiber: int,
    segment_length: float,
) -> ReadoutRegistry:
    eps = spec.elements_per_segment

    # union-find over bonded (fiber, node) keys groups concurrent chords into one crossing
    parent: Dict[Tuple[int, int], Tuple[int, int]] = {}

    def find(key: Tuple[int, int]) -> Tuple[int, int]:
        parent.setdefault(key, key)
        while parent[key] != key:
            parent[key] = parent[parent[key]]
            key = parent[key]
        return key

    for c in couplings:
        ra, rb = find((c.fiber_a, c.node_a)), find((c.fiber_b, c.node_b))
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    groups: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
    for key in list(parent):
        groups.setdefault(find(key), []).append(key)

    crossing_points = []
    for owner, members in sorted(groups.items()):
        stations: Tuple[Station, ...] = tuple(sorted((f, grids[f].arc(n)) for f, n in set(members)))
        crossing_points.append(ReadoutPoint(owner[0], owner[1], ReadoutKind.CROSSING, stations=stations))

    horizontal, vertical = [], []
    for fiber, grid in enumerate(grids):
        kind = ReadoutKind.H_MIDPOINT if grid.line.is_horizontal else ReadoutKind.V_MIDPOINT
        bucket = horizontal if kind is ReadoutKind.H_MIDPOINT else vertical
        for segment in range(len(grid.breaks) - 1):
            node = segment * eps + eps // 2
            bucket.append(ReadoutPoint(fiber, node, kind, stations=((fiber, grid.arc(node)),)))

    act_node = int(np.argmin(np.abs(grids[act_fiber].params - 0.5)))
    return ReadoutRegistry(
        points=crossing_points + horizontal + vertical,
        fiber_lengths=[g.line.length for g in grids],
        actuation_station=(act_fiber, grids[act_fiber].arc(act_node)),
        segment_length=segment_length,
        topology=spec.topology.label,
    )


def coupling_forces(assembly: NetworkAssembly) -> List[NDArray[np.float64]]:
    """Spring-damper bond forces per fiber, shape (n_i, 2) each; they sum to zero network-wide."""
    out = [np.zeros_like(f.node_positions) for f in assembly.fibers]
    k_c = assembly.coupling_stiffness
    c_c = assembly.coupling_damping
    for c in assembly.couplings:
        fa, fb = assembly.fibers[c.fiber_a], assembly.fibers[c.fiber_b]
        force = k_c * (fb.node_positions[c.node_b] - fa.node_positions[c.node_a])
        force += c_c * (fb.node_velocities[c.node_b] - fa.node_velocities[c.node_a])
        out[c.fiber_a][c.node_a] += force
        out[c.fiber_b][c.node_b] -= force
    return out


def fiber_axis(mesh: FilamentMesh) -> NDArray[np.float64]:
    """Unit vector from a fiber's first to last node."""
    d = mesh.node_positions[-1] - mesh.node_positions[0]
    return d / np.linalg.norm(d)


def midpoints_on(assembly: NetworkAssembly, fiber_id: int) -> List[int]:
    """Registry indices of the midpoint readouts lying on ``fiber_id``, ordered along the fiber."""
    hits = [
        i for i, p in enumerate(assembly.readouts) if p.kind is not ReadoutKind.CROSSING and p.fiber_id == fiber_id
    ]
    return sorted(hits, key=lambda i: assembly.readouts[i].node_id)


def crossings_on(assembly: NetworkAssembly, fiber_id: int) -> List[Tuple[int, int]]:
    """``(node_on_fiber, other_fiber)`` for every bond on ``fiber_id``."""
    out = []
    for c in assembly.couplings:
        if c.fiber_a == fiber_id:
            out.append((c.node_a, c.fiber_b))
        elif c.fiber_b == fiber_id:
            out.append((c.node_b, c.fiber_a))
    return sorted(out)


def partner_node(assembly: NetworkAssembly, fiber_id: int, node_id: int, other: int) -> Optional[int]:
    for c in assembly.couplings:
        if (c.fiber_a, c.node_a, c.fiber_b) == (fiber_id, node_id, other):
            return c.node_b
        if (c.fiber_b, c.node_b, c.fiber_a) == (fiber_id, node_id, other):
            return c.node_a
    return None

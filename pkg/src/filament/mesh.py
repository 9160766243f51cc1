"""Discrete planar elastic rod: construction, forces, integration, energy audit.

The rod is a chain of nodes joined by axial springs (stiffness EA/l0) with
turning-angle hinges at interior nodes (energy 0.5*EI*kappa**2*l_bar,
kappa = phi/l_bar). Mass is lumped: each node carries rho*A times half of
each adjacent rest length.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from src.errors import DivergenceError, InvalidArgumentError, NumericalDegeneracyError, StabilityError
from src.filament import kernels
from src.filament.material import MaterialParams

logger = logging.getLogger(__name__)

DEFAULT_SAFETY = 0.1

_NO_INDEX = np.zeros(0, dtype=np.int64)
_NO_VALUE = np.zeros(0, dtype=np.float64)
_NO_VECTOR = np.zeros((0, 2), dtype=np.float64)
_NO_DIRECTION = np.zeros(2, dtype=np.float64)


@dataclass
class FilamentMesh:
    """State of one discretized fiber."""

    node_positions: NDArray[np.float64]
    node_velocities: NDArray[np.float64]
    rest_lengths: NDArray[np.float64]
    material: MaterialParams
    clamp_flags: NDArray[np.bool_]

    def __post_init__(self) -> None:
        self.node_positions = np.array(self.node_positions, dtype=np.float64).reshape(-1, 2)
        self.node_velocities = np.array(self.node_velocities, dtype=np.float64).reshape(-1, 2)
        self.rest_lengths = np.array(self.rest_lengths, dtype=np.float64).reshape(-1)
        self.clamp_flags = np.array(self.clamp_flags, dtype=bool).reshape(-1)
        n = self.node_positions.shape[0]
        if n < 3:
            raise InvalidArgumentError(f"a fiber needs at least 3 nodes, got {n}")
        if self.node_velocities.shape != (n, 2) or self.clamp_flags.shape != (n,):
            raise InvalidArgumentError("positions, velocities and clamp flags must describe the same nodes")
        if self.rest_lengths.shape != (n - 1,):
            raise InvalidArgumentError(f"expected {n - 1} rest lengths, got {self.rest_lengths.shape[0]}")
        if not np.all(self.rest_lengths > 0.0):
            raise InvalidArgumentError("rest lengths must be positive")
        if np.any(self.node_velocities[self.clamp_flags] != 0.0):
            raise InvalidArgumentError("clamped nodes must have zero velocity")

    @property
    def node_count(self) -> int:
        return self.node_positions.shape[0]

    @property
    def element_count(self) -> int:
        return self.rest_lengths.shape[0]

    @property
    def rest_length_total(self) -> float:
        return float(self.rest_lengths.sum())

    def lumped_masses(self) -> NDArray[np.float64]:
        half = 0.5 * self.rest_lengths
        masses = np.zeros(self.node_count)
        masses[:-1] += half
        masses[1:] += half
        return masses * self.material.linear_density

    def copy(self) -> "FilamentMesh":
        return FilamentMesh(
            self.node_positions.copy(),
            self.node_velocities.copy(),
            self.rest_lengths.copy(),
            self.material,
            self.clamp_flags.copy(),
        )


@dataclass(frozen=True)
class RodArrays:
    """Element, hinge and mass arrays of one fiber, node indices shifted by ``offset``."""

    e_i: NDArray[np.int64]
    e_j: NDArray[np.int64]
    e_rest: NDArray[np.float64]
    e_ea: NDArray[np.float64]
    b_a: NDArray[np.int64]
    b_b: NDArray[np.int64]
    b_c: NDArray[np.int64]
    b_coef: NDArray[np.float64]
    masses: NDArray[np.float64]


def rod_arrays(mesh: FilamentMesh, offset: int = 0) -> RodArrays:
    n = mesh.node_count
    idx = np.arange(n, dtype=np.int64) + offset
    rest = mesh.rest_lengths
    voronoi = 0.5 * (rest[:-1] + rest[1:])
    return RodArrays(
        e_i=idx[:-1].copy(),
        e_j=idx[1:].copy(),
        e_rest=rest.copy(),
        e_ea=np.full(n - 1, mesh.material.axial_stiffness),
        b_a=idx[:-2].copy(),
        b_b=idx[1:-1].copy(),
        b_c=idx[2:].copy(),
        b_coef=mesh.material.bending_stiffness / voronoi,
        masses=mesh.lumped_masses(),
    )


def build_filament(
    length: float,
    n_elements: int,
    material: MaterialParams,
    origin: Sequence[float] = (0.0, 0.0),
    direction: Sequence[float] = (1.0, 0.0),
) -> FilamentMesh:
    """Straight fiber of ``n_elements`` equal elements from ``origin`` along ``direction``."""
    if not (math.isfinite(length) and length > 0.0):
        raise InvalidArgumentError(f"fiber length must be positive, got {length!r}")
    if int(n_elements) != n_elements or n_elements < 2:
        raise InvalidArgumentError(f"a fiber needs at least 2 elements, got {n_elements!r}")
    n_elements = int(n_elements)
    unit = np.asarray(direction, dtype=np.float64)
    norm = float(np.linalg.norm(unit))
    if not norm > 0.0:
        raise InvalidArgumentError("direction must be a non-zero vector")
    unit = unit / norm
    s = np.linspace(0.0, length, n_elements + 1)
    positions = np.asarray(origin, dtype=np.float64)[None, :] + s[:, None] * unit[None, :]
    return FilamentMesh(
        node_positions=positions,
        node_velocities=np.zeros_like(positions),
        rest_lengths=np.full(n_elements, length / n_elements),
        material=material,
        clamp_flags=np.zeros(n_elements + 1, dtype=bool),
    )


def internal_forces(mesh: FilamentMesh) -> NDArray[np.float64]:
    """Stretching plus bending forces on every node, shape (n, 2), in N."""
    arrays = rod_arrays(mesh)
    out = np.zeros_like(mesh.node_positions)
    status = kernels.accumulate_stretch(mesh.node_positions, arrays.e_i, arrays.e_j, arrays.e_rest, arrays.e_ea, out)
    if status != kernels.STATUS_OK:
        raise NumericalDegeneracyError(int(status), _element_length(mesh.node_positions, int(status)))
    kernels.accumulate_bend(mesh.node_positions, arrays.b_a, arrays.b_b, arrays.b_c, arrays.b_coef, out)
    return out


def stable_dt(mesh: FilamentMesh, safety: float = 1.0) -> float:
    """Axial CFL bound ``safety * l_min * sqrt(rho/E)``."""
    if not 0.0 < safety <= 1.0:
        raise InvalidArgumentError(f"safety must lie in (0, 1], got {safety!r}")
    return safety * float(mesh.rest_lengths.min()) / mesh.material.wave_speed


def step(
    mesh: FilamentMesh,
    external_forces: Optional[NDArray[np.float64]],
    dt: float,
    step_index: int = 0,
) -> FilamentMesh:
    """Advance one damped position-Verlet step and return the new state.

    Clamped nodes never move. ``step_index`` is only used to label a
    divergence error.
    """
    bound = stable_dt(mesh, 1.0)
    if not (dt > 0.0 and dt <= bound):
        raise StabilityError(dt, bound)
    arrays = rod_arrays(mesh)
    nxt = mesh.copy()
    ext = np.zeros_like(nxt.node_positions)
    if external_forces is not None:
        ext[:] = np.asarray(external_forces, dtype=np.float64).reshape(-1, 2)
    free = np.repeat((~nxt.clamp_flags).astype(np.float64)[:, None], 2, axis=1)
    forces = np.zeros_like(ext)
    status = kernels.verlet_step(
        nxt.node_positions, nxt.node_velocities, 1.0 / arrays.masses, free,
        arrays.e_i, arrays.e_j, arrays.e_rest, arrays.e_ea,
        arrays.b_a, arrays.b_b, arrays.b_c, arrays.b_coef,
        _NO_INDEX, _NO_INDEX, _NO_VALUE, _NO_VALUE,
        _NO_INDEX, _NO_VECTOR, _NO_VALUE, _NO_VECTOR,
        -1, _NO_DIRECTION, 0.0,
        ext, dt, math.exp(-mesh.material.viscous_damping * dt), forces,
    )
    _raise_for_status(status, step_index, nxt.node_positions)
    return nxt


def energy(mesh: FilamentMesh) -> Tuple[float, float]:
    """``(kinetic, elastic)`` energy in J; elastic = stretching + bending."""
    arrays = rod_arrays(mesh)
    kinetic = 0.5 * float(np.sum(arrays.masses * np.sum(mesh.node_velocities**2, axis=1)))
    elastic = kernels.stretch_energy(mesh.node_positions, arrays.e_i, arrays.e_j, arrays.e_rest, arrays.e_ea)
    elastic += kernels.bend_energy(mesh.node_positions, arrays.b_a, arrays.b_b, arrays.b_c, arrays.b_coef)
    return kinetic, float(elastic)


def _element_length(positions: NDArray[np.float64], element: int) -> float:
    return float(np.linalg.norm(positions[element + 1] - positions[element]))


def _raise_for_status(status: int, step_index: int, positions: NDArray[np.float64]) -> None:
    if status == kernels.STATUS_OK:
        return
    if status == kernels.STATUS_NONFINITE:
        raise DivergenceError(step_index, "non-finite node state")
    raise NumericalDegeneracyError(int(status), _element_length(positions, int(status)))

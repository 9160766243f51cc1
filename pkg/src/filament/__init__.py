"""Planar elastic-rod model: materials, meshes, forces and time stepping."""
from .material import MaterialParams
from .mesh import (
    DEFAULT_SAFETY,
    FilamentMesh,
    RodArrays,
    build_filament,
    energy,
    internal_forces,
    rod_arrays,
    stable_dt,
    step,
)

__all__ = [
    "DEFAULT_SAFETY",
    "FilamentMesh",
    "MaterialParams",
    "RodArrays",
    "build_filament",
    "energy",
    "internal_forces",
    "rod_arrays",
    "stable_dt",
    "step",
]

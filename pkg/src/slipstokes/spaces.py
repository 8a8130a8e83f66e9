"""Degree-of-freedom layout for the P1-P1-P0 triplet and nested prolongation.

The linear system unknowns are ordered as ``[u_x (nv), u_y (nv), p (nv), c]``
where ``c`` is the scalar multiplier of the pressure zero-mean constraint.  The
boundary multiplier is not part of the linear system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Triangulation


class MeshMismatchError(ValueError):
    """Fields or meshes that are expected to be related are not."""


@dataclass(frozen=True)
class SystemSpaces:
    n_vertices: int
    n_facets: int

    @classmethod
    def from_mesh(cls, mesh: Triangulation) -> "SystemSpaces":
        return cls(mesh.n_vertices, mesh.n_facets)

    @property
    def n_velocity_dofs(self) -> int:
        return 2 * self.n_vertices

    @property
    def n_pressure_dofs(self) -> int:
        return self.n_vertices

    @property
    def n_multiplier_dofs(self) -> int:
        return 2 * self.n_facets

    @property
    def velocity_offset(self) -> int:
        return 0

    @property
    def pressure_offset(self) -> int:
        return self.n_velocity_dofs

    @property
    def mean_constraint_index(self) -> int:
        return self.n_velocity_dofs + self.n_pressure_dofs

    @property
    def size(self) -> int:
        return self.n_velocity_dofs + self.n_pressure_dofs + 1

    def cell_dofs(self, cells: np.ndarray) -> np.ndarray:
        """Local-to-global map, columns ``[ux0, ux1, ux2, uy0, uy1, uy2, p0, p1, p2]``."""
        nv = self.n_vertices
        return np.hstack([cells, cells + nv, cells + 2 * nv])

    def split(self, x: np.ndarray):
        nv = self.n_vertices
        u = np.column_stack([x[:nv], x[nv:2 * nv]])
        return u, x[2 * nv:3 * nv].copy(), float(x[3 * nv])

    def join(self, u: np.ndarray, p: np.ndarray, c: float = 0.0) -> np.ndarray:
        return np.concatenate([u[:, 0], u[:, 1], p, [c]])


@dataclass
class VelocityField:
    mesh: Triangulation
    values: np.ndarray  # (nv, 2)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_vertices, 2):
            raise MeshMismatchError("velocity coefficients do not match the mesh vertex count")

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros((mesh.n_vertices, 2)))

    @classmethod
    def interpolate(cls, mesh, fun):
        """Nodal interpolant of ``fun(x, y) -> (fx, fy)``."""
        x, y = mesh.vertices.T
        fx, fy = fun(x, y)
        return cls(mesh, np.column_stack([np.broadcast_to(fx, x.shape), np.broadcast_to(fy, x.shape)]))


@dataclass
class PressureField:
    mesh: Triangulation
    values: np.ndarray  # (nv,)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_vertices,):
            raise MeshMismatchError("pressure coefficients do not match the mesh vertex count")

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros(mesh.n_vertices))

    @classmethod
    def interpolate(cls, mesh, fun):
        x, y = mesh.vertices.T
        return cls(mesh, np.broadcast_to(fun(x, y), x.shape).astype(float))


@dataclass
class MultiplierField:
    """Piecewise constant boundary vector field, one 2-vector per facet."""

    mesh: Triangulation
    values: np.ndarray  # (nb, 2)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_facets, 2):
            raise MeshMismatchError("multiplier coefficients do not match the boundary facet count")

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros((mesh.n_facets, 2)))

    @property
    def normal_part(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.values, self.mesh.facet_normals)

    @property
    def tangential_part(self) -> np.ndarray:
        return self.values - self.normal_part[:, None] * self.mesh.facet_normals


def _check_nested(coarse: Triangulation, fine: Triangulation):
    if fine.parent_sizes is None or len(fine.parent_vertex_map) != fine.n_vertices:
        raise MeshMismatchError("fine mesh carries no parent maps")
    if fine.parent_sizes != (coarse.n_vertices, coarse.n_cells, coarse.n_facets):
        raise MeshMismatchError("fine mesh parent maps do not reference the coarse mesh")


def prolong_nodal(coarse_values: np.ndarray, fine_mesh: Triangulation) -> np.ndarray:
    """Embed P1 nodal values: copies at inherited vertices, averages at edge midpoints."""
    pv = fine_mesh.parent_vertex_map
    return 0.5 * (coarse_values[pv[:, 0]] + coarse_values[pv[:, 1]])


def prolong_velocity(coarse: VelocityField, fine_mesh: Triangulation) -> VelocityField:
    _check_nested(coarse.mesh, fine_mesh)
    return VelocityField(fine_mesh, prolong_nodal(coarse.values, fine_mesh))


def prolong_pressure(coarse: PressureField, fine_mesh: Triangulation) -> PressureField:
    _check_nested(coarse.mesh, fine_mesh)
    return PressureField(fine_mesh, prolong_nodal(coarse.values, fine_mesh))


def prolong_multiplier(coarse: MultiplierField, fine_mesh: Triangulation) -> MultiplierField:
    _check_nested(coarse.mesh, fine_mesh)
    return MultiplierField(fine_mesh, coarse.values[fine_mesh.parent_facet_map])

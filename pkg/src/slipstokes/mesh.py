"""Conforming triangulations of the square and half-disk with red refinement.

Cells are stored counter-clockwise.  Boundary facets are oriented along the
counter-clockwise traversal of the boundary, so the outward normal of facet
``(a, b)`` is the clockwise rotation of ``x_b - x_a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SQUARE_TAGS = {"left": 0, "right": 1, "bottom": 2, "top": 3}
HALFDISK_TAGS = {"arc": 0, "diameter": 1}

HALFDISK_CENTER = np.array([0.0, 0.5])
HALFDISK_RADIUS = 1.0


@dataclass(frozen=True)
class BoundaryFacet:
    """View of a single boundary facet."""

    endpoints: tuple[int, int]
    cell: int
    normal: np.ndarray
    length: float
    tag: int


@dataclass(frozen=True, eq=False)
class Triangulation:
    """Immutable 2D triangulation with boundary facet geometry.

    Attributes
    ----------
    vertices : (nv, 2) float array
    cells : (nc, 3) int array, counter-clockwise
    facets : (nb, 2) int array of boundary facet endpoints
    facet_cells : (nb,) int array, the cell owning each facet
    facet_tags : (nb,) int array of boundary-region labels
    tag_names : mapping from label name to integer tag
    level : number of refinements applied since generation
    parent_vertex_map : (nv, 2) int array; ``(i, i)`` marks an inherited
        coarse vertex, ``(i, j)`` the midpoint of coarse edge ``(i, j)``.
        Empty at level 0.
    parent_facet_map : (nb,) int array of coarse facet indices, empty at level 0
    curved : mapping from tag to ``(center, radius)`` for circular boundaries
    """

    vertices: np.ndarray
    cells: np.ndarray
    facets: np.ndarray
    facet_cells: np.ndarray
    facet_tags: np.ndarray
    tag_names: dict = field(default_factory=dict)
    level: int = 0
    parent_vertex_map: np.ndarray = field(default_factory=lambda: np.zeros((0, 2), dtype=np.int64))
    parent_facet_map: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    parent_sizes: tuple | None = None
    curved: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("vertices", "cells", "facets", "facet_cells", "facet_tags",
                     "parent_vertex_map", "parent_facet_map"):
            arr = getattr(self, name)
            arr.setflags(write=False)
        x = self.vertices
        e = self.facets
        t = x[e[:, 1]] - x[e[:, 0]]
        length = np.hypot(t[:, 0], t[:, 1])
        normals = np.column_stack([t[:, 1], -t[:, 0]]) / length[:, None]
        object.__setattr__(self, "facet_lengths", length)
        object.__setattr__(self, "facet_normals", normals)
        c = self.cells
        edge_len = np.stack([
            np.linalg.norm(x[c[:, 1]] - x[c[:, 0]], axis=1),
            np.linalg.norm(x[c[:, 2]] - x[c[:, 1]], axis=1),
            np.linalg.norm(x[c[:, 0]] - x[c[:, 2]], axis=1),
        ])
        object.__setattr__(self, "cell_diameters", edge_len.max(axis=0))
        for name in ("facet_lengths", "facet_normals", "cell_diameters"):
            getattr(self, name).setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def n_facets(self) -> int:
        return self.facets.shape[0]

    @property
    def facet_tangents(self) -> np.ndarray:
        """Counter-clockwise unit tangents."""
        n = self.facet_normals
        return np.column_stack([-n[:, 1], n[:, 0]])

    @property
    def facet_midpoints(self) -> np.ndarray:
        return self.vertices[self.facets].mean(axis=1)

    def cell_areas(self) -> np.ndarray:
        """Signed areas; positive for counter-clockwise cells."""
        x = self.vertices
        c = self.cells
        a = x[c[:, 1]] - x[c[:, 0]]
        b = x[c[:, 2]] - x[c[:, 0]]
        return 0.5 * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])

    def facet(self, k: int) -> BoundaryFacet:
        return BoundaryFacet(
            endpoints=(int(self.facets[k, 0]), int(self.facets[k, 1])),
            cell=int(self.facet_cells[k]),
            normal=self.facet_normals[k].copy(),
            length=float(self.facet_lengths[k]),
            tag=int(self.facet_tags[k]),
        )

    def facets_with_tag(self, name: str) -> np.ndarray:
        return np.flatnonzero(self.facet_tags == self.tag_names[name])

    def __repr__(self):
        return "Triangulation(level={}, vertices={}, cells={}, facets={})".format(
            self.level, self.n_vertices, self.n_cells, self.n_facets)


def cell_edges(cells: np.ndarray) -> np.ndarray:
    """Directed local edges ``(0,1), (1,2), (2,0)`` of every cell, shape (nc, 3, 2)."""
    return np.stack([cells[:, [0, 1]], cells[:, [1, 2]], cells[:, [2, 0]]], axis=1)


def find_boundary(cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return boundary edges (oriented as in their cell) and owning cells.

    Raises ValueError if an edge is shared by more than two cells.
    """
    directed = cell_edges(cells).reshape(-1, 2)
    key = np.sort(directed, axis=1)
    _, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    if counts.max() > 2:
        raise ValueError("non-manifold triangulation: an edge belongs to more than two cells")
    inverse = inverse.ravel()
    on_boundary = counts[inverse] == 1
    idx = np.flatnonzero(on_boundary)
    return directed[idx], idx // 3


def _orient_ccw(vertices, cells):
    x = vertices
    a = x[cells[:, 1]] - x[cells[:, 0]]
    b = x[cells[:, 2]] - x[cells[:, 0]]
    flip = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0] < 0
    cells = cells.copy()
    cells[flip] = cells[flip][:, [0, 2, 1]]
    return cells


def from_arrays(vertices, cells, tagger=None, tag_names=None, curved=None) -> Triangulation:
    """Build a level-0 triangulation, detecting the boundary.

    ``tagger`` maps facet midpoints (nb, 2) to integer tags.
    """
    vertices = np.asarray(vertices, dtype=float)
    cells = _orient_ccw(vertices, np.asarray(cells, dtype=np.int64))
    facets, owners = find_boundary(cells)
    if tagger is None:
        tags = np.zeros(len(facets), dtype=np.int64)
    else:
        tags = np.asarray(tagger(vertices[facets].mean(axis=1)), dtype=np.int64)
    return Triangulation(
        vertices=vertices,
        cells=cells,
        facets=np.ascontiguousarray(facets),
        facet_cells=owners,
        facet_tags=tags,
        tag_names=dict(tag_names or {}),
        curved=dict(curved or {}),
    )


def _square_tagger(mid):
    tags = np.empty(len(mid), dtype=np.int64)
    x, y = mid[:, 0], mid[:, 1]
    tags[np.isclose(x, -1.0)] = SQUARE_TAGS["left"]
    tags[np.isclose(x, 1.0)] = SQUARE_TAGS["right"]
    tags[np.isclose(y, -1.0)] = SQUARE_TAGS["bottom"]
    tags[np.isclose(y, 1.0)] = SQUARE_TAGS["top"]
    return tags


def generate_square(divisions_per_side: int) -> Triangulation:
    """Structured triangulation of (-1, 1)^2 with all diagonals bottom-left to top-right."""
    n = int(divisions_per_side)
    if n < 1:
        raise ValueError("divisions_per_side must be >= 1")
    s = np.linspace(-1.0, 1.0, n + 1)
    X, Y = np.meshgrid(s, s)
    vertices = np.column_stack([X.ravel(), Y.ravel()])
    i, j = np.meshgrid(np.arange(n), np.arange(n))
    v00 = (i + j * (n + 1)).ravel()
    v10 = v00 + 1
    v01 = v00 + n + 1
    v11 = v01 + 1
    lower = np.column_stack([v00, v10, v11])
    upper = np.column_stack([v00, v11, v01])
    cells = np.stack([lower, upper], axis=1).reshape(-1, 3)
    return from_arrays(vertices, cells, _square_tagger, SQUARE_TAGS)


def generate_halfdisk(levels: int = 0, sectors: int = 4) -> Triangulation:
    """Fan triangulation of {x^2 + (y-0.5)^2 < 1, y < 0.5}, refined ``levels`` times."""
    if levels < 0:
        raise ValueError("levels must be >= 0")
    theta = np.pi + np.pi * np.arange(sectors + 1) / sectors
    arc = HALFDISK_CENTER + HALFDISK_RADIUS * np.column_stack([np.cos(theta), np.sin(theta)])
    arc[:, 1][[0, -1]] = HALFDISK_CENTER[1]
    vertices = np.vstack([HALFDISK_CENTER, arc])
    cells = np.column_stack([
        np.zeros(sectors, dtype=np.int64),
        np.arange(1, sectors + 1),
        np.arange(2, sectors + 2),
    ])

    def tagger(mid):
        on_diameter = np.isclose(mid[:, 1], HALFDISK_CENTER[1])
        return np.where(on_diameter, HALFDISK_TAGS["diameter"], HALFDISK_TAGS["arc"])

    mesh = from_arrays(
        vertices, cells, tagger, HALFDISK_TAGS,
        curved={HALFDISK_TAGS["arc"]: (HALFDISK_CENTER.copy(), HALFDISK_RADIUS)},
    )
    for _ in range(levels):
        mesh = refine_uniform(mesh)
    return mesh


def refine_uniform(mesh: Triangulation) -> Triangulation:
    """Red refinement: split every triangle into four through its edge midpoints.

    Midpoints of facets on a curved boundary are projected radially onto the
    circle.  Fine facets ``2k`` and ``2k + 1`` are the children of coarse facet ``k``.
    """
    nv = mesh.n_vertices
    cells = mesh.cells
    directed = cell_edges(cells)
    key = np.sort(directed.reshape(-1, 2), axis=1)
    edges, inverse = np.unique(key, axis=0, return_inverse=True)
    mid = nv + inverse.reshape(-1, 3)

    vertices = np.vstack([mesh.vertices, mesh.vertices[edges].mean(axis=1)])
    parent_vertex = np.vstack([np.column_stack([np.arange(nv), np.arange(nv)]), edges])

    a, b, c = cells.T
    m01, m12, m20 = mid.T
    fine_cells = np.stack([
        np.column_stack([a, m01, m20]),
        np.column_stack([m01, b, m12]),
        np.column_stack([m20, m12, c]),
        np.column_stack([m01, m12, m20]),
    ], axis=1).reshape(-1, 3)

    # midpoint of each coarse facet, located through the edge table
    edge_index = {tuple(e): nv + k for k, e in enumerate(edges)}
    fmid = np.array([edge_index[tuple(sorted(e))] for e in mesh.facets.tolist()], dtype=np.int64)

    for tag, (center, radius) in mesh.curved.items():
        on = fmid[mesh.facet_tags == tag]
        d = vertices[on] - center
        vertices[on] = center + radius * d / np.linalg.norm(d, axis=1)[:, None]

    p, q = mesh.facets.T
    fine_facets = np.stack([np.column_stack([p, fmid]), np.column_stack([fmid, q])], axis=1).reshape(-1, 2)
    parent_facet = np.repeat(np.arange(mesh.n_facets), 2)

    # owning fine cell of each fine facet
    fine_edges = cell_edges(fine_cells).reshape(-1, 2)
    owner = {tuple(e): k // 3 for k, e in enumerate(fine_edges.tolist())}
    facet_cells = np.array([owner[tuple(e)] for e in fine_facets.tolist()], dtype=np.int64)

    return Triangulation(
        vertices=vertices,
        cells=fine_cells,
        facets=fine_facets,
        facet_cells=facet_cells,
        facet_tags=np.repeat(mesh.facet_tags, 2),
        tag_names=dict(mesh.tag_names),
        level=mesh.level + 1,
        parent_vertex_map=parent_vertex,
        parent_facet_map=parent_facet,
        parent_sizes=(mesh.n_vertices, mesh.n_cells, mesh.n_facets),
        curved=dict(mesh.curved),
    )


def boundary_normals_check(mesh: Triangulation) -> bool:
    """True iff every facet normal points away from its cell's centroid."""
    centroids = mesh.vertices[mesh.cells[mesh.facet_cells]].mean(axis=1)
    d = mesh.facet_midpoints - centroids
    return bool(np.all(np.einsum("ij,ij->i", d, mesh.facet_normals) > 0))


def with_normals(mesh: Triangulation, normals: np.ndarray) -> Triangulation:
    """Copy of ``mesh`` with overridden facet normals (test helper for corrupt input)."""
    new = Triangulation(
        vertices=mesh.vertices.copy(), cells=mesh.cells.copy(), facets=mesh.facets.copy(),
        facet_cells=mesh.facet_cells.copy(), facet_tags=mesh.facet_tags.copy(),
        tag_names=dict(mesh.tag_names), level=mesh.level,
        parent_vertex_map=mesh.parent_vertex_map.copy(),
        parent_facet_map=mesh.parent_facet_map.copy(),
        parent_sizes=mesh.parent_sizes, curved=dict(mesh.curved),
    )
    normals = np.array(normals, dtype=float)
    normals.setflags(write=False)
    object.__setattr__(new, "facet_normals", normals)
    return new


def write_mesh_text(mesh: Triangulation, path) -> None:
    """Write the plain-text mesh format: header, vertices, cells, boundary facets."""
    with open(path, "w") as fh:
        fh.write("{} {} {}\n".format(mesh.n_vertices, mesh.n_cells, mesh.n_facets))
        for x, y in mesh.vertices.tolist():
            fh.write("{!r} {!r}\n".format(x, y))
        for i, j, k in mesh.cells.tolist():
            fh.write("{} {} {}\n".format(i, j, k))
        for (i, j), c, t in zip(mesh.facets.tolist(), mesh.facet_cells.tolist(), mesh.facet_tags.tolist()):
            fh.write("{} {} {} {}\n".format(i, j, c, t))


def read_mesh_text(path, tag_names=None) -> Triangulation:
    """Read the plain-text mesh format written by :func:`write_mesh_text`."""
    with open(path) as fh:
        tokens = fh.read().split()
    try:
        nv, nc, nb = (int(t) for t in tokens[:3])
        pos = 3
        vertices = np.array(tokens[pos:pos + 2 * nv], dtype=float).reshape(nv, 2)
        pos += 2 * nv
        cells = np.array(tokens[pos:pos + 3 * nc], dtype=np.int64).reshape(nc, 3)
        pos += 3 * nc
        bnd = np.array(tokens[pos:pos + 4 * nb], dtype=np.int64).reshape(nb, 4)
        pos += 4 * nb
    except ValueError as exc:
        raise ValueError("malformed mesh file {}: {}".format(path, exc)) from exc
    if pos != len(tokens):
        raise ValueError("malformed mesh file {}: trailing data".format(path))
    return Triangulation(
        vertices=vertices,
        cells=cells,
        facets=np.ascontiguousarray(bnd[:, :2]),
        facet_cells=bnd[:, 2].copy(),
        facet_tags=bnd[:, 3].copy(),
        tag_names=dict(tag_names or {}),
    )

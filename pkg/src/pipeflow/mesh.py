"""Structured, boundary-fitted triangulations of star-shaped cross-sections."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import BadResolution
from .geometry import CrossSection, SectionKind


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Triangle mesh with an ordered, counterclockwise boundary loop.

    ``boundary_edges[e] = (p, q)`` runs counterclockwise, ``boundary_normals[e]``
    is the outward unit normal of the chord and ``boundary_weights[e]`` its length.
    """

    section: CrossSection
    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    level: int = 0
    boundary_normals: np.ndarray = field(init=False, repr=False)
    boundary_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        d = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        length = np.hypot(d[:, 0], d[:, 1])
        normals = np.stack([d[:, 1], -d[:, 0]], axis=1) / length[:, None]
        for arr in (self.vertices, self.triangles, self.boundary_edges, normals, length):
            arr.setflags(write=False)
        object.__setattr__(self, "boundary_normals", normals)
        object.__setattr__(self, "boundary_weights", length)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges as sorted vertex pairs."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    @cached_property
    def h_max(self) -> float:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return float(np.hypot(d[:, 0], d[:, 1]).max())

    @cached_property
    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        u = p[:, 1] - p[:, 0]
        v = p[:, 2] - p[:, 0]
        return 0.5 * (u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])

    @property
    def area(self) -> float:
        return float(self.signed_areas.sum())

    @property
    def boundary_length(self) -> float:
        return float(self.boundary_weights.sum())

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return self.boundary_edges[:, 0].copy()

    @cached_property
    def interior_vertices(self) -> np.ndarray:
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[self.boundary_vertices] = False
        return np.flatnonzero(mask)

    @cached_property
    def boundary_triangles(self) -> np.ndarray:
        """Index of the triangle owning each boundary edge."""
        key = _edge_keys(self.triangles, self.n_vertices)
        owner = np.repeat(np.arange(self.n_triangles), 3)
        order = np.argsort(key)
        bkey = _pair_key(self.boundary_edges, self.n_vertices)
        pos = np.searchsorted(key[order], bkey)
        return owner[order][pos]


def _pair_key(pairs: np.ndarray, n: int) -> np.ndarray:
    pairs = np.sort(pairs, axis=1).astype(np.int64)
    return pairs[:, 0] * n + pairs[:, 1]


def _edge_keys(triangles: np.ndarray, n: int) -> np.ndarray:
    t = triangles
    # interleaved so that edge 3*i + k belongs to triangle i
    e = np.stack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]], axis=1).reshape(-1, 2)
    return _pair_key(e, n)


def polar_mesh(section: CrossSection, n_rings: int, n_sectors: int) -> TriMesh:
    """Tensor-product polar grid, vertex ``(i, j)`` at ``(i / n_rings) r(theta_j)``.

    Ring ``i = 1`` is joined to the centre by a fan of ``n_sectors`` triangles,
    rings ``1 .. n_rings`` by quads cut along the same diagonal, for a total of
    ``(2 n_rings - 1) n_sectors`` triangles.
    """
    if section.kind is SectionKind.STRIP1D:
        raise BadResolution("Strip1D sections are one-dimensional and cannot be meshed")
    if int(n_rings) != n_rings or int(n_sectors) != n_sectors:
        raise BadResolution("n_rings and n_sectors must be integers")
    n_rings, n_sectors = int(n_rings), int(n_sectors)
    if n_rings < 2 or n_sectors < 8:
        raise BadResolution(f"need n_rings >= 2 and n_sectors >= 8, got ({n_rings}, {n_sectors})")

    theta = 2.0 * np.pi * np.arange(n_sectors) / n_sectors
    boundary = section.point(theta)
    scale = np.arange(1, n_rings + 1) / n_rings
    rings = scale[:, None, None] * boundary[None, :, :]
    vertices = np.vstack([np.zeros((1, 2)), rings.reshape(-1, 2)])
    # exact boundary points, not rescaled by i/n_rings = 1.0
    vertices[1 + (n_rings - 1) * n_sectors :] = boundary

    j = np.arange(n_sectors)
    jn = (j + 1) % n_sectors

    def vid(i, jj):
        return 1 + (i - 1) * n_sectors + jj

    tris = [np.stack([np.zeros_like(j), vid(1, j), vid(1, jn)], axis=1)]
    for i in range(1, n_rings):
        a, b = vid(i, j), vid(i, jn)
        c, d = vid(i + 1, jn), vid(i + 1, j)
        tris.append(np.stack([a, d, c], axis=1))
        tris.append(np.stack([a, c, b], axis=1))
    triangles = np.vstack(tris).astype(np.int64)
    bedges = np.stack([vid(n_rings, j), vid(n_rings, jn)], axis=1).astype(np.int64)
    return TriMesh(section, vertices, triangles, bedges, level=0)


def refine(mesh: TriMesh) -> TriMesh:
    """Uniform red refinement; boundary midpoints are moved onto the exact boundary."""
    n = mesh.n_vertices
    t = mesh.triangles
    edges = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    keys, inverse = np.unique(_pair_key(edges, n), return_inverse=True)
    inverse = inverse.reshape(3, -1)
    a_end, b_end = keys // n, keys % n
    mids = 0.5 * (mesh.vertices[a_end] + mesh.vertices[b_end])

    bkeys = _pair_key(mesh.boundary_edges, n)
    bpos = np.searchsorted(keys, bkeys)
    p, q = mesh.boundary_edges[:, 0], mesh.boundary_edges[:, 1]
    tp = np.arctan2(mesh.vertices[p, 1], mesh.vertices[p, 0])
    tq = np.arctan2(mesh.vertices[q, 1], mesh.vertices[q, 0])
    tm = tp + 0.5 * np.mod(tq - tp, 2.0 * np.pi)
    mids[bpos] = mesh.section.point(tm)

    vertices = np.vstack([mesh.vertices, mids])
    m01, m12, m20 = (inverse[k] + n for k in range(3))
    v0, v1, v2 = t[:, 0], t[:, 1], t[:, 2]
    triangles = np.concatenate(
        [
            np.stack([v0, m01, m20], axis=1),
            np.stack([m01, v1, m12], axis=1),
            np.stack([m20, m12, v2], axis=1),
            np.stack([m01, m12, m20], axis=1),
        ]
    ).astype(np.int64)
    bm = bpos + n
    bedges = np.empty((2 * len(p), 2), dtype=np.int64)
    bedges[0::2, 0], bedges[0::2, 1] = p, bm
    bedges[1::2, 0], bedges[1::2, 1] = bm, q
    return TriMesh(mesh.section, vertices, triangles, bedges, level=mesh.level + 1)


def mesh_at_level(section: CrossSection, n_rings: int, n_sectors: int, level: int = 0) -> TriMesh:
    mesh = polar_mesh(section, n_rings, n_sectors)
    for _ in range(level):
        mesh = refine(mesh)
    return mesh


def write_vtk(path, mesh: TriMesh, point_data: dict | None = None, title: str = "pipeflow") -> None:
    """Legacy ASCII VTK (version 2.0) UNSTRUCTURED_GRID of triangles, z = 0."""
    point_data = point_data or {}
    lines = [
        "# vtk DataFile Version 2.0",
        title.replace("\n", " ")[:255],
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.n_vertices} double",
    ]
    lines += [f"{x:.17g} {y:.17g} 0" for x, y in mesh.vertices]
    lines.append(f"CELLS {mesh.n_triangles} {4 * mesh.n_triangles}")
    lines += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles]
    lines.append(f"CELL_TYPES {mesh.n_triangles}")
    lines += ["5"] * mesh.n_triangles
    if point_data:
        lines.append(f"POINT_DATA {mesh.n_vertices}")
        for name, values in point_data.items():
            values = np.asarray(values, dtype=float)
            if values.shape != (mesh.n_vertices,):
                raise ValueError(f"point data {name!r} has shape {values.shape}")
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines += [f"{v:.17g}" for v in values]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")

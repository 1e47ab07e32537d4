"""Conforming triangulations of simple polygons with uniform 4-way refinement.

The function space is piecewise linear on triangles; per-triangle constant
gradients are exposed through ``grad_map`` (a 2x3 map from the three nodal
values to the gradient).  Coarse meshes come from ear clipping, with ears
chosen greedily by the minimum angle of the clipped triangle so convex
polygons get balanced fans.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DomainSpec, Polygon, polygonize


@dataclass(frozen=True, eq=False)
class Mesh:
    nodes: np.ndarray          # (n, 2) float
    triangles: np.ndarray      # (m, 3) int, counterclockwise
    boundary_node: np.ndarray  # (n,) bool
    tri_area: np.ndarray       # (m,) float
    grad_map: np.ndarray       # (m, 2, 3): nodal values -> constant gradient

    @classmethod
    def from_arrays(cls, nodes: np.ndarray, triangles: np.ndarray) -> "Mesh":
        nodes = np.ascontiguousarray(np.asarray(nodes, dtype=float))
        triangles = np.ascontiguousarray(np.asarray(triangles, dtype=np.int64))
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise ValueError("nodes must be an (n, 2) array")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise ValueError("triangles must be an (m, 3) index array")

        p = nodes[triangles]  # (m, 3, 2)
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        area = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        scale = float(np.max(np.abs(nodes))) ** 2 + 1.0
        if np.any(area <= 1e-14 * scale):
            raise ValueError("all triangles must be counterclockwise with positive area")

        # Edge opposite node i is p_{i+2} - p_{i+1}; rotating it by +90 degrees
        # and dividing by 2|T| gives the gradient of the hat function at i.
        e = p[:, [2, 0, 1], :] - p[:, [1, 2, 0], :]  # (m, 3, 2)
        grad = np.empty((len(triangles), 2, 3))
        grad[:, 0, :] = -e[:, :, 1]
        grad[:, 1, :] = e[:, :, 0]
        grad /= (2.0 * area)[:, None, None]

        edges = np.sort(triangles[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        n = len(nodes)
        keys = edges[:, 0] * np.int64(n) + edges[:, 1]
        uniq, counts = np.unique(keys, return_counts=True)
        if np.any(counts > 2):
            raise ValueError("non-conforming mesh: an edge is shared by > 2 triangles")
        boundary_edges = uniq[counts == 1]
        boundary = np.zeros(n, dtype=bool)
        boundary[boundary_edges // n] = True
        boundary[boundary_edges % n] = True

        for arr in (nodes, triangles, boundary, area, grad):
            arr.setflags(write=False)
        return cls(nodes, triangles, boundary, area, grad)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)


def _min_angle_of(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    la = np.linalg.norm(c - b)
    lb = np.linalg.norm(a - c)
    lc = np.linalg.norm(b - a)
    if min(la, lb, lc) <= 0.0:
        return 0.0

    def ang(opp, s1, s2):
        cosv = (s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2)
        return float(np.arccos(np.clip(cosv, -1.0, 1.0)))

    return min(ang(la, lb, lc), ang(lb, lc, la), ang(lc, la, lb))


def triangulate(p: Polygon) -> Mesh:
    """Ear-clip a simple counterclockwise polygon into n - 2 triangles.

    Among the currently valid ears the one whose triangle has the largest
    minimum angle is clipped first; ties break on the lowest vertex index, so
    the result is deterministic.
    """
    verts = p.vertices
    n = len(verts)
    nxt = np.roll(np.arange(n), -1)
    prv = np.roll(np.arange(n), 1)
    active = np.ones(n, dtype=bool)
    scale = float(np.max(np.abs(verts))) ** 2 + 1.0
    eps = 1e-12 * scale

    def cross_at(i: int) -> float:
        a, b, c = verts[prv[i]], verts[i], verts[nxt[i]]
        return float((b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]))

    def blocked(i: int) -> bool:
        # Any other active vertex inside (or on) the candidate triangle
        # invalidates the ear.  Only reachable for nonconvex polygons.
        tri = (verts[prv[i]], verts[i], verts[nxt[i]])
        others = np.flatnonzero(active)
        others = others[(others != i) & (others != prv[i]) & (others != nxt[i])]
        if len(others) == 0:
            return False
        pts = verts[others]
        inside = np.ones(len(pts), dtype=bool)
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            cr = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
            inside &= cr >= -eps
        return bool(np.any(inside))

    convex_input = all(cross_at(i) > -eps for i in range(n))

    quality = np.full(n, -np.inf)

    def refresh(i: int) -> None:
        if not active[i]:
            return
        if cross_at(i) <= eps or (not convex_input and blocked(i)):
            quality[i] = -np.inf
        else:
            quality[i] = _min_angle_of(verts[prv[i]], verts[i], verts[nxt[i]])

    for i in range(n):
        refresh(i)

    tris = []
    remaining = n
    while remaining > 3:
        if not convex_input:
            for i in np.flatnonzero(active):
                refresh(i)
        i = int(np.argmax(quality))
        if not np.isfinite(quality[i]):
            raise ValueError("ear clipping failed: polygon is degenerate")
        tris.append((prv[i], i, nxt[i]))
        active[i] = False
        quality[i] = -np.inf
        a, b = prv[i], nxt[i]
        nxt[a], prv[b] = b, a
        remaining -= 1
        refresh(a)
        refresh(b)
    last = np.flatnonzero(active)
    i = last[1]
    tris.append((prv[i], i, nxt[i]))

    return Mesh.from_arrays(verts, np.array(tris, dtype=np.int64))


def refine(m: Mesh, levels: int) -> Mesh:
    """Uniform refinement: each level splits every triangle into 4 via edge
    midpoints.  Children are similar to their parents, so the minimum angle of
    the coarse mesh is preserved."""
    if levels < 0:
        raise ValueError("levels must be nonnegative")
    nodes, tris = m.nodes, m.triangles
    for _ in range(levels):
        n = len(nodes)
        edges = np.sort(tris[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        keys = edges[:, 0] * np.int64(n) + edges[:, 1]
        uniq_keys, inv = np.unique(keys, return_inverse=True)
        ea, eb = uniq_keys // n, uniq_keys % n
        mids = 0.5 * (nodes[ea] + nodes[eb])
        mid_idx = n + inv.reshape(-1, 3)  # columns: midpoints of (01, 12, 20)
        m01, m12, m20 = mid_idx[:, 0], mid_idx[:, 1], mid_idx[:, 2]
        v0, v1, v2 = tris[:, 0], tris[:, 1], tris[:, 2]
        nodes = np.vstack([nodes, mids])
        tris = np.vstack(
            [
                np.column_stack([v0, m01, m20]),
                np.column_stack([v1, m12, m01]),
                np.column_stack([v2, m20, m12]),
                np.column_stack([m01, m12, m20]),
            ]
        )
    if levels == 0:
        return m
    return Mesh.from_arrays(nodes, tris)


def interior_dof_map(m: Mesh) -> tuple[np.ndarray, int]:
    """Map node index -> dense interior index (or -1 for boundary nodes).

    Raises if the mesh has no interior node (too coarse to carry a zero-trace
    function)."""
    interior = ~m.boundary_node
    n_int = int(np.count_nonzero(interior))
    if n_int == 0:
        raise ValueError("mesh has no interior nodes; refine before solving")
    idx = np.full(m.n_nodes, -1, dtype=np.int64)
    idx[interior] = np.arange(n_int)
    return idx, n_int


def min_angle(m: Mesh) -> float:
    """Smallest interior angle over all triangles (radians)."""
    p = m.nodes[m.triangles]
    out = np.inf
    la = np.linalg.norm(p[:, 2] - p[:, 1], axis=1)
    lb = np.linalg.norm(p[:, 0] - p[:, 2], axis=1)
    lc = np.linalg.norm(p[:, 1] - p[:, 0], axis=1)
    for opp, s1, s2 in ((la, lb, lc), (lb, lc, la), (lc, la, lb)):
        cosv = np.clip((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2), -1.0, 1.0)
        out = min(out, float(np.min(np.arccos(cosv))))
    return out


def build_mesh(domain: DomainSpec, level: int, n_boundary: int = 128) -> Mesh:
    """Polygonize (curved boundaries only), ear-clip, refine ``level`` times."""
    return refine(triangulate(polygonize(domain, n_boundary)), level)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_mesh_csv(m: Mesh, nodes_path, triangles_path) -> None:
    """Write node and triangle lists as CSV (x, y, boundary) / (i0, i1, i2)."""
    with open(nodes_path, "w", encoding="utf-8") as fh:
        fh.write("x,y,boundary\n")
        for (x, y), b in zip(m.nodes, m.boundary_node):
            fh.write(f"{_fmt(x)},{_fmt(y)},{int(b)}\n")
    with open(triangles_path, "w", encoding="utf-8") as fh:
        fh.write("i0,i1,i2\n")
        for t in m.triangles:
            fh.write(f"{t[0]},{t[1]},{t[2]}\n")


def write_nodal_values_csv(m: Mesh, values: np.ndarray, path, name: str = "u") -> None:
    """Write per-node values as CSV rows (x, y, value)."""
    values = np.asarray(values, dtype=float)
    if values.shape != (m.n_nodes,):
        raise ValueError("values must have one entry per mesh node")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"x,y,{name}\n")
        for (x, y), v in zip(m.nodes, values):
            fh.write(f"{_fmt(x)},{_fmt(y)},{_fmt(v)}\n")

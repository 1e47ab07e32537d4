"""Planar bounded domains and the two affine maps the anisotropy reduction
needs: rotation of the domain and vertical shear ``(x, y) -> (x, sqrt(a) y)``.

Domains are disks, axis-aligned rectangles (given by half-extents), or simple
counterclockwise polygons.  Curved boundaries are polygonized by inscribed
regular polygons before meshing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np


@dataclass(frozen=True)
class Disk:
    radius: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self) -> None:
        if not self.radius > 0.0:
            raise ValueError(f"disk radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))


@dataclass(frozen=True)
class Rectangle:
    halfwidth: float
    halfheight: float

    def __post_init__(self) -> None:
        if not (self.halfwidth > 0.0 and self.halfheight > 0.0):
            raise ValueError("rectangle half-extents must be positive")


@dataclass(frozen=True, eq=False)
class Polygon:
    """Simple counterclockwise polygon; vertices are an immutable (n, 2) array."""

    vertices: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError("polygon needs an (n, 2) vertex array with n >= 3")
        if not np.all(np.isfinite(v)):
            raise ValueError("polygon vertices must be finite")
        if _signed_area(v) <= 0.0:
            raise ValueError("polygon must be counterclockwise with positive area")
        if not _is_simple(v):
            raise ValueError("polygon must be simple (non-self-intersecting)")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)


DomainSpec = Union[Disk, Rectangle, Polygon]


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))


def _is_convex(v: np.ndarray) -> bool:
    e = np.roll(v, -1, axis=0) - v
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    scale = float(np.max(np.abs(v))) ** 2 + 1.0
    return bool(np.all(cross > -1e-12 * scale))

def _is_simple(v: np.ndarray) -> bool:
    # Convex CCW polygons are simple; the quadratic check is only needed for
    # nonconvex input.
    if _is_convex(v):
        return True
    n = len(v)
    a = v
    b = np.roll(v, -1, axis=0)

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (
            q[..., 1] - p[..., 1]
        ) * (r[..., 0] - p[..., 0])

    for i in range(n - 1):
        j = np.arange(i + 1, n)
        # skip edges adjacent to edge i (sharing a vertex)
        j = j[(j != i + 1) & ~((i == 0) & (j == n - 1))]
        if len(j) == 0:
            continue
        p1, p2 = a[i], b[i]
        q1, q2 = a[j], b[j]
        d1 = orient(p1[None, :], p2[None, :], q1)
        d2 = orient(p1[None, :], p2[None, :], q2)
        d3 = orient(q1, q2, np.broadcast_to(p1, q1.shape))
        d4 = orient(q1, q2, np.broadcast_to(p2, q1.shape))
        proper = (np.sign(d1) * np.sign(d2) < 0) & (np.sign(d3) * np.sign(d4) < 0)
        if np.any(proper):
            return False
        scale = float(np.max(np.abs(v))) ** 2 + 1.0
        touching = (np.abs(d1) < 1e-14 * scale) | (np.abs(d2) < 1e-14 * scale)
        if np.any(touching):
            # collinear contact between non-adjacent edges counts as non-simple
            for jj, t in zip(j, touching):
                if not t:
                    continue
                if _segments_touch(p1, p2, a[jj], b[jj]):
                    return False
    return True


def _segments_touch(p1, p2, q1, q2) -> bool:
    def on_seg(p, q, r) -> bool:
        cross = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        if abs(cross) > 1e-12 * (1.0 + max(abs(q[0] - p[0]), abs(q[1] - p[1]))) ** 2:
            return False
        return (
            min(p[0], q[0]) - 1e-14 <= r[0] <= max(p[0], q[0]) + 1e-14
            and min(p[1], q[1]) - 1e-14 <= r[1] <= max(p[1], q[1]) + 1e-14
        )

    return on_seg(p1, p2, q1) or on_seg(p1, p2, q2) or on_seg(q1, q2, p1) or on_seg(q1, q2, p2)


def area(d: DomainSpec) -> float:
    """Exact area for disks and rectangles, shoelace formula for polygons."""
    if isinstance(d, Disk):
        return math.pi * d.radius ** 2
    if isinstance(d, Rectangle):
        return 4.0 * d.halfwidth * d.halfheight
    if isinstance(d, Polygon):
        return _signed_area(d.vertices)
    raise TypeError(f"not a domain: {d!r}")


def _rect_corners(r: Rectangle) -> np.ndarray:
    hw, hh = r.halfwidth, r.halfheight
    return np.array([[-hw, -hh], [hw, -hh], [hw, hh], [-hw, hh]])


def rotate(d: DomainSpec, theta: float) -> DomainSpec:
    """Rotate the domain by R_theta^T (counterclockwise by theta in [0, pi/2]).

    Disks map to disks with rotated center; rectangles and polygons map to
    polygons by exact vertex transport.
    """
    if theta < -1e-12 or theta > 0.5 * math.pi + 1e-12:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    theta = min(max(theta, 0.0), 0.5 * math.pi)
    c, s = math.cos(theta), math.sin(theta)

    def apply(v: np.ndarray) -> np.ndarray:
        return np.column_stack([c * v[:, 0] - s * v[:, 1], s * v[:, 0] + c * v[:, 1]])

    if isinstance(d, Disk):
        cx, cy = d.center
        return Disk(d.radius, (c * cx - s * cy, s * cx + c * cy))
    if isinstance(d, Rectangle):
        if theta == 0.0:
            return d
        return Polygon(apply(_rect_corners(d)))
    if isinstance(d, Polygon):
        if theta == 0.0:
            return d
        return Polygon(apply(d.vertices))
    raise TypeError(f"not a domain: {d!r}")


def shear_y(d: DomainSpec, a: float, *, n_boundary: int = 1024) -> DomainSpec:
    """Image of the domain under ``(x, y) -> (x, sqrt(a) y)`` for a in (0, 1].

    Scales the area by exactly sqrt(a).  Disks become ellipses, returned as
    polygons after boundary discretization with ``n_boundary`` vertices.
    """
    if not 0.0 < a <= 1.0:
        raise ValueError(f"shear level a must lie in (0, 1], got {a}")
    if a == 1.0:
        return d
    root = math.sqrt(a)
    if isinstance(d, Disk):
        poly = polygonize(d, n_boundary)
        return shear_y(poly, a)
    if isinstance(d, Rectangle):
        return Rectangle(d.halfwidth, root * d.halfheight)
    if isinstance(d, Polygon):
        v = d.vertices.copy()
        v[:, 1] *= root
        return Polygon(v)
    raise TypeError(f"not a domain: {d!r}")


def polygonize(d: DomainSpec, n_boundary: int = 1024) -> Polygon:
    """Inscribed polygon with ``n_boundary`` boundary vertices for curved
    boundaries; exact passthrough for rectangles and polygons."""
    if n_boundary < 16:
        raise ValueError(f"n_boundary must be at least 16, got {n_boundary}")
    if isinstance(d, Disk):
        phi = 2.0 * math.pi * np.arange(n_boundary) / n_boundary
        cx, cy = d.center
        return Polygon(
            np.column_stack([cx + d.radius * np.cos(phi), cy + d.radius * np.sin(phi)])
        )
    if isinstance(d, Rectangle):
        return Polygon(_rect_corners(d))
    if isinstance(d, Polygon):
        return d
    raise TypeError(f"not a domain: {d!r}")


def lshape() -> Polygon:
    """Nonconvex L-shaped hexagon: the square [-1, 1]^2 minus its lower-right
    quadrant.  Area 3."""
    return Polygon(
        np.array([[-1.0, -1.0], [0.0, -1.0], [0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [-1.0, 1.0]])
    )


def named_domain(name: str) -> DomainSpec:
    """Domains addressable by name in configs: square, disk, lshape."""
    key = name.strip().lower().replace("_", "-")
    if key == "square":
        return Rectangle(1.0, 1.0)
    if key in ("disk", "unit-disk"):
        return Disk(1.0)
    if key in ("lshape", "l-shape", "l"):
        return lshape()
    raise ValueError(f"unknown domain name: {name!r}")


def domain_to_json(d: DomainSpec) -> dict:
    if isinstance(d, Disk):
        return {"type": "disk", "radius": d.radius, "center": list(d.center)}
    if isinstance(d, Rectangle):
        return {"type": "rectangle", "hw": d.halfwidth, "hh": d.halfheight}
    if isinstance(d, Polygon):
        return {"type": "polygon", "vertices": d.vertices.tolist()}
    raise TypeError(f"not a domain: {d!r}")


def domain_from_json(data) -> DomainSpec:
    """Parse a domain from its JSON object form or a bare name string."""
    if isinstance(data, str):
        return named_domain(data)
    if not isinstance(data, dict) or "type" not in data:
        raise ValueError("domain spec must be a name or an object with a 'type' key")
    kind = str(data["type"]).lower()
    if kind == "disk":
        center = data.get("center", (0.0, 0.0))
        return Disk(float(data["radius"]), (float(center[0]), float(center[1])))
    if kind == "rectangle":
        return Rectangle(float(data["hw"]), float(data["hh"]))
    if kind == "polygon":
        return Polygon(np.asarray(data["vertices"], dtype=float))
    raise ValueError(f"unknown domain type: {data['type']!r}")

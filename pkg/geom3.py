"""
geom3.py – 3D primitives shared by every workbench module

• Vectors are float64 numpy arrays of shape (3,), frozen after construction
• Rotations are scipy Rotation objects
• Lines and tangent lines of the unit sphere, Platonic edge data
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

import workbench_config

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0
SOLIDS = ("tetrahedron", "cube", "octahedron", "icosahedron", "dodecahedron")
PARALLEL_EPS = 1e-12

Vec3 = np.ndarray


# ───────── vectors ──────────────────────────────────────────────────────────
def vec3(x, y=None, z=None) -> Vec3:
    """Build a frozen Vec3 from three numbers or any length-3 sequence."""
    if y is None and z is None:
        arr = np.array(x, dtype=float).reshape(-1)
    else:
        arr = np.array([x, y, z], dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"Vec3 needs exactly 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"Vec3 components must be finite, got {arr}")
    arr.setflags(write=False)
    return arr


def unit(v, tol: float = None) -> Vec3:
    """Normalize v. Raises ValueError for a (numerically) zero vector."""
    arr = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(arr))
    if not math.isfinite(norm) or norm < 1e-15:
        raise ValueError(f"Cannot normalize vector {arr}")
    out = vec3(arr / norm)
    if tol is not None and abs(norm - 1.0) > tol:
        raise ValueError(f"Vector {arr} is not unit length (|v|={norm})")
    return out


def check_unit(v, tol: float = None) -> Vec3:
    """Validate (without renormalizing beyond rounding) that v is unit length."""
    tol = workbench_config.tol("unit") if tol is None else tol
    arr = vec3(v)
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"Expected a unit vector, got |v|={norm!r} for {arr}")
    return arr


def rotation_about(axis, angle: float) -> Rotation:
    """Right-handed rotation by `angle` radians about `axis`."""
    return Rotation.from_rotvec(unit(axis) * float(angle))


# ───────── lines ────────────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class Line:
    point: Vec3
    direction: Vec3

    def __post_init__(self):
        object.__setattr__(self, "point", vec3(self.point))
        object.__setattr__(self, "direction", check_unit(self.direction))

    def foot(self) -> Vec3:
        """Point of the line closest to the origin."""
        p, t = self.point, self.direction
        return vec3(p - np.dot(p, t) * t)

    def rotated(self, rot: Rotation) -> "Line":
        return Line(rot.apply(self.point), rot.apply(self.direction))


@dataclass(frozen=True, eq=False)
class TangentLine:
    """Line touching the unit sphere at u with direction t (u·t = 0)."""
    u: Vec3
    t: Vec3

    def __post_init__(self):
        u = check_unit(self.u)
        t = check_unit(self.t)
        if abs(float(np.dot(u, t))) > workbench_config.tol("unit"):
            raise ValueError(f"Not tangent: u·t = {float(np.dot(u, t))!r}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "t", t)

    @classmethod
    def from_vectors(cls, u, t) -> "TangentLine":
        """Normalize u, project t onto the tangent plane at u and normalize it."""
        u = unit(u)
        t = np.asarray(t, dtype=float)
        t = t - np.dot(t, u) * u
        return cls(u, unit(t))

    def as_line(self) -> Line:
        return Line(self.u, self.t)

    def rotated(self, rot: Rotation) -> "TangentLine":
        return TangentLine.from_vectors(rot.apply(self.u), rot.apply(self.t))

    def flipped(self) -> "TangentLine":
        return TangentLine(self.u, -self.t)


def line_distance(a: Line, b: Line) -> float:
    """Minimal Euclidean distance between two full lines."""
    a = a.as_line() if isinstance(a, TangentLine) else a
    b = b.as_line() if isinstance(b, TangentLine) else b
    delta = b.point - a.point
    n = np.cross(a.direction, b.direction)
    n_norm = float(np.linalg.norm(n))
    if n_norm < PARALLEL_EPS:
        # parallel: point-to-line distance
        perp = delta - np.dot(delta, a.direction) * a.direction
        return float(np.linalg.norm(perp))
    return abs(float(np.dot(delta, n))) / n_norm


def signed_line_distance(a: Line, b: Line) -> float:
    """(p_b − p_a)·n̂ with n = t_a × t_b. Changes sign when the lines pass through each other."""
    a = a.as_line() if isinstance(a, TangentLine) else a
    b = b.as_line() if isinstance(b, TangentLine) else b
    n = np.cross(a.direction, b.direction)
    n_norm = float(np.linalg.norm(n))
    if n_norm < PARALLEL_EPS:
        return line_distance(a, b)
    return float(np.dot(b.point - a.point, n)) / n_norm


def line_distance_matrix(points: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """All pairwise line distances for lines (points[i], directions[i]); diagonal is 0."""
    points = np.asarray(points, dtype=float)
    directions = np.asarray(directions, dtype=float)
    delta = points[None, :, :] - points[:, None, :]
    n = np.cross(directions[:, None, :], directions[None, :, :])
    n_norm = np.linalg.norm(n, axis=-1)
    parallel = n_norm < PARALLEL_EPS
    safe = np.where(parallel, 1.0, n_norm)
    skew = np.abs(np.einsum("ijk,ijk->ij", delta, n)) / safe
    along = np.einsum("ijk,ik->ij", delta, directions)
    perp = delta - along[:, :, None] * directions[:, None, :]
    par = np.linalg.norm(perp, axis=-1)
    dist = np.where(parallel, par, skew)
    np.fill_diagonal(dist, 0.0)
    return dist


def signed_distance_matrix(points: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Vectorized signed_line_distance; parallel pairs get their unsigned distance."""
    points = np.asarray(points, dtype=float)
    directions = np.asarray(directions, dtype=float)
    delta = points[None, :, :] - points[:, None, :]
    n = np.cross(directions[:, None, :], directions[None, :, :])
    n_norm = np.linalg.norm(n, axis=-1)
    parallel = n_norm < PARALLEL_EPS
    safe = np.where(parallel, 1.0, n_norm)
    signed = np.einsum("ijk,ijk->ij", delta, n) / safe
    unsigned = line_distance_matrix(points, directions)
    return np.where(parallel, unsigned, signed)


def lines_equal(a: Line, b: Line, tol: float = None) -> bool:
    """Same line up to direction sign, within the line-equality tolerance."""
    tol = workbench_config.tol("line_equal") if tol is None else tol
    a = a.as_line() if isinstance(a, TangentLine) else a
    b = b.as_line() if isinstance(b, TangentLine) else b
    return line_distance(a, b) < tol and abs(float(np.dot(a.direction, b.direction))) > 1.0 - tol


def _line_metric(a: Line, b: Line) -> float:
    foot_gap = float(np.linalg.norm(a.foot() - b.foot()))
    turn = min(float(np.linalg.norm(a.direction - b.direction)),
               float(np.linalg.norm(a.direction + b.direction)))
    return foot_gap + turn


def line_set_distance(first: Sequence[Line], second: Sequence[Line]) -> float:
    """Symmetric Hausdorff distance between two finite sets of lines."""
    first = [g.as_line() if isinstance(g, TangentLine) else g for g in first]
    second = [g.as_line() if isinstance(g, TangentLine) else g for g in second]
    if len(first) != len(second):
        return math.inf
    if not first:
        return 0.0
    one = max(min(_line_metric(a, b) for b in second) for a in first)
    two = max(min(_line_metric(a, b) for a in first) for b in second)
    return max(one, two)


def rotate_line_about_radial_axis(g: TangentLine, delta: float) -> TangentLine:
    """Rotate the direction of g by delta about u, counterclockwise seen from the tip of u."""
    u, t = g.u, g.t
    rotated = math.cos(delta) * t + math.sin(delta) * np.cross(u, t)
    return TangentLine.from_vectors(u, rotated)


# ───────── Platonic solids ──────────────────────────────────────────────────
@dataclass(frozen=True)
class SolidEdgeData:
    solid: str
    edges: Tuple[Tuple[Vec3, Vec3], ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.edges)

    def tangent_lines(self) -> List[TangentLine]:
        return [TangentLine(m, e) for m, e in self.edges]


def _check_solid(solid: str) -> str:
    key = str(solid).strip().lower()
    if key not in SOLIDS:
        raise ValueError(f"Unknown solid id '{solid}'. Supported: {', '.join(SOLIDS)}")
    return key


def _min_distance_pairs(points: np.ndarray) -> List[Tuple[int, int]]:
    dists = {(i, j): float(np.linalg.norm(points[i] - points[j]))
             for i, j in combinations(range(len(points)), 2)}
    shortest = min(dists.values())
    return [pair for pair, d in dists.items() if d < shortest * (1.0 + 1e-9)]


def platonic_vertices(solid: str) -> np.ndarray:
    """Unit-norm vertex coordinates in the fixed conventions of the workbench."""
    solid = _check_solid(solid)
    if solid == "tetrahedron":
        raw = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    elif solid == "cube":
        raw = [(sx, sy, sz) for sx in (1, -1) for sy in (1, -1) for sz in (1, -1)]
    elif solid == "octahedron":
        raw = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    elif solid == "icosahedron":
        raw = []
        for a in (1, -1):
            for b in (GOLDEN, -GOLDEN):
                raw += [(0, a, b), (a, b, 0), (b, 0, a)]
    else:
        # dual: face centers of the icosahedron
        ico = platonic_vertices("icosahedron")
        edges = set(_min_distance_pairs(ico))
        raw = []
        for i, j, k in combinations(range(len(ico)), 3):
            if (i, j) in edges and (j, k) in edges and (i, k) in edges:
                raw.append(tuple(ico[i] + ico[j] + ico[k]))
    pts = np.array(raw, dtype=float)
    return pts / np.linalg.norm(pts, axis=1)[:, None]


def platonic_edges(solid: str) -> SolidEdgeData:
    """Edges as (normalized midpoint direction, unit edge direction) pairs."""
    solid = _check_solid(solid)
    verts = platonic_vertices(solid)
    edges = []
    for i, j in _min_distance_pairs(verts):
        mid = unit(verts[i] + verts[j])
        direction = unit(verts[j] - verts[i])
        edges.append((mid, direction))
    return SolidEdgeData(solid, tuple(edges))


def solid_generators(solid: str) -> List[Rotation]:
    """Explicit generators of the rotation group of the solid (in the workbench conventions)."""
    solid = _check_solid(solid)
    three_fold = rotation_about((1, 1, 1), 2 * math.pi / 3)
    if solid == "tetrahedron":
        return [three_fold, rotation_about((0, 0, 1), math.pi)]
    if solid in ("cube", "octahedron"):
        return [three_fold, rotation_about((0, 0, 1), math.pi / 2)]
    five_fold = rotation_about((0, 1, GOLDEN), 2 * math.pi / 5)
    return [three_fold, rotation_about((0, 0, 1), math.pi), five_fold]


GROUP_ORDERS: Dict[str, int] = {
    "tetrahedron": 12, "cube": 24, "octahedron": 24, "icosahedron": 60, "dodecahedron": 60,
}

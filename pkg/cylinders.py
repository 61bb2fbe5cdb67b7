"""
cylinders.py – Cylinder configurations around the unit ball

A cylinder is given by its generatrix (a TangentLine) and the common radius r;
its axis passes through (1+r)·u with direction t.  The common radius of a
configuration is the min over pairs of the pairwise clearance radius.

• CylinderConfig / ContactGraph
• axis_at_radius, pairwise_max_radius (closed form + scan/bisection), common_radius
• c6_config, o6_config, edge_process (the δ-process on a solid's edges)
• is_pure_geodetic and the geodetic scan over a configuration's angles
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize
from scipy.spatial.transform import Rotation

import workbench_config
from geom3 import (
    Line,
    TangentLine,
    line_distance,
    line_distance_matrix,
    lines_equal,
    platonic_edges,
    rotate_line_about_radial_axis,
)

DEBUG_MODE = os.getenv("DEBUG_MODE", "0") == "1"

UNBOUNDED = math.inf


def is_unbounded(r: float) -> bool:
    return math.isinf(r)


# ───────── configurations ───────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class CylinderConfig:
    generatrices: Tuple[TangentLine, ...]

    def __post_init__(self):
        lines = tuple(self.generatrices)
        if len(lines) < 2:
            raise ValueError(f"A cylinder configuration needs at least 2 generatrices, got {len(lines)}")
        for i, j in combinations(range(len(lines)), 2):
            if lines_equal(lines[i], lines[j]):
                raise ValueError(f"Generatrices {i} and {j} are the same line")
        object.__setattr__(self, "generatrices", lines)

    @classmethod
    def from_arrays(cls, points, directions) -> "CylinderConfig":
        return cls(tuple(TangentLine.from_vectors(u, t) for u, t in zip(points, directions)))

    @property
    def n(self) -> int:
        return len(self.generatrices)

    def points(self) -> np.ndarray:
        return np.array([g.u for g in self.generatrices])

    def directions(self) -> np.ndarray:
        return np.array([g.t for g in self.generatrices])

    def rotated(self, rot: Rotation) -> "CylinderConfig":
        return CylinderConfig(tuple(g.rotated(rot) for g in self.generatrices))

    def lines(self) -> List[Line]:
        return [g.as_line() for g in self.generatrices]


@dataclass(frozen=True)
class ContactGraph:
    n: int
    pairs: Tuple[Tuple[int, int], ...]

    def degrees(self) -> List[int]:
        deg = [0] * self.n
        for i, j in self.pairs:
            deg[i] += 1
            deg[j] += 1
        return deg

    def __len__(self) -> int:
        return len(self.pairs)


# ───────── radii ────────────────────────────────────────────────────────────
def axis_at_radius(g: TangentLine, r: float) -> Line:
    if r < 0:
        raise ValueError(f"Radius must be nonnegative, got {r!r}")
    return Line((1.0 + r) * g.u, g.t)


def _scan_cap() -> float:
    return float(workbench_config.get("pairwise_radius", "scan_cap"))


def radius_from_distance(d):
    """Smallest root of (1+r)·d − 2r for generatrix distance d, capped at the scan range.

    Works on scalars and numpy arrays; unbounded entries are math.inf.
    """
    cap = _scan_cap()
    d = np.asarray(d, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(d < 2.0, d / (2.0 - d), np.inf)
    r = np.where(r > cap, np.inf, r)
    return float(r) if r.ndim == 0 else r


def pairwise_max_radius(g1: TangentLine, g2: TangentLine) -> float:
    """Largest r for which the two cylinders of radius r on g1, g2 do not overlap.

    The axis at radius r is the (1+r)-homothety of the generatrix, so the axis
    distance is (1+r)·d and the clearance radius solves (1+r)·d = 2r.
    """
    if lines_equal(g1, g2):
        raise ValueError("pairwise_max_radius needs two distinct generatrices")
    return radius_from_distance(line_distance(g1, g2))


def pairwise_max_radius_scan(g1: TangentLine, g2: TangentLine) -> float:
    """Same quantity found numerically: bracketing scan on [0, cap] then bisection."""
    if lines_equal(g1, g2):
        raise ValueError("pairwise_max_radius needs two distinct generatrices")
    step = float(workbench_config.get("pairwise_radius", "scan_step"))
    cap = _scan_cap()
    xtol = float(workbench_config.get("pairwise_radius", "bisect_xtol"))

    def f(r: float) -> float:
        return line_distance(axis_at_radius(g1, r), axis_at_radius(g2, r)) - 2.0 * r

    if f(0.0) <= 0.0:
        return 0.0
    lo = 0.0
    steps = int(math.ceil(cap / step))
    for k in range(1, steps + 1):
        hi = min(k * step, cap)
        if f(hi) <= 0.0:
            return float(optimize.bisect(f, lo, hi, xtol=xtol))
        lo = hi
    return UNBOUNDED


def generatrix_distances(c: CylinderConfig) -> np.ndarray:
    return line_distance_matrix(c.points(), c.directions())


def radius_matrix(c: CylinderConfig) -> np.ndarray:
    """Pairwise clearance radii; the diagonal is +inf."""
    r = radius_from_distance(generatrix_distances(c))
    np.fill_diagonal(r, np.inf)
    return r


def common_radius(c: CylinderConfig) -> float:
    r = radius_matrix(c)
    value = float(np.min(r[np.triu_indices(c.n, k=1)]))
    if DEBUG_MODE:
        print(f"[CYL] common_radius n={c.n} r={value!r}", flush=True)
    return value


def contact_graph(c: CylinderConfig, tol: float = None) -> ContactGraph:
    tol = workbench_config.tol("kissing") if tol is None else tol
    r = radius_matrix(c)
    common = float(np.min(r[np.triu_indices(c.n, k=1)]))
    if is_unbounded(common):
        raise ValueError("contact_graph needs a finite common radius")
    pairs = tuple((i, j) for i, j in combinations(range(c.n), 2) if r[i, j] <= common + tol)
    return ContactGraph(c.n, pairs)


# ───────── builtin configurations ───────────────────────────────────────────
def c6_config() -> CylinderConfig:
    north = (0.0, 0.0, 1.0)
    lines = []
    for k in range(6):
        lon = k * math.pi / 3
        lines.append(TangentLine((math.cos(lon), math.sin(lon), 0.0), north))
    return CylinderConfig(tuple(lines))


def edge_process(solid: str, delta: float) -> CylinderConfig:
    """Edge lines of a Platonic solid, each turned by delta about its radial axis."""
    edges = platonic_edges(solid).tangent_lines()
    return CylinderConfig(tuple(rotate_line_about_radial_axis(g, delta) for g in edges))


def o6_config() -> CylinderConfig:
    return edge_process("tetrahedron", math.pi / 4)


# ───────── pure geodetic angles ─────────────────────────────────────────────
def is_pure_geodetic(angle: float, qmax: int, tol: float = 1e-9) -> Optional[Fraction]:
    """Best rational p/q (q ≤ qmax) for sin²(angle), or None if it misses by tol or more."""
    if qmax < 1:
        raise ValueError(f"qmax must be >= 1, got {qmax}")
    s2 = math.sin(angle) ** 2
    best = Fraction(s2).limit_denominator(qmax)
    if abs(s2 - float(best)) < tol:
        return best
    return None


def _angle(a: np.ndarray, b: np.ndarray) -> float:
    return math.acos(max(-1.0, min(1.0, float(np.dot(a, b)))))


def pure_geodetic_scan(c: CylinderConfig, qmax: int = 64, tol: float = 1e-9) -> Dict[str, List[Dict]]:
    """Test colatitudes, pairwise tangent-point angles and direction angles of c."""
    pts, dirs = c.points(), c.directions()
    z = np.array([0.0, 0.0, 1.0])
    candidates: Dict[str, List[Tuple[str, float]]] = {
        "colatitude": [(f"{k}", _angle(pts[k], z)) for k in range(c.n)],
        "tangent_point_distance": [(f"{i}-{j}", _angle(pts[i], pts[j]))
                                   for i, j in combinations(range(c.n), 2)],
        "direction_angle": [(f"{i}-{j}", _angle(dirs[i], dirs[j]))
                            for i, j in combinations(range(c.n), 2)],
    }
    report: Dict[str, List[Dict]] = {}
    for kind, items in candidates.items():
        hits = []
        for label, angle in items:
            frac = is_pure_geodetic(angle, qmax, tol)
            if frac is not None:
                hits.append({"which": label, "angle": angle, "sin2": f"{frac.numerator}/{frac.denominator}"})
        report[kind] = hits
        print(f"[CYL] geodetic {kind}: {len(hits)}/{len(items)} rational sin²", flush=True)
    return report

"""
platonic_sweep.py – Edge lines of a Platonic solid turned about their radial axes

For the three dual pairs (TT, OC, ID) every edge of the base solid gives the
tangent line through its normalized midpoint along the edge; all of them are
turned by the same angle delta.  r(delta) is the common radius of the result.

• delta_config / radius_curve / maximize
• find_t0: the polynomial root behind the I/D optimum
• id_zeros: the three interior zeros of r on the I/D family and their
  intersection patterns (connected components of the intersection graph)
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import optimize
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

import workbench_config
from cylinders import (
    CylinderConfig,
    common_radius,
    contact_graph,
    edge_process,
    radius_from_distance,
)
from geom3 import (
    TangentLine,
    line_distance_matrix,
    line_set_distance,
    platonic_edges,
    rotate_line_about_radial_axis,
    signed_distance_matrix,
)

DEBUG_MODE = os.getenv("DEBUG_MODE", "0") == "1"

T0_POLY = np.polynomial.Polynomial([9.0, -84.0, -4.0, 190.0, 0.0, -80.0, 5.0])
T0_BRACKET = (0.6, 0.8)


# ───────── dual pairs ───────────────────────────────────────────────────────
@dataclass(frozen=True)
class DualPair:
    pair_id: str
    base_solid: str
    dual_solid: str
    lines: int


PAIRS: Dict[str, DualPair] = {
    "TT": DualPair("TT", "tetrahedron", "tetrahedron", 6),
    "OC": DualPair("OC", "octahedron", "cube", 12),
    "ID": DualPair("ID", "icosahedron", "dodecahedron", 30),
}


def get_pair(pair) -> DualPair:
    if isinstance(pair, DualPair):
        return pair
    key = str(pair).strip().upper()
    if key not in PAIRS:
        raise ValueError(f"Unknown dual pair '{pair}'. Supported: tt, oc, id")
    return PAIRS[key]


@lru_cache(maxsize=None)
def _edge_arrays(solid: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    lines = platonic_edges(solid).tangent_lines()
    u = np.array([g.u for g in lines])
    t = np.array([g.t for g in lines])
    return u, t, np.cross(u, t)


def _lines_at(pair: DualPair, delta: float) -> Tuple[np.ndarray, np.ndarray]:
    u, t, ut = _edge_arrays(pair.base_solid)
    return u, math.cos(delta) * t + math.sin(delta) * ut


def _distances(pair: DualPair, delta: float) -> np.ndarray:
    u, t = _lines_at(pair, delta)
    return line_distance_matrix(u, t)


def _min_distance(pair: DualPair, delta: float) -> float:
    d = _distances(pair, delta)
    return float(np.min(d[np.triu_indices(pair.lines, k=1)]))


def delta_config(pair, delta: float) -> CylinderConfig:
    pair = get_pair(pair)
    if not 0.0 <= delta < math.pi:
        raise ValueError(f"delta must lie in [0, pi), got {delta!r}")
    return edge_process(pair.base_solid, delta)


def dual_edge_lines(pair) -> List[TangentLine]:
    """Edge lines of the dual solid (the negated tetrahedron for TT)."""
    pair = get_pair(pair)
    if pair.pair_id == "TT":
        return [TangentLine(-g.u, -g.t) for g in platonic_edges("tetrahedron").tangent_lines()]
    return platonic_edges(pair.dual_solid).tangent_lines()


def dual_shift_check(pair, delta: float) -> float:
    """Set distance between the dual process at delta and the base process at delta + pi/2."""
    pair = get_pair(pair)
    dual = [rotate_line_about_radial_axis(g, delta) for g in dual_edge_lines(pair)]
    shifted = [rotate_line_about_radial_axis(g, delta + math.pi / 2)
               for g in platonic_edges(pair.base_solid).tangent_lines()]
    gap = line_set_distance(dual, shifted)
    print(f"[SWEEP] dual shift {pair.pair_id} at delta={delta:.6f}: set distance {gap:.3e}", flush=True)
    return gap


# ───────── r(delta) ─────────────────────────────────────────────────────────
@dataclass
class SweepCurve:
    pair: str
    samples: List[Tuple[float, float]] = field(default_factory=list)

    def deltas(self) -> np.ndarray:
        return np.array([d for d, _ in self.samples])

    def radii(self) -> np.ndarray:
        return np.array([r for _, r in self.samples])

    def argmax(self) -> int:
        return int(np.argmax(self.radii()))


def radius_curve(pair, grid: int = None) -> SweepCurve:
    """r(delta) on a uniform grid over [0, pi/2], endpoints included."""
    pair = get_pair(pair)
    grid = int(workbench_config.get("sweep", "samples") if grid is None else grid)
    if grid < 2:
        raise ValueError(f"grid must be >= 2, got {grid}")
    deltas = [0.5 * math.pi * k / (grid - 1) for k in range(grid)]
    with ThreadPoolExecutor(max_workers=workbench_config.get_max_workers()) as pool:
        dists = list(pool.map(lambda d: _min_distance(pair, d), deltas))
    radii = [float(radius_from_distance(d)) for d in dists]
    print(f"[SWEEP] {pair.pair_id}: {grid} samples, max r={max(radii):.9f}", flush=True)
    return SweepCurve(pair.pair_id, list(zip(deltas, radii)))


class SweepMax(NamedTuple):
    delta: float
    radius: float


def _pair_distance(pair: DualPair, i: int, j: int) -> Callable[[float], float]:
    u_all, t_all, ut_all = _edge_arrays(pair.base_solid)
    u = u_all[[i, j]]

    def f(delta: float) -> float:
        t = math.cos(delta) * t_all[[i, j]] + math.sin(delta) * ut_all[[i, j]]
        return float(line_distance_matrix(u, t)[0, 1])
    return f


def _active_classes(pair: DualPair, delta: float) -> List[Callable[[float], float]]:
    """One distance function per class of pairs that are (near) minimal at delta.

    Pairs in a symmetry orbit share the same function; they are grouped by their
    values at delta and at delta ± probe.
    """
    eps = workbench_config.tol("active_eps")
    probe = 1e-3
    iu = np.triu_indices(pair.lines, k=1)
    here = _distances(pair, delta)[iu]
    below = _distances(pair, delta - probe)[iu]
    above = _distances(pair, delta + probe)[iu]
    floor = float(np.min(here))
    classes: List[Tuple[Tuple[float, float, float], int]] = []
    for k in np.flatnonzero(here <= floor + eps):
        sig = (here[k], below[k], above[k])
        if not any(max(abs(a - b) for a, b in zip(sig, other)) < 1e-9 for other, _ in classes):
            classes.append((sig, int(k)))
    return [_pair_distance(pair, int(iu[0][k]), int(iu[1][k])) for _, k in classes]


def _polish(pair: DualPair, delta0: float, width: float) -> float:
    """Resolve the kink or stationary point of the min-distance near delta0."""
    lo, hi = max(0.0, delta0 - width), min(0.5 * math.pi, delta0 + width)
    funcs = _active_classes(pair, delta0)
    h = 1e-6
    candidates = [delta0]

    def try_root(g):
        try:
            if g(lo) * g(hi) < 0:
                candidates.append(optimize.brentq(g, lo, hi, xtol=1e-15, maxiter=200))
        except ValueError:
            pass

    for f in funcs:
        try_root(lambda d, f=f: (f(d + h) - f(d - h)) / (2 * h))
    for f, g in combinations(funcs, 2):
        try_root(lambda d, f=f, g=g: f(d) - g(d))
    best = max(candidates, key=lambda d: _min_distance(pair, d))
    if DEBUG_MODE:
        print(f"[SWEEP] polish {pair.pair_id}: {len(funcs)} active classes, "
              f"{len(candidates) - 1} roots, delta {delta0!r} -> {best!r}", flush=True)
    return float(best)


def maximize(pair, grid: int = None) -> SweepMax:
    """Grid argmax, golden-section refinement, then active-class polish."""
    pair = get_pair(pair)
    curve = radius_curve(pair, grid)
    deltas = curve.deltas()
    k = curve.argmax()
    a = deltas[max(k - 1, 0)]
    c = deltas[min(k + 1, len(deltas) - 1)]
    b = deltas[k]
    tol = float(workbench_config.get("sweep", "golden_tol"))

    def objective(d: float) -> float:
        return -_min_distance(pair, d)

    try:
        res = optimize.minimize_scalar(objective, bracket=(a, b, c), method="golden",
                                       options={"xtol": tol})
        delta0 = float(res.x)
    except (ValueError, RuntimeError):
        res = optimize.minimize_scalar(objective, bounds=(a, c), method="bounded",
                                       options={"xatol": tol})
        delta0 = float(res.x)
    if not a <= delta0 <= c:
        raise RuntimeError(f"Golden section left the bracket [{a}, {c}] for {pair.pair_id}: {delta0}")

    delta_star = _polish(pair, delta0, c - a)
    r_star = common_radius(delta_config(pair, delta_star))
    print(f"[SWEEP] maximize {pair.pair_id}: delta*={delta_star:.12f} r*={r_star:.12f}", flush=True)
    return SweepMax(delta_star, r_star)


def contact_profile(pair, tol: float = 1e-7) -> Dict[str, object]:
    """Contact degrees at the optimum of the pair."""
    pair = get_pair(pair)
    best = maximize(pair)
    graph = contact_graph(delta_config(pair, best.delta), tol)
    degrees = graph.degrees()
    return {"pair": pair.pair_id, "delta": best.delta, "radius": best.radius,
            "contacts": len(graph), "degrees": sorted(set(degrees))}


# ───────── t0 ───────────────────────────────────────────────────────────────
def find_t0() -> float:
    lo, hi = T0_BRACKET
    if T0_POLY(lo) * T0_POLY(hi) >= 0:
        raise RuntimeError(f"No sign change of the t0 polynomial on [{lo}, {hi}]")
    return float(optimize.bisect(T0_POLY, lo, hi, xtol=1e-14))


# ───────── I/D zeros ────────────────────────────────────────────────────────
@dataclass
class IdZero:
    delta: float
    components: List[List[int]]
    groups: List[List[int]] = field(repr=False, default_factory=list)

    def to_dict(self) -> Dict:
        return {"delta": self.delta, "components": self.components}


def _pair_roots(pair: DualPair, grid: int) -> List[float]:
    """Interior sign changes of the signed pair distances, root-solved per pair."""
    iu = np.triu_indices(pair.lines, k=1)
    deltas = np.linspace(0.0, 0.5 * math.pi, grid)
    u, t, ut = _edge_arrays(pair.base_solid)
    values = np.array([signed_distance_matrix(*_lines_at(pair, d))[iu] for d in deltas])
    roots = []
    for k in range(grid - 1):
        flips = np.flatnonzero(values[k] * values[k + 1] < 0)
        for p in flips:
            i, j = int(iu[0][p]), int(iu[1][p])

            def g(d, i=i, j=j):
                tt = math.cos(d) * t[[i, j]] + math.sin(d) * ut[[i, j]]
                return float(signed_distance_matrix(u[[i, j]], tt)[0, 1])

            root = optimize.brentq(g, deltas[k], deltas[k + 1], xtol=1e-15)
            # sign flips through parallel position are not intersections
            if abs(g(root)) < 1e-9 and 1e-9 < root < 0.5 * math.pi - 1e-9:
                roots.append(float(root))
    return sorted(roots)


def _cluster(values: List[float], tol: float) -> List[float]:
    clusters: List[List[float]] = []
    for v in values:
        if clusters and v - clusters[-1][-1] < tol:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    return [float(np.median(c)) for c in clusters]


def intersection_components(config: CylinderConfig, tol: float = None) -> List[List[int]]:
    """Connected components of the graph joining lines closer than tol."""
    tol = workbench_config.tol("zero_cluster") if tol is None else tol
    dist = line_distance_matrix(config.points(), config.directions())
    adj = (dist < tol).astype(int)
    np.fill_diagonal(adj, 0)
    count, labels = connected_components(csr_matrix(adj), directed=False)
    return [sorted(np.flatnonzero(labels == c).tolist()) for c in range(count)]


def id_zeros(tol: float = None, grid: int = None) -> List[IdZero]:
    """Interior zeros of r on the I/D family with their component profiles."""
    tol = workbench_config.tol("zero_cluster") if tol is None else tol
    grid = int(workbench_config.get("sweep", "zero_grid") if grid is None else grid)
    pair = PAIRS["ID"]
    roots = _pair_roots(pair, grid)
    zeros = []
    for delta in _cluster(roots, tol):
        groups = intersection_components(delta_config(pair, delta), tol)
        sizes: Dict[int, int] = {}
        for comp in groups:
            sizes[len(comp)] = sizes.get(len(comp), 0) + 1
        profile = [[count, size] for size, count in sorted(sizes.items(), key=lambda kv: -kv[1])]
        zeros.append(IdZero(delta, profile, groups))
        print(f"[SWEEP] I/D zero at delta={delta:.12f}: "
              + ", ".join(f"{c}x{s}" for c, s in profile), flush=True)
    return zeros


def _closest_point(p1, t1, p2, t2) -> np.ndarray:
    n = np.cross(t1, t2)
    nn = float(np.dot(n, n))
    delta = p2 - p1
    s = float(np.dot(np.cross(delta, t2), n)) / nn
    q = float(np.dot(np.cross(delta, t1), n)) / nn
    return 0.5 * ((p1 + s * t1) + (p2 + q * t2))


def tetrahedra_check(zero: IdZero, tol: float = 1e-6) -> Dict[str, object]:
    """Informational: 6-line groups meeting in 4 points, 5-line groups lying in one plane."""
    config = delta_config("id", zero.delta)
    pts, dirs = config.points(), config.directions()
    dist = line_distance_matrix(pts, dirs)
    report = {"delta": zero.delta, "tetrahedra": 0, "planar_stars": 0, "triangles": 0, "groups": len(zero.groups)}
    for comp in zero.groups:
        meets = []
        for i, j in combinations(comp, 2):
            if dist[i, j] < tol and np.linalg.norm(np.cross(dirs[i], dirs[j])) > 1e-9:
                x = _closest_point(pts[i], dirs[i], pts[j], dirs[j])
                if not any(np.linalg.norm(x - y) < tol for y in meets):
                    meets.append(x)
        if len(comp) == 6 and len(meets) == 4:
            report["tetrahedra"] += 1
        elif len(comp) == 3 and len(meets) == 3:
            report["triangles"] += 1
        elif len(comp) == 5:
            normal = np.cross(dirs[comp[0]], dirs[comp[1]])
            normal = normal / np.linalg.norm(normal)
            offsets = [float(np.dot(pts[k] - pts[comp[0]], normal)) for k in comp]
            tilts = [float(np.dot(dirs[k], normal)) for k in comp]
            if max(map(abs, offsets + tilts)) < tol:
                report["planar_stars"] += 1
    return report

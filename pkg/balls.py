"""
balls.py – Ball clusters kissing the central unit ball

• FCC (cuboctahedron), HCP (triangular orthobicupola) and icosahedral clusters
• Kissing graphs and the maximal common blow-up radius
• The two unlocking moves and their sampled verification

Index layout shared by FCC and HCP:
    0..5   equator, longitude k·60°
    6..8   top triangle, longitudes 30°, 150°, 270°
    9..11  bottom triangle (FCC: 90°, 210°, 330°; HCP: 30°, 150°, 270°)
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

import workbench_config
from geom3 import SOLIDS, check_unit, platonic_vertices, rotation_about

DEBUG_MODE = os.getenv("DEBUG_MODE", "0") == "1"

UNBOUNDED = math.inf
RING_RADIUS = 2.0 / math.sqrt(3.0)
RING_HEIGHT = 2.0 * math.sqrt(2.0 / 3.0)

# Letters used in the unlocking arguments, as ball indices
FCC_LABELS: Dict[str, int] = {"A": 5, "B": 0, "C": 6, "D": 1, "E": 11, "F": 8}
HCP_LABELS: Dict[str, int] = {"A": 9, "B": 1, "C": 6, "D": 0, "E": 7, "F": 2}


# ───────── clusters ─────────────────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class BallCluster:
    """Equal balls of radius `radius` centered at (1+radius)·direction."""
    directions: Tuple[np.ndarray, ...]
    radius: float = 1.0
    strict: bool = field(default=True, repr=False)

    def __post_init__(self):
        dirs = tuple(check_unit(d) for d in self.directions)
        if not self.radius > 0:
            raise ValueError(f"Ball radius must be positive, got {self.radius!r}")
        object.__setattr__(self, "directions", dirs)
        if self.strict and len(dirs) > 1 and min_gap(self) < -workbench_config.tol("kissing"):
            raise ValueError(f"Balls overlap (min gap {min_gap(self):.3e})")

    @property
    def n(self) -> int:
        return len(self.directions)

    def centers(self) -> np.ndarray:
        return (1.0 + self.radius) * np.array(self.directions)


@dataclass(frozen=True)
class KissingGraph:
    pairs: Tuple[Tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def degrees(self, n: int) -> List[int]:
        deg = [0] * n
        for i, j in self.pairs:
            deg[i] += 1
            deg[j] += 1
        return deg


def center_distances(cluster: BallCluster) -> np.ndarray:
    return squareform(pdist(cluster.centers()))


def min_gap(cluster: BallCluster) -> float:
    """min |c_i − c_j| − 2ρ over all pairs."""
    return float(np.min(pdist(cluster.centers()))) - 2.0 * cluster.radius


def kissing_graph(cluster: BallCluster, tol: float = None) -> KissingGraph:
    tol = workbench_config.tol("kissing") if tol is None else tol
    dist = center_distances(cluster)
    target = 2.0 * cluster.radius
    pairs = tuple((i, j) for i, j in combinations(range(cluster.n), 2) if abs(dist[i, j] - target) <= tol)
    return KissingGraph(pairs)


def _ring(longitudes_deg: Sequence[float], height: float, radius: float) -> List[np.ndarray]:
    # centers of unit balls, norm 2
    out = []
    for lon in longitudes_deg:
        a = math.radians(lon)
        out.append(np.array([radius * math.cos(a), radius * math.sin(a), height]))
    return out


def _twelve(bottom_longitudes: Sequence[float]) -> List[np.ndarray]:
    equator = _ring([60.0 * k for k in range(6)], 0.0, 2.0)
    top = _ring([30.0, 150.0, 270.0], RING_HEIGHT, RING_RADIUS)
    bottom = _ring(bottom_longitudes, -RING_HEIGHT, RING_RADIUS)
    return [d / np.linalg.norm(d) for d in equator + top + bottom]


def fcc_config() -> BallCluster:
    return BallCluster(tuple(_twelve([90.0, 210.0, 330.0])), 1.0)


def hcp_config() -> BallCluster:
    return BallCluster(tuple(_twelve([30.0, 150.0, 270.0])), 1.0)


# ───────── blow-up ──────────────────────────────────────────────────────────
def max_common_radius(directions: Sequence) -> float:
    """Largest ρ such that balls of radius ρ at (1+ρ)·directions do not overlap."""
    dirs = np.array([check_unit(d) for d in directions]) if len(directions) else np.zeros((0, 3))
    if len(dirs) < 2:
        raise ValueError(f"max_common_radius needs at least 2 directions, got {len(dirs)}")
    half_chord = float(np.min(pdist(dirs))) / 2.0
    if half_chord < 1e-12:
        raise ValueError("max_common_radius got repeated directions")
    if half_chord >= 1.0 - 1e-15:
        return UNBOUNDED
    return half_chord / (1.0 - half_chord)


def kissing_count_at_max(directions: Sequence) -> int:
    """Pairs that touch once the balls are blown up to `max_common_radius`.

    Two antipodal directions never touch at any radius, so the unbounded case counts 0.
    """
    rho = max_common_radius(directions)
    if math.isinf(rho):
        return 0
    return len(kissing_graph(BallCluster(tuple(directions), rho)))


def icosahedron_config() -> BallCluster:
    """The icosahedral cluster blown up to its maximal radius."""
    dirs = tuple(platonic_vertices("icosahedron"))
    return BallCluster(dirs, max_common_radius(dirs))


BLOWUP_SOLIDS = SOLIDS + ("cuboctahedron", "orthobicupola")


@dataclass(frozen=True)
class BlowupResult:
    solid: str
    n: int
    radius: float
    kissing: int


def blowup(solid: str) -> BlowupResult:
    key = str(solid).strip().lower()
    if key == "cuboctahedron":
        dirs = list(fcc_config().directions)
    elif key == "orthobicupola":
        dirs = list(hcp_config().directions)
    elif key in SOLIDS:
        dirs = list(platonic_vertices(key))
    else:
        raise ValueError(f"Unknown solid '{solid}'. Supported: {', '.join(BLOWUP_SOLIDS)}")
    rho = max_common_radius(dirs)
    kiss = kissing_count_at_max(dirs)
    print(f"[BALLS] blowup {key}: n={len(dirs)} rho={rho:.12g} kissing={kiss}", flush=True)
    return BlowupResult(key, len(dirs), rho, kiss)


# ───────── moves ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class BallMove:
    """A one-parameter rolling motion. `bodies` are the index sets moving as solids."""
    name: str
    apply: Callable[[float], BallCluster] = field(repr=False)
    bodies: Tuple[FrozenSet[int], ...]

    def __call__(self, t: float) -> BallCluster:
        return self.apply(t)

    def rigid_pairs(self) -> set:
        pairs = set()
        for body in self.bodies:
            pairs.update(combinations(sorted(body), 2))
        return pairs


def _check_t(t: float) -> float:
    if abs(t) > math.pi / 2:
        raise ValueError(f"Move parameter must satisfy |t| <= pi/2, got {t!r}")
    return float(t)


def _roll(base: BallCluster, groups: Sequence[Tuple[Sequence[int], np.ndarray, float]]) -> BallCluster:
    dirs = [np.array(d) for d in base.directions]
    for members, axis, angle in groups:
        rot = rotation_about(axis, angle)
        for k in members:
            dirs[k] = rot.apply(dirs[k])
    return BallCluster(tuple(d / np.linalg.norm(d) for d in dirs), base.radius, strict=False)


def _fcc_groups(t: float, senses=(1, 1, 1)):
    base = fcc_config()
    return base, [((2 * p, 2 * p + 1), base.directions[6 + p], s * t) for p, s in enumerate(senses)]


def fcc_move(t: float) -> BallCluster:
    """Each equatorial pair rolls with its shared top ball held fixed; top and bottom stay put."""
    t = _check_t(t)
    if t == 0.0:
        return fcc_config()
    base, groups = _fcc_groups(t)
    return _roll(base, groups)


def fcc_move_wrong(t: float) -> BallCluster:
    """Negative control: the first triangle rolls in the opposite sense."""
    t = _check_t(t)
    if t == 0.0:
        return fcc_config()
    base, groups = _fcc_groups(t, senses=(-1, 1, 1))
    return _roll(base, groups)


def hcp_move(t: float) -> BallCluster:
    """Each rhombus {top, two equatorial, bottom} rolls about the axis through its center."""
    t = _check_t(t)
    if t == 0.0:
        return hcp_config()
    base = hcp_config()
    groups = []
    for p in range(3):
        axis = base.directions[2 * p] + base.directions[2 * p + 1]
        groups.append(((2 * p, 2 * p + 1, 6 + p, 9 + p), axis, t))
    return _roll(base, groups)


_FCC_BODIES = (frozenset(range(6, 12)), frozenset({0, 1, 6}), frozenset({2, 3, 7}), frozenset({4, 5, 8}))
_HCP_BODIES = tuple(frozenset({2 * p, 2 * p + 1, 6 + p, 9 + p}) for p in range(3))

MOVES: Dict[str, BallMove] = {
    "fcc": BallMove("fcc", fcc_move, _FCC_BODIES),
    "hcp": BallMove("hcp", hcp_move, _HCP_BODIES),
    "fcc_wrong": BallMove("fcc_wrong", fcc_move_wrong, _FCC_BODIES),
}


def get_move(name: str) -> BallMove:
    key = str(name).strip().lower()
    if key not in MOVES:
        raise ValueError(f"Unknown move '{name}'. Supported: {', '.join(MOVES)}")
    return MOVES[key]


# ───────── verification ─────────────────────────────────────────────────────
@dataclass
class UnlockSample:
    t: float
    min_gap: float
    rigid_drift: float
    overlap: float


@dataclass
class UnlockReport:
    move: str
    t_max: float
    steps: int
    samples: List[UnlockSample]
    verdict: str
    first_failure: Optional[float] = None

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def min_gap(self) -> float:
        return min(s.min_gap for s in self.samples)

    def to_dict(self) -> Dict:
        return {
            "move": self.move,
            "t_max": self.t_max,
            "steps": self.steps,
            "verdict": self.verdict,
            "first_failure": self.first_failure,
            "min_gap_first_sample": self.samples[0].min_gap,
            "min_gap_overall": self.min_gap(),
        }


def _sample(move: BallMove, t: float, base_dist: np.ndarray, rigid: set) -> UnlockSample:
    cluster = move(t)
    dist = center_distances(cluster)
    two_rho = 2.0 * cluster.radius
    free_gap = math.inf
    drift = 0.0
    overlap = 0.0
    for i, j in combinations(range(cluster.n), 2):
        gap = dist[i, j] - two_rho
        overlap = min(overlap, gap)
        if (i, j) in rigid:
            drift = max(drift, abs(dist[i, j] - base_dist[i, j]))
        else:
            free_gap = min(free_gap, gap)
    return UnlockSample(t, free_gap, drift, overlap)


def verify_unlock(move: BallMove, t_max: float = None, steps: int = None) -> UnlockReport:
    """Sample t_max·k/steps for k = 1..steps.

    Pairs inside one rigid body must keep their distance; all other pairs must be
    strictly apart at every sample.
    """
    t_max = float(workbench_config.get("balls", "t_max") if t_max is None else t_max)
    steps = int(workbench_config.get("balls", "steps") if steps is None else steps)
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    if not t_max > 0:
        raise ValueError(f"t_max must be positive, got {t_max!r}")

    base_dist = center_distances(move(0.0))
    rigid = move.rigid_pairs()
    ts = [t_max * k / steps for k in range(1, steps + 1)]
    with ThreadPoolExecutor(max_workers=workbench_config.get_max_workers()) as pool:
        samples = list(pool.map(lambda t: _sample(move, t, base_dist, rigid), ts))

    drift_tol = workbench_config.tol("kissing")
    first_failure = None
    for s in samples:
        if s.min_gap <= 0.0 or s.rigid_drift > drift_tol or s.overlap < -drift_tol:
            first_failure = s.t
            break
    verdict = "PASS" if first_failure is None else "FAIL"
    print(f"[BALLS] verify_unlock {move.name}: {verdict} "
          f"(gap@t1={samples[0].min_gap:.3e}, t_max={t_max}, steps={steps})", flush=True)
    if DEBUG_MODE and first_failure is not None:
        print(f"[BALLS] first failure at t={first_failure!r}", flush=True)
    return UnlockReport(move.name, t_max, steps, samples, verdict, first_failure)


def move_trajectory(move: BallMove, t_max: float = None, steps: int = None) -> List[Tuple[float, int, float, float, float]]:
    """Rows (t, ball, x, y, z) on t = t_max·k/steps, k = 0..steps."""
    t_max = float(workbench_config.get("balls", "t_max") if t_max is None else t_max)
    steps = int(workbench_config.get("balls", "steps") if steps is None else steps)
    rows = []
    for k in range(steps + 1):
        t = t_max * k / steps
        for ball, c in enumerate(move(t).centers()):
            rows.append((t, ball, float(c[0]), float(c[1]), float(c[2])))
    return rows

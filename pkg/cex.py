"""
cex.py – A smooth function that is flat along every analytic path but not near the origin

    psi(x) = exp(-1/x) for x > 0, else 0
    eta(s) = exp(1 - 1/(1 - 4s²)) for |s| < 1/2, else 0
    Phi(x, y) = exp(-1/x²) · eta((y - psi(x)) / psi(x)) for x > 0, else 0

Phi is supported in the beak {x ≥ 0, psi/2 ≤ y ≤ 2·psi}.  Support membership is
decided in log space, so points whose psi or Phi underflow are still classified
correctly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

import workbench_config

LOG_HALF = math.log(0.5)
LOG_THREE_HALVES = math.log(1.5)


# ───────── the functions ────────────────────────────────────────────────────
def psi(x: float) -> float:
    return math.exp(-1.0 / x) if x > 0 else 0.0


def eta(s: float) -> float:
    if abs(s) >= 0.5:
        return 0.0
    return math.exp(1.0 - 1.0 / (1.0 - 4.0 * s * s))


def _log_phi_from_log_y(x: float, log_y: float) -> float:
    if not x > 0 or not -1.0 / x + LOG_HALF < log_y < -1.0 / x + LOG_THREE_HALVES:
        return -math.inf
    s = math.exp(log_y + 1.0 / x) - 1.0
    if abs(s) >= 0.5:
        return -math.inf
    return -1.0 / (x * x) + 1.0 - 1.0 / (1.0 - 4.0 * s * s)


def in_support(x: float, y: float) -> bool:
    """True iff Phi(x, y) > 0 as a real number (regardless of float underflow)."""
    if not (x > 0 and y > 0):
        return False
    return math.isfinite(_log_phi_from_log_y(x, math.log(y)))


def log_phi(x: float, y: float) -> float:
    """log Phi(x, y); −inf outside the support."""
    if not (x > 0 and y > 0):
        return -math.inf
    return _log_phi_from_log_y(x, math.log(y))


def phi(x: float, y: float) -> float:
    value = log_phi(x, y)
    return math.exp(value) if math.isfinite(value) else 0.0


def in_beak(x: float, y: float) -> bool:
    """½·psi(x) ≤ y ≤ 2·psi(x), x ≥ 0, tested in log space."""
    if x < 0 or y < 0:
        return False
    if x == 0:
        return y == 0
    if y == 0:
        return False
    log_y = math.log(y)
    return -1.0 / x + LOG_HALF <= log_y <= -1.0 / x + math.log(2.0)


# ───────── analytic paths ───────────────────────────────────────────────────
@dataclass(frozen=True)
class AnalyticPath:
    """Polynomial path t -> (x(t), y(t)); coefficients in ascending order."""
    x_coeffs: tuple
    y_coeffs: tuple

    def __post_init__(self):
        xs = tuple(float(c) for c in self.x_coeffs) or (0.0,)
        ys = tuple(float(c) for c in self.y_coeffs) or (0.0,)
        if xs[0] != 0.0 or ys[0] != 0.0:
            raise ValueError("Analytic path must start at the origin (zero constant terms)")
        object.__setattr__(self, "x_coeffs", xs)
        object.__setattr__(self, "y_coeffs", ys)

    def is_constant(self) -> bool:
        return not any(self.x_coeffs) and not any(self.y_coeffs)

    def __call__(self, t: float):
        return float(Polynomial(self.x_coeffs)(t)), float(Polynomial(self.y_coeffs)(t))


def random_paths(n: int, degree: int, seed: Optional[int] = None) -> List[AnalyticPath]:
    if degree < 1:
        raise ValueError(f"degree must be >= 1, got {degree}")
    rng = np.random.default_rng(workbench_config.get_seed() if seed is None else seed)
    paths = []
    while len(paths) < n:
        xs = (0.0,) + tuple(rng.normal(size=degree))
        ys = (0.0,) + tuple(rng.normal(size=degree))
        path = AnalyticPath(xs, ys)
        if not path.is_constant():
            paths.append(path)
    return paths


def default_t_grid() -> np.ndarray:
    cfg = workbench_config.get("cex")
    return np.geomspace(float(cfg["t_min"]), 1.0, int(cfg["t_points"]))


@dataclass
class PathProbe:
    x_coeffs: List[float]
    y_coeffs: List[float]
    verified_u: float
    first_nonzero_t: Optional[float] = None


@dataclass
class PathProbeReport:
    paths: List[PathProbe] = field(default_factory=list)
    verdict: str = "FAIL"

    def to_dict(self) -> Dict:
        return {"verdict": self.verdict, "paths": [asdict(p) for p in self.paths]}


def probe_analytic_paths(paths: Sequence[AnalyticPath], t_grid: Sequence[float] = None) -> PathProbeReport:
    """For each path: the largest grid u with Phi(gamma(t)) = 0 exactly for every grid t ≤ u."""
    grid = np.sort(np.asarray(default_t_grid() if t_grid is None else t_grid, dtype=float))
    if grid.size == 0 or grid[0] <= 0:
        raise ValueError("t_grid must be nonempty and positive")
    report = PathProbeReport()
    for path in paths:
        if path.is_constant():
            raise ValueError("probe_analytic_paths needs nonconstant paths")
        u, first = 0.0, None
        for t in grid:
            if in_support(*path(t)):
                first = float(t)
                break
            u = float(t)
        report.paths.append(PathProbe(list(path.x_coeffs), list(path.y_coeffs), u, first))
    report.verdict = "PASS" if report.paths and all(p.verified_u > 0 for p in report.paths) else "FAIL"
    print(f"[CEX] analytic paths: {len(report.paths)} probed, verdict {report.verdict}", flush=True)
    return report


# ───────── the beak ─────────────────────────────────────────────────────────
@dataclass
class BeakSample:
    x: float
    log_y: float
    distance: float
    log_phi: float
    outside_zero: bool


@dataclass
class BeakReport:
    samples: List[BeakSample]
    min_positive_distance: float
    verdict: str

    def to_dict(self) -> Dict:
        return {
            "verdict": self.verdict,
            "min_positive_distance": self.min_positive_distance,
            "samples": [asdict(s) for s in self.samples],
        }


def probe_beak(x_grid: Sequence[float] = None) -> BeakReport:
    """Phi > 0 on the spine (x, psi(x)) as x -> 0 and Phi = 0 at (x, 2.5·psi(x))."""
    xs = np.geomspace(0.2, 1e-4, 40) if x_grid is None else np.asarray(x_grid, dtype=float)
    if xs.size == 0 or np.any(xs <= 0) or np.any(np.diff(xs) >= 0):
        raise ValueError("x_grid must be positive and strictly decreasing")
    samples = []
    for x in xs:
        log_spine = -1.0 / x
        spine_y = math.exp(log_spine)
        lp = _log_phi_from_log_y(float(x), log_spine)
        outside = not math.isfinite(_log_phi_from_log_y(float(x), log_spine + math.log(2.5)))
        samples.append(BeakSample(float(x), log_spine, math.hypot(float(x), spine_y), lp, outside))
    positive = [s for s in samples if math.isfinite(s.log_phi)]
    min_dist = min((s.distance for s in positive), default=math.inf)
    ok = len(positive) == len(samples) and all(s.outside_zero for s in samples)
    verdict = "PASS" if ok else "FAIL"
    print(f"[CEX] beak: Phi > 0 on {len(positive)}/{len(samples)} spine points, "
          f"closest at distance {min_dist:.3e}; verdict {verdict}", flush=True)
    return BeakReport(samples, min_dist, verdict)

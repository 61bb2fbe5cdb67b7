"""
rigidity.py – Numerical local-maximality certificates for cylinder configurations

Pipeline at a critical configuration:
  1. active pairs (pairwise radius equal to the common radius)
  2. chart of the 3n-dimensional configuration manifold around the base
  3. constraint gradients by central differences (h and h/2 checked)
  4. convex dependencies of the gradients (NNLS + extreme rays of the cone)
  5. E = common kernel of the gradients, modulo global rotations
  6. dependence-weighted Hessians restricted to E (Richardson-combined)
  7. negative-definite test, else the quadratic-system infeasibility test
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, optimize
from scipy.spatial.transform import Rotation

import workbench_config
from cylinders import CylinderConfig, radius_from_distance, radius_matrix
from geom3 import TangentLine, line_distance_matrix

DEBUG_MODE = os.getenv("DEBUG_MODE", "0") == "1"

Pair = Tuple[int, int]


class Family(str, Enum):
    PAIRWISE_RADIUS = "PAIRWISE_RADIUS"
    GENERATRIX_DISTANCE = "GENERATRIX_DISTANCE"


class Verdict(str, Enum):
    NEGATIVE_DEFINITE = "NEGATIVE_DEFINITE"
    SYSTEM_INFEASIBLE = "SYSTEM_INFEASIBLE"
    INCONCLUSIVE = "INCONCLUSIVE"


# ───────── chart ────────────────────────────────────────────────────────────
class Chart:
    """Coordinates (a_k, b_k, c_k) per cylinder around a base configuration.

    (a, b) move the tangent point along the geodesic in direction a·t + b·(u×t);
    the direction is carried along by the same rotation and then twisted by c
    about the new tangent point.
    """

    def __init__(self, base: CylinderConfig):
        self.base = base
        self.n = base.n
        self.dim = 3 * base.n
        self.u = base.points()
        self.t = base.directions()
        self.e1 = self.t.copy()
        self.e2 = np.cross(self.u, self.t)

    def arrays(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float).reshape(self.n, 3)
        if not np.any(x):
            return self.u.copy(), self.t.copy()
        v = x[:, [0]] * self.e1 + x[:, [1]] * self.e2
        rot = Rotation.from_rotvec(np.cross(self.u, v))
        u_new = rot.apply(self.u)
        t_moved = rot.apply(self.t)
        c = x[:, [2]]
        t_new = np.cos(c) * t_moved + np.sin(c) * np.cross(u_new, t_moved)
        return u_new, t_new

    def config(self, x: np.ndarray) -> CylinderConfig:
        if not np.any(x):
            return self.base
        u, t = self.arrays(x)
        return CylinderConfig(tuple(TangentLine.from_vectors(u[k], t[k]) for k in range(self.n)))

    def coords(self, config: CylinderConfig) -> np.ndarray:
        """Inverse chart: sphere logarithm for the tangent point, atan2 for the twist."""
        if config.n != self.n:
            raise ValueError(f"Chart has {self.n} cylinders, config has {config.n}")
        u_new, t_new = config.points(), config.directions()
        out = np.zeros((self.n, 3))
        for k in range(self.n):
            axis = np.cross(self.u[k], u_new[k])
            sin_a = float(np.linalg.norm(axis))
            cos_a = float(np.dot(self.u[k], u_new[k]))
            angle = math.atan2(sin_a, cos_a)
            rotvec = axis * (angle / sin_a) if sin_a > 1e-15 else np.zeros(3)
            v = np.cross(rotvec, self.u[k])
            out[k, 0] = float(np.dot(v, self.e1[k]))
            out[k, 1] = float(np.dot(v, self.e2[k]))
            t_moved = Rotation.from_rotvec(rotvec).apply(self.t[k])
            out[k, 2] = math.atan2(float(np.dot(np.cross(u_new[k], t_moved), t_new[k])),
                                   float(np.dot(t_moved, t_new[k])))
        return out.reshape(-1)

    def rotation_generators(self, eps: float = 1e-6) -> np.ndarray:
        """3 × 3n matrix: chart velocity of the base under rotation about x, y, z."""
        gens = np.zeros((3, self.dim))
        for axis in range(3):
            w = np.zeros(3)
            w[axis] = eps
            plus = self.coords(self.base.rotated(Rotation.from_rotvec(w)))
            minus = self.coords(self.base.rotated(Rotation.from_rotvec(-w)))
            gens[axis] = (plus - minus) / (2 * eps)
        return gens

    def pair_values(self, x: np.ndarray, pairs: Sequence[Pair], family: Family) -> np.ndarray:
        u, t = self.arrays(x)
        d = line_distance_matrix(u, t)
        idx = tuple(np.array(pairs, dtype=int).T) if pairs else (np.array([], int), np.array([], int))
        values = d[idx]
        if Family(family) is Family.PAIRWISE_RADIUS:
            return np.asarray(radius_from_distance(values), dtype=float).reshape(-1)
        return values


# ───────── active set ───────────────────────────────────────────────────────
def active_constraints(c: CylinderConfig, eps: float = None) -> List[Pair]:
    eps = workbench_config.tol("active_eps") if eps is None else eps
    r = radius_matrix(c)
    iu = np.triu_indices(c.n, k=1)
    common = float(np.min(r[iu]))
    if math.isinf(common):
        raise ValueError("active_constraints needs a finite common radius")
    return [(int(i), int(j)) for i, j in zip(*iu) if r[i, j] <= common + eps]


def parallel_pairs(c: CylinderConfig, pairs: Sequence[Pair], tol: float = 1e-9) -> List[Pair]:
    dirs = c.directions()
    return [(i, j) for i, j in pairs if float(np.linalg.norm(np.cross(dirs[i], dirs[j]))) < tol]


# ───────── finite differences ───────────────────────────────────────────────
def finite_gradient(fun: Callable[[np.ndarray], np.ndarray], dim: int, h: float) -> np.ndarray:
    """Central-difference Jacobian at the origin of a vector-valued function of R^dim."""
    cols = []
    for k in range(dim):
        e = np.zeros(dim)
        e[k] = h
        cols.append((fun(e) - fun(-e)) / (2 * h))
    return np.array(cols).T


def finite_hessian(fun: Callable[[np.ndarray], np.ndarray], dim: int, h: float) -> np.ndarray:
    """Central second differences at the origin: array (m, dim, dim) for m outputs."""
    f0 = np.asarray(fun(np.zeros(dim)), dtype=float)
    m = f0.size
    hess = np.zeros((m, dim, dim))
    eye = np.eye(dim) * h
    for i in range(dim):
        hess[:, i, i] = (fun(eye[i]) - 2 * f0 + fun(-eye[i])) / h ** 2
        for j in range(i + 1, dim):
            val = (fun(eye[i] + eye[j]) - fun(eye[i] - eye[j])
                   - fun(-eye[i] + eye[j]) + fun(-eye[i] - eye[j])) / (4 * h ** 2)
            hess[:, i, j] = val
            hess[:, j, i] = val
    return hess


def constraint_gradients(chart: Chart, active: Sequence[Pair],
                         family: Family = Family.PAIRWISE_RADIUS, h: float = None) -> np.ndarray:
    """|active| × 3n gradient matrix, checked against the h/2 stencil."""
    h = float(workbench_config.get("rigidity", "gradient_step") if h is None else h)
    tol = workbench_config.tol("gradient_stability")
    if not active:
        return np.zeros((0, chart.dim))

    def fun(x):
        return chart.pair_values(x, active, family)

    grad = finite_gradient(fun, chart.dim, h)
    half = finite_gradient(fun, chart.dim, h / 2)
    scale = np.maximum(np.linalg.norm(half, axis=1, keepdims=True), 1e-12)
    rel = np.abs(grad - half) / scale
    if float(np.max(rel)) >= tol:
        a, k = np.unravel_index(int(np.argmax(rel)), rel.shape)
        raise RuntimeError(f"Gradient unstable for pair {active[a]} at coordinate {k}: "
                           f"relative difference {rel[a, k]:.3e} (h={h})")
    return grad


# ───────── dependencies ─────────────────────────────────────────────────────
@dataclass
class ConvexDependence:
    weights: np.ndarray
    residual: float

    def to_dict(self) -> Dict:
        return {"weights": [float(w) for w in self.weights], "residual": self.residual}


def _as_dependence(lam: np.ndarray, gradients: np.ndarray) -> Optional[ConvexDependence]:
    total = float(lam.sum())
    if total <= 0:
        return None
    lam = np.clip(lam / total, 0.0, None)
    lam = lam / lam.sum()
    return ConvexDependence(lam, float(np.linalg.norm(gradients.T @ lam)))


def convex_dependencies(gradients: np.ndarray, max_subsets: int = 200_000) -> List[ConvexDependence]:
    """Nonnegative λ with Σλ = 1 and Gᵀλ = 0; the extreme rays when the cone is larger than a ray."""
    G = np.atleast_2d(np.asarray(gradients, dtype=float))
    m = G.shape[0]
    if m == 0:
        return []
    res_tol = workbench_config.tol("dependence_residual")
    svd_tol = workbench_config.tol("svd")

    A = np.vstack([G.T, np.ones((1, m))])
    b = np.append(np.zeros(G.shape[1]), 1.0)
    lam, _ = optimize.nnls(A, b)
    first = _as_dependence(lam, G)
    if first is None or first.residual >= res_tol:
        if DEBUG_MODE:
            print(f"[RIGIDITY] no convex dependence (residual "
                  f"{first.residual if first else float('nan'):.3e})", flush=True)
        return []

    null = linalg.null_space(G.T, rcond=svd_tol)
    k = null.shape[1]
    if k <= 1:
        return [first]

    total = math.comb(m, k - 1)
    if total > max_subsets:
        print(f"[RIGIDITY] dependence cone: {total} subsets exceed the limit, keeping the NNLS solution", flush=True)
        return [first]

    rays: List[ConvexDependence] = []
    for subset in combinations(range(m), k - 1):
        sub = null[list(subset)]
        ker = linalg.null_space(sub, rcond=svd_tol)
        if ker.shape[1] != 1:
            continue
        lam = null @ ker[:, 0]
        if lam.sum() < 0:
            lam = -lam
        if np.min(lam) < -1e-9 * np.max(np.abs(lam)) or not np.any(lam > 1e-12):
            continue
        dep = _as_dependence(lam, G)
        if dep is None or dep.residual >= res_tol:
            continue
        if not any(np.max(np.abs(dep.weights - r.weights)) < 1e-7 for r in rays):
            rays.append(dep)
    return rays or [first]


def cone_dimension(deps: Sequence[ConvexDependence]) -> int:
    if not deps:
        return 0
    return int(np.linalg.matrix_rank(np.array([d.weights for d in deps]), tol=1e-8))


# ───────── E ────────────────────────────────────────────────────────────────
@dataclass
class KernelSubspace:
    basis: np.ndarray
    dim_null: int
    dim: int
    rotations_removed: int


def kernel_subspace(gradients: np.ndarray, chart: Chart) -> KernelSubspace:
    svd_tol = workbench_config.tol("svd")
    G = np.asarray(gradients, dtype=float).reshape(-1, chart.dim)
    null = np.eye(chart.dim) if G.shape[0] == 0 else linalg.null_space(G, rcond=svd_tol)
    rot = linalg.orth(chart.rotation_generators().T)
    if null.shape[1] == 0:
        return KernelSubspace(np.zeros((chart.dim, 0)), 0, 0, 0)
    projected = null - rot @ (rot.T @ null)
    basis = linalg.orth(projected, rcond=svd_tol)
    dim = basis.shape[1]
    print(f"[RIGIDITY] E: null dim {null.shape[1]} -> {dim} after removing rotations", flush=True)
    return KernelSubspace(basis, null.shape[1], dim, null.shape[1] - dim)


# ───────── quadratic forms ──────────────────────────────────────────────────
def restricted_hessian_forms(chart: Chart, active: Sequence[Pair], deps: Sequence[ConvexDependence],
                             E: np.ndarray, family: Family = Family.PAIRWISE_RADIUS,
                             h: float = None) -> List[np.ndarray]:
    """q_i = Σ λ_a Hess(g_a) restricted to E, Richardson-combined and Frobenius-normalized."""
    if not deps:
        raise ValueError("restricted_hessian_forms needs at least one dependence")
    h = float(workbench_config.get("rigidity", "hessian_step") if h is None else h)
    tol = workbench_config.tol("hessian_stability")
    E = np.asarray(E, dtype=float)
    k = E.shape[1]
    if k == 0:
        return [np.zeros((0, 0)) for _ in deps]

    def fun(y):
        return chart.pair_values(E @ y, active, family)

    coarse = finite_hessian(fun, k, h)
    fine = finite_hessian(fun, k, h / 2)
    forms = []
    for dep in deps:
        qc = np.tensordot(dep.weights, coarse, axes=1)
        qf = np.tensordot(dep.weights, fine, axes=1)
        scale = max(float(np.linalg.norm(qf)), 1e-300)
        if float(np.linalg.norm(qc - qf)) / scale >= tol:
            raise RuntimeError(f"Hessian unstable: |H_h - H_h/2|/|H_h/2| = "
                               f"{float(np.linalg.norm(qc - qf)) / scale:.3e} (h={h})")
        q = (4.0 * qf - qc) / 3.0
        q = 0.5 * (q + q.T)
        forms.append(q / max(float(np.linalg.norm(q)), 1e-300))
    return forms


def check_negative_definite(q: np.ndarray) -> Tuple[bool, float]:
    """(max eigenvalue of the unit-normalized form < −tol, max eigenvalue of q)."""
    q = np.atleast_2d(np.asarray(q, dtype=float))
    if q.shape[0] != q.shape[1] or not np.allclose(q, q.T, atol=1e-12 * max(1.0, float(np.abs(q).max()))):
        raise ValueError("check_negative_definite needs a symmetric matrix")
    if q.size == 0:
        return True, -math.inf
    eig = linalg.eigh(q, eigvals_only=True)
    norm = float(np.linalg.norm(q))
    top = float(eig[-1])
    scaled = top / norm if norm > 0 else 0.0
    return scaled < -workbench_config.tol("negative_definite"), top


def _sphere_grid(dim: int, count: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        a = np.linspace(0.0, math.pi, count, endpoint=False)
        return np.column_stack([np.cos(a), np.sin(a)])
    # Fibonacci sphere
    k = np.arange(count) + 0.5
    z = 1.0 - 2.0 * k / count
    lon = math.pi * (1.0 + math.sqrt(5.0)) * k
    r = np.sqrt(1.0 - z ** 2)
    return np.column_stack([r * np.cos(lon), r * np.sin(lon), z])


def _maxmin_from(forms: Sequence[np.ndarray], x0: np.ndarray) -> Tuple[float, np.ndarray]:
    k = len(x0)

    def values(x):
        return np.array([x @ q @ x for q in forms])

    y0 = np.append(x0, float(np.min(values(x0))))
    cons = [
        {"type": "ineq",
         "fun": lambda y: values(y[:k]) - y[k],
         "jac": lambda y: np.column_stack([np.array([2.0 * (q @ y[:k]) for q in forms]),
                                           -np.ones(len(forms))])},
        {"type": "eq",
         "fun": lambda y: np.array([y[:k] @ y[:k] - 1.0]),
         "jac": lambda y: np.append(2.0 * y[:k], 0.0)[None, :]},
    ]
    res = optimize.minimize(lambda y: -y[k], y0, jac=lambda y: np.append(np.zeros(k), -1.0),
                            method="SLSQP", constraints=cons, options={"ftol": 1e-15, "maxiter": 300})
    x = res.x[:k]
    norm = float(np.linalg.norm(x))
    if not np.all(np.isfinite(x)) or norm < 1e-12:
        x = x0
    else:
        x = x / norm
    return float(np.min(values(x))), x


def check_system_infeasible(forms: Sequence[np.ndarray], starts: int = None) -> Tuple[bool, float, np.ndarray]:
    """Max over the unit sphere of min_i q_i(x); infeasible iff it is <= tol."""
    forms = [np.atleast_2d(np.asarray(q, dtype=float)) for q in forms]
    if not forms:
        raise ValueError("check_system_infeasible needs at least one form")
    starts = int(workbench_config.get("rigidity", "infeasible_starts") if starts is None else starts)
    k = forms[0].shape[0]
    seed = workbench_config.get_seed()

    def run(index: int) -> Tuple[float, np.ndarray]:
        rng = np.random.default_rng([seed, index])
        x0 = rng.normal(size=k)
        x0 /= np.linalg.norm(x0)
        return _maxmin_from(forms, x0)

    with ThreadPoolExecutor(max_workers=workbench_config.get_max_workers()) as pool:
        results = list(pool.map(run, range(starts)))
    if k <= 3:
        grid = _sphere_grid(k, int(workbench_config.get("rigidity", "simplex_grid")) * 4)
        for x in grid:
            results.append((float(min(x @ q @ x for q in forms)), x))

    best_val, best_x = results[0]
    for val, x in results[1:]:
        if val > best_val:
            best_val, best_x = val, x
    infeasible = best_val <= workbench_config.tol("infeasible")
    print(f"[RIGIDITY] system check: max-min {best_val:.3e} over {starts} starts "
          f"-> {'infeasible' if infeasible else 'feasible'}", flush=True)
    return infeasible, best_val, best_x


def simplex_weights(k: int, count: int = None) -> np.ndarray:
    """Deterministic weights on the (k−1)-simplex: a lattice for k ≤ 3, seeded Dirichlet otherwise."""
    count = int(workbench_config.get("rigidity", "simplex_grid") if count is None else count)
    if k == 1:
        return np.ones((1, 1))
    if k == 2:
        a = np.linspace(0.0, 1.0, count)
        return np.column_stack([a, 1.0 - a])
    if k == 3:
        n = 1
        while (n + 1) * (n + 2) // 2 < count:
            n += 1
        pts = [(i / n, j / n, (n - i - j) / n) for i in range(n + 1) for j in range(n + 1 - i)]
        return np.array(pts)
    rng = np.random.default_rng(workbench_config.get_seed())
    return rng.dirichlet(np.ones(k), size=count)


def best_convex_combination(forms: Sequence[np.ndarray], count: int = None) -> Tuple[bool, float]:
    """(some grid combination is negative definite, smallest normalized max eigenvalue found)."""
    best = math.inf
    for w in simplex_weights(len(forms), count):
        q = sum(wi * qi for wi, qi in zip(w, forms))
        norm = float(np.linalg.norm(q))
        if norm == 0:
            continue
        top = float(linalg.eigh(q, eigvals_only=True)[-1]) / norm
        best = min(best, top)
    return best < -workbench_config.tol("negative_definite"), best


# ───────── report ───────────────────────────────────────────────────────────
@dataclass
class RigidityCertificate:
    family: str
    active: List[Pair]
    verdict: Verdict
    reason: str = ""
    dependencies: List[ConvexDependence] = field(default_factory=list)
    cone_dim: int = 0
    dim_null: int = 0
    dim_e: int = 0
    rotations_removed: int = 0
    max_eigenvalues: List[float] = field(default_factory=list)
    max_min: Optional[float] = None
    starts: int = 0
    witness: Optional[List[float]] = None
    best_combination: Optional[float] = None
    first_order: bool = False
    comparison: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "family": self.family,
            "verdict": self.verdict.value,
            "reason": self.reason,
            "active_pairs": [list(p) for p in self.active],
            "dependencies": [d.to_dict() for d in self.dependencies],
            "cone_dim": self.cone_dim,
            "dim_null": self.dim_null,
            "dim_E": self.dim_e,
            "rotations_removed": self.rotations_removed,
            "max_eigenvalues": self.max_eigenvalues,
            "max_min": self.max_min,
            "starts": self.starts,
            "witness": self.witness,
            "best_convex_combination": self.best_combination,
            "first_order": self.first_order,
            "comparison": self.comparison,
            "seed": workbench_config.get_seed(),
        }


def _certify(c: CylinderConfig, family: Family, starts: Optional[int]) -> RigidityCertificate:
    family = Family(family)
    active = active_constraints(c)
    cert = RigidityCertificate(family.value, active, Verdict.INCONCLUSIVE)
    if not active:
        cert.reason = "no active constraints"
        return cert
    parallel = parallel_pairs(c, active)
    if parallel:
        cert.reason = f"active pairs with parallel generatrices {parallel}: distance not differentiable"
        return cert

    chart = Chart(c)
    grads = constraint_gradients(chart, active, family)
    deps = convex_dependencies(grads)
    cert.dependencies = deps
    cert.cone_dim = cone_dimension(deps)
    if not deps:
        cert.reason = "active gradients admit no convex dependence (not critical)"
        return cert

    kernel = kernel_subspace(grads, chart)
    cert.dim_null, cert.dim_e, cert.rotations_removed = kernel.dim_null, kernel.dim, kernel.rotations_removed
    if kernel.dim == 0:
        # a direction that decreases no supported g_a lies in their common kernel
        support = sorted({int(a) for d in deps for a in np.flatnonzero(d.weights > 1e-12)})
        if kernel_subspace(grads[support], chart).dim == 0:
            cert.verdict = Verdict.NEGATIVE_DEFINITE
            cert.first_order = True
            cert.reason = "E is trivial and the dependence support spans the chart modulo rotations: first-order strict maximum"
        else:
            cert.reason = "E is trivial but the dependence support leaves free directions: no second-order test to run"
        return cert

    forms = restricted_hessian_forms(chart, active, deps, kernel.basis, family)
    for q in forms:
        nd, top = check_negative_definite(q)
        cert.max_eigenvalues.append(top)
        if nd:
            cert.verdict = Verdict.NEGATIVE_DEFINITE
            cert.reason = "a dependence-weighted second differential is negative definite on E"
    if cert.verdict is Verdict.NEGATIVE_DEFINITE:
        return cert

    if len(forms) > 1:
        _, cert.best_combination = best_convex_combination(forms)
    infeasible, value, witness = check_system_infeasible(forms, starts)
    cert.max_min = value
    cert.starts = int(workbench_config.get("rigidity", "infeasible_starts") if starts is None else starts)
    cert.witness = [float(v) for v in witness]
    if infeasible:
        cert.verdict = Verdict.SYSTEM_INFEASIBLE
        cert.reason = "the system q_i(x) > 0 has no solution on E"
    else:
        cert.reason = "no negative-definite form and the quadratic system is feasible"
    return cert


def rigidity_report(c: CylinderConfig, family: Family = Family.PAIRWISE_RADIUS,
                    compare: bool = True, starts: int = None) -> RigidityCertificate:
    """Full pipeline; with compare=True the other constraint family is run and summarized too."""
    cert = _certify(c, family, starts)
    print(f"[RIGIDITY] {cert.family}: {cert.verdict.value} ({cert.reason}); "
          f"active={len(cert.active)} cone={cert.cone_dim} dimE={cert.dim_e}", flush=True)
    if compare:
        other = Family.GENERATRIX_DISTANCE if Family(family) is Family.PAIRWISE_RADIUS else Family.PAIRWISE_RADIUS
        alt = _certify(c, other, starts)
        cert.comparison = {
            "family": alt.family,
            "verdict": alt.verdict.value,
            "same_active_set": alt.active == cert.active,
            "cone_dim": alt.cone_dim,
            "dim_E": alt.dim_e,
        }
        print(f"[RIGIDITY] {alt.family}: {alt.verdict.value}; agrees={alt.verdict == cert.verdict}", flush=True)
    return cert

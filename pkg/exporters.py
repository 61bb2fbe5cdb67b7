"""
Export helpers for the workbench.
Handles CSV tables, JSON reports and configuration files, and OBJ meshes
(cylinders as truncated prisms, balls and the central sphere as icospheres).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import ConvexHull

import workbench_config
from balls import BallCluster
from cylinders import CylinderConfig, common_radius, is_unbounded
from geom3 import TangentLine, platonic_vertices

PathLike = Union[str, Path]
Mesh = Tuple[np.ndarray, List[Tuple[int, ...]]]


# ───────── number formatting ────────────────────────────────────────────────
def fmt(value: Any, digits: int = None) -> str:
    """Canonical text for a number: 12 significant digits, no negative zero."""
    digits = int(workbench_config.get("export", "csv_digits") if digits is None else digits)
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isinf(v):
            return "unbounded" if v > 0 else "-unbounded"
        if v == 0.0:
            v = 0.0
        return f"{v:.{digits}g}"
    return str(value)


def canonical_lines(config: CylinderConfig) -> List[str]:
    """One formatted row per generatrix: ux uy uz tx ty tz."""
    return [" ".join(fmt(float(v)) for v in np.concatenate([g.u, g.t])) for g in config.generatrices]


# ───────── CSV ──────────────────────────────────────────────────────────────
def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt(v) for v in row) + "\n")
            count += 1
    print(f"[EXPORT] Wrote {count} rows to {path}", flush=True)
    return path


def read_csv(path: PathLike) -> Tuple[List[str], List[List[str]]]:
    with Path(path).open("r", encoding="utf-8") as f:
        lines = [line.strip() for line in f if line.strip()]
    if not lines:
        raise ValueError(f"{path} is empty")
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


# ───────── JSON ─────────────────────────────────────────────────────────────
def _jsonable(obj: Any) -> Any:
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "unbounded" if v > 0 else "-unbounded"
        if math.isnan(v):
            return None
        return v
    return obj


def write_json(path: PathLike, data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump(_jsonable(data), f, indent=2)
    print(f"[EXPORT] Wrote {path}", flush=True)
    return path


def config_to_dict(obj: Union[CylinderConfig, BallCluster]) -> Dict[str, Any]:
    if isinstance(obj, CylinderConfig):
        return {
            "kind": "cylinders",
            "tangent_points": obj.points().tolist(),
            "directions": obj.directions().tolist(),
        }
    if isinstance(obj, BallCluster):
        return {"kind": "balls", "directions": np.array(obj.directions).tolist(), "radius": obj.radius}
    raise ValueError(f"Cannot serialize {type(obj).__name__}")


def save_config_file(path: PathLike, obj: Union[CylinderConfig, BallCluster]) -> Path:
    return write_json(path, config_to_dict(obj))


def _vectors(data: Dict[str, Any], key: str) -> np.ndarray:
    raw = data.get(key)
    if not isinstance(raw, list) or not raw:
        raise ValueError(f"'{key}' must be a nonempty list of [x, y, z]")
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as e:
        raise ValueError(f"'{key}' is not numeric: {e}") from e
    if arr.ndim != 2 or arr.shape[1] != 3 or not np.all(np.isfinite(arr)):
        raise ValueError(f"'{key}' must hold finite 3-vectors, got shape {arr.shape}")
    norms = np.linalg.norm(arr, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > 1e-6)
    if bad.size:
        raise ValueError(f"'{key}'[{int(bad[0])}] is not unit length (|v|={norms[bad[0]]!r})")
    return arr / norms[:, None]


def config_from_dict(data: Dict[str, Any]) -> Union[CylinderConfig, BallCluster]:
    """Validate and normalize a configuration document."""
    if not isinstance(data, dict):
        raise ValueError("Configuration must be a JSON object")
    kind = data.get("kind")
    if kind == "cylinders":
        points = _vectors(data, "tangent_points")
        directions = np.array(data.get("directions") or [], dtype=float)
        if directions.shape != points.shape:
            raise ValueError(f"tangent_points and directions differ in shape: {points.shape} vs {directions.shape}")
        lines = []
        for k, (u, t) in enumerate(zip(points, directions)):
            norm_t = float(np.linalg.norm(t))
            if abs(norm_t - 1.0) > 1e-6:
                raise ValueError(f"'directions'[{k}] is not unit length (|v|={norm_t!r})")
            projected = t - np.dot(t, u) * u
            if float(np.linalg.norm(projected)) < 1e-6:
                raise ValueError(f"'directions'[{k}] is (nearly) radial; cannot project to the tangent plane")
            lines.append(TangentLine.from_vectors(u, projected))
        return CylinderConfig(tuple(lines))
    if kind == "balls":
        directions = _vectors(data, "directions")
        radius = data.get("radius", 1.0)
        if not isinstance(radius, (int, float)) or not radius > 0:
            raise ValueError(f"'radius' must be a positive number, got {radius!r}")
        return BallCluster(tuple(directions), float(radius))
    raise ValueError(f"Unknown configuration kind {kind!r} (expected 'cylinders' or 'balls')")


def load_config_file(path: PathLike) -> Union[CylinderConfig, BallCluster]:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ValueError(f"{path} is not valid JSON: {e}") from e
    return config_from_dict(data)


# ───────── meshes ───────────────────────────────────────────────────────────
def icosphere(subdivisions: int = None) -> Mesh:
    """Unit icosphere: icosahedron faces split in four `subdivisions` times."""
    subdivisions = int(workbench_config.get("export", "icosphere_subdivisions")
                       if subdivisions is None else subdivisions)
    verts = [np.array(v) for v in platonic_vertices("icosahedron")]
    faces = []
    for tri in ConvexHull(np.array(verts)).simplices:
        a, b, c = (int(i) for i in tri)
        normal = np.cross(verts[b] - verts[a], verts[c] - verts[a])
        faces.append((a, b, c) if np.dot(normal, verts[a]) > 0 else (a, c, b))

    for _ in range(subdivisions):
        cache: Dict[Tuple[int, int], int] = {}

        def midpoint(i: int, j: int) -> int:
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        split = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            split += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        faces = split
    return np.array(verts), faces


def cylinder_prism(g: TangentLine, radius: float, sides: int = None, half_length: float = None) -> Mesh:
    """Prism around the axis at `radius`, truncated to ±half_length about the tangent point."""
    export = workbench_config.get("export")
    sides = int(export["polygon_sides"] if sides is None else sides)
    half_length = float(export["half_length"] if half_length is None else half_length)
    center = (1.0 + radius) * g.u
    e1, e2 = g.u, np.cross(g.t, g.u)
    ring = [radius * (math.cos(a) * e1 + math.sin(a) * e2)
            for a in np.linspace(0.0, 2 * math.pi, sides, endpoint=False)]
    bottom = [center - half_length * g.t + p for p in ring]
    top = [center + half_length * g.t + p for p in ring]
    verts = np.array(bottom + top)
    faces: List[Tuple[int, ...]] = []
    for k in range(sides):
        nxt = (k + 1) % sides
        faces.append((k, nxt, sides + nxt, sides + k))
    faces.append(tuple(reversed(range(sides))))
    faces.append(tuple(range(sides, 2 * sides)))
    return verts, faces


def scene_meshes(obj: Union[CylinderConfig, BallCluster]) -> List[Tuple[str, Mesh]]:
    meshes: List[Tuple[str, Mesh]] = [("unit_sphere", icosphere())]
    if isinstance(obj, CylinderConfig):
        radius = common_radius(obj)
        if is_unbounded(radius) or radius <= 0:
            raise ValueError(f"Cannot mesh cylinders with common radius {radius!r}")
        for k, g in enumerate(obj.generatrices):
            meshes.append((f"cylinder_{k}", cylinder_prism(g, radius)))
    else:
        verts, faces = icosphere()
        for k, c in enumerate(obj.centers()):
            meshes.append((f"ball_{k}", (c + obj.radius * verts, faces)))
    return meshes


def write_obj(path: PathLike, meshes: Sequence[Tuple[str, Mesh]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    offset = 1
    with path.open("w", encoding="utf-8") as f:
        f.write("# cylinder workbench export\n")
        for name, (verts, faces) in meshes:
            f.write(f"o {name}\n")
            for x, y, z in verts:
                f.write(f"v {x:.9f} {y:.9f} {z:.9f}\n")
            for face in faces:
                f.write("f " + " ".join(str(i + offset) for i in face) + "\n")
            offset += len(verts)
    print(f"[EXPORT] Wrote {len(meshes)} objects to {path}", flush=True)
    return path


def read_obj(path: PathLike) -> Dict[str, Dict[str, int]]:
    """Object name -> vertex and face counts. Raises ValueError on malformed input."""
    objects: Dict[str, Dict[str, int]] = {}
    current = None
    total_verts = 0
    with Path(path).open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "o":
                current = parts[1] if len(parts) > 1 else f"object_{len(objects)}"
                objects[current] = {"vertices": 0, "faces": 0}
            elif parts[0] == "v":
                if current is None or len(parts) != 4:
                    raise ValueError(f"{path}:{lineno}: bad vertex line")
                [float(p) for p in parts[1:]]
                objects[current]["vertices"] += 1
                total_verts += 1
            elif parts[0] == "f":
                if current is None or len(parts) < 4:
                    raise ValueError(f"{path}:{lineno}: bad face line")
                idx = [int(p.split("/")[0]) for p in parts[1:]]
                if min(idx) < 1 or max(idx) > total_verts:
                    raise ValueError(f"{path}:{lineno}: face index out of range")
                objects[current]["faces"] += 1
    return objects

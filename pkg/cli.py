#!/usr/bin/env python
"""
cli.py – command line for the cylinder workbench
• constants: reproduce every headline number with its target and deviation
• balls / cyl / sweep / rigidity / cex: verification runs and sweeps
• export: OBJ meshes and JSON configuration files
• config: show the active settings, persist a seed
Exit codes: 0 success, 2 verification FAIL, 1 usage / IO / schema error.
"""

import argparse
import copy
import logging
import math
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

import balls
import cex
import cylinders
import exporters
import platonic_sweep
import rigidity
import unlockd3
import workbench_config

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAIL = 2


def _sweep_optimum(pair: str) -> cylinders.CylinderConfig:
    return platonic_sweep.delta_config(pair, platonic_sweep.maximize(pair).delta)


CYLINDER_BUILTINS: Dict[str, Callable[[], cylinders.CylinderConfig]] = {
    "c6": cylinders.c6_config,
    "o6": cylinders.o6_config,
    "cm": lambda: unlockd3.find_cm().config,
    "oc": lambda: _sweep_optimum("oc"),
    "id": lambda: _sweep_optimum("id"),
}
BALL_BUILTINS: Dict[str, Callable[[], balls.BallCluster]] = {
    "fcc": balls.fcc_config,
    "hcp": balls.hcp_config,
    "icosahedron": balls.icosahedron_config,
}

BLOWUP_CLOSED_FORM = 1.0 / (math.sqrt((5.0 + math.sqrt(5.0)) / 2.0) - 1.0)
OC_DELTA = math.atan(3.0 ** 0.25 / math.sqrt(2.0))
OC_RADIUS = (math.sqrt(3.0) - 1.0) / (1.0 + 2.0 * math.sqrt(2.0) - math.sqrt(3.0))


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; this CLI reserves 2 for FAIL."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ───────── util ─────────────────────────────────────────────────────────────
def _load(args) -> Union[cylinders.CylinderConfig, balls.BallCluster]:
    if getattr(args, "input", None):
        return exporters.load_config_file(args.input)
    name = (args.builtin or "").lower()
    if name in CYLINDER_BUILTINS:
        return CYLINDER_BUILTINS[name]()
    if name in BALL_BUILTINS:
        return BALL_BUILTINS[name]()
    raise UsageError(f"Unknown builtin '{args.builtin}'. Supported: "
                     f"{', '.join(list(CYLINDER_BUILTINS) + list(BALL_BUILTINS))}")


def _load_cylinders(args) -> cylinders.CylinderConfig:
    config = _load(args)
    if not isinstance(config, cylinders.CylinderConfig):
        raise ValueError("This command needs a cylinder configuration")
    return config


def _report(args, started: float, values: Dict, verdict: str) -> Dict:
    report = {
        "command": " ".join(sys.argv[1:]) or args.command,
        "inputs": {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k != "func"},
        "values": values,
        "verdict": verdict,
        "seed": workbench_config.get_seed(),
        "elapsed_seconds": round(time.perf_counter() - started, 3),
    }
    out = getattr(args, "report", None)
    if out:
        exporters.write_json(out, report)
    return report


def _exit_for(verdict: str) -> int:
    return EXIT_OK if verdict == "PASS" else EXIT_FAIL


# ───────── constants ────────────────────────────────────────────────────────
def _row(rows: List[Dict], name: str, computed: float, target: float, tolerance: float):
    deviation = computed - target
    ok = abs(deviation) < tolerance
    rows.append({"name": name, "computed": computed, "target": target,
                 "deviation": deviation, "tolerance": tolerance, "ok": ok})
    mark = "ok " if ok else "BAD"
    print(f"[CLI] {mark} {name:<22} {computed:.13f}  target {target:.13f}  Δ={deviation:+.3e}", flush=True)


def cmd_constants(args) -> int:
    started = time.perf_counter()
    rows: List[Dict] = []

    ico = balls.blowup("icosahedron")
    _row(rows, "blowup radius", ico.radius, 1.10851, 1e-5)
    _row(rows, "blowup closed form", ico.radius, BLOWUP_CLOSED_FORM, 1e-10)
    _row(rows, "blowup kissing", float(ico.kissing), 30.0, 0.5)

    tt = platonic_sweep.maximize("tt")
    _row(rows, "TT delta*", tt.delta, math.pi / 4, 1e-8)
    _row(rows, "TT r*", tt.radius, 1.0, 1e-8)
    oc = platonic_sweep.maximize("oc")
    _row(rows, "OC delta*", oc.delta, OC_DELTA, 1e-8)
    _row(rows, "OC r*", oc.radius, OC_RADIUS, 1e-8)

    t0 = platonic_sweep.find_t0()
    _row(rows, "t0", t0, 0.694356, 1e-6)

    if not args.quick:
        id_ = platonic_sweep.maximize("id")
        _row(rows, "ID delta*", id_.delta, 0.694707, 1e-5)
        _row(rows, "ID r*", id_.radius, 0.115558, 1e-5)
        _row(rows, "tan^2(ID delta*)", math.tan(id_.delta) ** 2, t0, 1e-6)

        cm = unlockd3.find_cm()
        _row(rows, "r_m", cm.radius, unlockd3.R_M, 1e-9)
        beats = cm.radius > unlockd3.FIRSCHING_RADIUS
        rows.append({"name": "r_m > Firsching", "computed": cm.radius,
                     "target": unlockd3.FIRSCHING_RADIUS, "ok": beats})
        print(f"[CLI] {'ok ' if beats else 'BAD'} r_m beats {unlockd3.FIRSCHING_RADIUS}: {beats}", flush=True)

    verdict = "PASS" if all(r["ok"] for r in rows) else "FAIL"
    print(f"[CLI] constants: {verdict}", flush=True)
    _report(args, started, {"rows": rows}, verdict)
    return _exit_for(verdict)


# ───────── balls ────────────────────────────────────────────────────────────
def cmd_verify_balls(args) -> int:
    started = time.perf_counter()
    result = balls.verify_unlock(balls.get_move(args.cluster), args.tmax, args.steps)
    _report(args, started, result.to_dict(), result.verdict)
    return _exit_for(result.verdict)


def cmd_balls_blowup(args) -> int:
    started = time.perf_counter()
    result = balls.blowup(args.solid)
    print(f"[CLI] {result.solid}: n={result.n} rho={result.radius:.12f} kissing={result.kissing}", flush=True)
    _report(args, started, {"solid": result.solid, "n": result.n,
                            "radius": result.radius, "kissing": result.kissing}, "PASS")
    return EXIT_OK


def cmd_balls_trajectory(args) -> int:
    rows = balls.move_trajectory(balls.get_move(args.cluster), args.tmax, args.steps)
    exporters.write_csv(args.out, ("t", "ball", "x", "y", "z"), rows)
    return EXIT_OK


# ───────── cylinders ────────────────────────────────────────────────────────
def cmd_cyl_radius(args) -> int:
    started = time.perf_counter()
    config = _load_cylinders(args)
    r = cylinders.common_radius(config)
    graph = cylinders.contact_graph(config)
    degrees = graph.degrees()
    print(f"[CLI] n={config.n} r={exporters.fmt(r)} contacts={len(graph)} degrees={degrees}", flush=True)
    values = {"n": config.n, "radius": r, "contacts": len(graph),
              "pairs": [list(p) for p in graph.pairs], "degrees": degrees}
    verdict = "PASS"
    if (args.builtin or "").lower() == "cm":
        record = unlockd3.cm_report()
        values["record"] = record
        print(f"[CLI] r_m deviation {record['deviation']:+.3e}, contact types {record['contact_types']}", flush=True)
        if not record["beats_firsching"]:
            verdict = "FAIL"
    _report(args, started, values, verdict)
    return _exit_for(verdict)


def cmd_cyl_gamma(args) -> int:
    points = unlockd3.gamma_curve(args.phi_steps)
    exporters.write_csv(args.out, ("phi", "kappa", "delta", "r"),
                        [(g.phi, g.kappa_star, g.delta_star, g.r_star) for g in points])
    return EXIT_OK


def cmd_cyl_geodetic(args) -> int:
    started = time.perf_counter()
    config = _load_cylinders(args)
    scan = cylinders.pure_geodetic_scan(config, qmax=args.qmax)
    for group, hits in scan.items():
        print(f"[CLI] {group}: {len(hits)} pure geodetic", flush=True)
    _report(args, started, scan, "PASS")
    return EXIT_OK


# ───────── sweep ────────────────────────────────────────────────────────────
def cmd_sweep(args) -> int:
    curve = platonic_sweep.radius_curve(args.pair, args.samples)
    k = curve.argmax()
    print(f"[CLI] {curve.pair}: max r={curve.samples[k][1]:.12f} at delta={curve.samples[k][0]:.12f}", flush=True)
    if args.out:
        exporters.write_csv(args.out, ("delta", "r"), curve.samples)
    return EXIT_OK


def cmd_sweep_maximize(args) -> int:
    started = time.perf_counter()
    profile = platonic_sweep.contact_profile(args.pair)
    print(f"[CLI] {profile['pair']}: delta*={profile['delta']:.12f} r*={profile['radius']:.12f} "
          f"contacts={profile['contacts']} degrees={profile['degrees']}", flush=True)
    _report(args, started, profile, "PASS")
    return EXIT_OK


def cmd_sweep_zeros(args) -> int:
    started = time.perf_counter()
    zeros = platonic_sweep.id_zeros()
    rows = []
    for z in zeros:
        shapes = platonic_sweep.tetrahedra_check(z)
        print(f"[CLI] zero at delta={z.delta:.12f}: profile {z.components}, "
              f"{shapes['tetrahedra']} tetrahedra, {shapes['triangles']} triangles, "
              f"{shapes['planar_stars']} planar stars", flush=True)
        rows.append({**z.to_dict(), "shapes": shapes})
    _report(args, started, {"zeros": rows}, "PASS")
    return EXIT_OK


def cmd_sweep_dual_check(args) -> int:
    started = time.perf_counter()
    gap = platonic_sweep.dual_shift_check(args.pair, args.delta)
    verdict = "PASS" if gap < workbench_config.tol("line_equal") else "FAIL"
    _report(args, started, {"pair": args.pair, "delta": args.delta, "set_distance": gap}, verdict)
    return _exit_for(verdict)


# ───────── rigidity ─────────────────────────────────────────────────────────
def cmd_rigidity(args) -> int:
    config = _load_cylinders(args)
    family = rigidity.Family.PAIRWISE_RADIUS if args.family == "radius" else rigidity.Family.GENERATRIX_DISTANCE
    cert = rigidity.rigidity_report(config, family, starts=args.starts)
    if args.out:
        exporters.write_json(args.out, cert.to_dict())
    return EXIT_FAIL if cert.verdict is rigidity.Verdict.INCONCLUSIVE else EXIT_OK


# ───────── cex ──────────────────────────────────────────────────────────────
def cmd_cex(args) -> int:
    started = time.perf_counter()
    paths = cex.random_paths(args.paths, args.degree)
    path_report = cex.probe_analytic_paths(paths)
    beak_report = cex.probe_beak()
    ok = path_report.verdict == "PASS" and beak_report.verdict == "PASS" and beak_report.min_positive_distance < 1e-3
    verdict = "PASS" if ok else "FAIL"
    print(f"[CLI] cex: paths {path_report.verdict}, beak {beak_report.verdict} "
          f"(closest Phi > 0 at {beak_report.min_positive_distance:.3e}); {verdict}", flush=True)
    _report(args, started, {"paths": path_report.to_dict(), "beak": beak_report.to_dict()}, verdict)
    return _exit_for(verdict)


# ───────── export ───────────────────────────────────────────────────────────
def cmd_export(args) -> int:
    config = _load(args)
    if args.format == "obj":
        exporters.write_obj(args.out, exporters.scene_meshes(config))
    else:
        exporters.save_config_file(args.out, config)
    return EXIT_OK


# ───────── config ───────────────────────────────────────────────────────────
def cmd_config(args) -> int:
    if args.set_seed is not None:
        config = copy.deepcopy(workbench_config.load_config())
        config["seed"] = int(args.set_seed)
        workbench_config.save_config(config)
    print(workbench_config.get_status(), flush=True)
    return EXIT_OK


# ───────── CLI ──────────────────────────────────────────────────────────────
def _source_args(parser: argparse.ArgumentParser, builtins: List[str], required: bool = True):
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--builtin", choices=builtins, help="Builtin configuration")
    group.add_argument("--input", type=Path, help="JSON configuration file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cli.py", description="Cylinder and ball kissing workbench")
    parser.add_argument("--seed", type=int, default=None, help="Seed for every stochastic search (default: config, 0)")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("constants", help="Reproduce the headline constants")
    p.add_argument("--quick", action="store_true", help="Skip the r_m and I/D rows")
    p.add_argument("--report", type=Path, help="Write the run report as JSON")
    p.set_defaults(func=cmd_constants)

    # balls
    p_balls = sub.add_parser("balls", help="Twelve-ball clusters")
    balls_sub = p_balls.add_subparsers(dest="action", parser_class=_Parser)
    balls_sub.required = True
    for name, func, help_ in (("verify", cmd_verify_balls, "Verify an unlocking move"),
                              ("trajectory", cmd_balls_trajectory, "Write move trajectories as CSV")):
        q = balls_sub.add_parser(name, help=help_)
        q.add_argument("--cluster", default="fcc", choices=sorted(balls.MOVES))
        q.add_argument("--tmax", type=float, default=None)
        q.add_argument("--steps", type=int, default=None)
        if name == "trajectory":
            q.add_argument("--out", type=Path, required=True)
        else:
            q.add_argument("--report", type=Path)
        q.set_defaults(func=func)
    q = balls_sub.add_parser("blowup", help="Maximal common radius for a vertex set")
    q.add_argument("--solid", default="icosahedron", choices=balls.BLOWUP_SOLIDS)
    q.add_argument("--report", type=Path)
    q.set_defaults(func=cmd_balls_blowup)

    # cyl
    p_cyl = sub.add_parser("cyl", help="Cylinder configurations")
    cyl_sub = p_cyl.add_subparsers(dest="action", parser_class=_Parser)
    cyl_sub.required = True
    q = cyl_sub.add_parser("radius", help="Common radius and contact graph")
    _source_args(q, list(CYLINDER_BUILTINS))
    q.add_argument("--report", type=Path)
    q.set_defaults(func=cmd_cyl_radius)
    q = cyl_sub.add_parser("gamma", help="Sample the best-radius curve of the D3 family")
    q.add_argument("--phi-steps", dest="phi_steps", type=int, default=None)
    q.add_argument("--out", type=Path, required=True)
    q.set_defaults(func=cmd_cyl_gamma)
    q = cyl_sub.add_parser("geodetic", help="Pure geodetic angle scan")
    _source_args(q, list(CYLINDER_BUILTINS))
    q.add_argument("--qmax", type=int, default=64)
    q.add_argument("--report", type=Path)
    q.set_defaults(func=cmd_cyl_geodetic)

    # sweep
    p_sweep = sub.add_parser("sweep", help="Delta-process over the Platonic dual pairs")
    p_sweep.add_argument("--pair", default="id", choices=["tt", "oc", "id"])
    p_sweep.add_argument("--samples", type=int, default=None)
    p_sweep.add_argument("--out", type=Path)
    p_sweep.set_defaults(func=cmd_sweep)
    sweep_sub = p_sweep.add_subparsers(dest="action", parser_class=_Parser)
    q = sweep_sub.add_parser("maximize", help="Locate the maximal radius")
    q.add_argument("--pair", default=argparse.SUPPRESS, choices=["tt", "oc", "id"])
    q.add_argument("--report", type=Path)
    q.set_defaults(func=cmd_sweep_maximize)
    q = sweep_sub.add_parser("zeros", help="Interior zeros of the I/D radius curve")
    q.add_argument("--report", type=Path)
    q.set_defaults(func=cmd_sweep_zeros)
    q = sweep_sub.add_parser("dual-check", help="Dual process at delta equals base process at delta + pi/2")
    q.add_argument("--pair", default=argparse.SUPPRESS, choices=["tt", "oc", "id"])
    q.add_argument("--delta", type=float, default=0.3)
    q.add_argument("--report", type=Path)
    q.set_defaults(func=cmd_sweep_dual_check)

    # rigidity
    q = sub.add_parser("rigidity", help="Second-order rigidity certificate")
    _source_args(q, list(CYLINDER_BUILTINS))
    q.add_argument("--family", default="radius", choices=["radius", "distance"])
    q.add_argument("--starts", type=int, default=None)
    q.add_argument("--out", type=Path)
    q.set_defaults(func=cmd_rigidity)

    # cex
    p_cex = sub.add_parser("cex", help="Smooth flat-on-analytic-paths counterexample")
    cex_sub = p_cex.add_subparsers(dest="action", parser_class=_Parser)
    cex_sub.required = True
    q = cex_sub.add_parser("probe", help="Probe analytic paths and the beak")
    q.add_argument("--paths", type=int, default=None)
    q.add_argument("--degree", type=int, default=None)
    q.add_argument("--report", type=Path)
    q.set_defaults(func=cmd_cex)

    # export
    q = sub.add_parser("export", help="Write OBJ meshes or JSON configuration files")
    _source_args(q, list(CYLINDER_BUILTINS) + list(BALL_BUILTINS))
    q.add_argument("--format", default="obj", choices=["obj", "json"])
    q.add_argument("--out", type=Path, required=True)
    q.set_defaults(func=cmd_export)

    # config
    q = sub.add_parser("config", help="Show the active settings, optionally persisting a new seed")
    q.add_argument("--set-seed", dest="set_seed", type=int, default=None)
    q.set_defaults(func=cmd_config)
    return parser


def _fill_defaults(args):
    cfg = workbench_config.get("cex")
    if getattr(args, "func", None) is cmd_cex:
        args.paths = int(cfg["paths"]) if args.paths is None else args.paths
        args.degree = int(cfg["degree"]) if args.degree is None else args.degree


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="CLI | %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.seed is not None:
            workbench_config.set_seed(args.seed)
        _fill_defaults(args)
        return args.func(args)
    except SystemExit as e:
        # --help
        return EXIT_OK if not e.code else EXIT_ERROR
    except UsageError as e:
        print(f"[CLI] usage error: {e}", flush=True)
        parser.print_usage()
        return EXIT_ERROR
    except (ValueError, OSError) as e:
        print(f"[CLI] error: {e}", flush=True)
        return EXIT_ERROR
    except RuntimeError as e:
        logging.error("numerical failure: %s", e)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""
PRE-DEPLOYMENT SMOKE SUITE
Run this before every push; pytest covers the numerics, this covers wiring.

Usage: python test_before_deploy.py
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).parent

print("=" * 70)
print("PRE-DEPLOYMENT SMOKE SUITE")
print("=" * 70)

failed_tests = []

# ============================================================================
# TEST 1: Python Syntax Check
# ============================================================================
print("\n[TEST 1] Python Syntax Check...")
files_to_check = ["workbench_config.py", "geom3.py", "cylinders.py", "balls.py",
                  "platonic_sweep.py", "unlockd3.py", "rigidity.py", "cex.py",
                  "exporters.py", "cli.py"]

for file in files_to_check:
    try:
        result = subprocess.run(
            [sys.executable, "-m", "py_compile", str(ROOT / file)],
            capture_output=True,
            text=True,
            timeout=5
        )
        if result.returncode == 0:
            print(f"  [OK] {file} - syntax OK")
        else:
            print(f"  [FAIL] {file} - SYNTAX ERROR")
            print(f"    {result.stderr}")
            failed_tests.append(f"Syntax check: {file}")
    except Exception as e:
        print(f"  [FAIL] {file} - ERROR: {e}")
        failed_tests.append(f"Syntax check: {file}")

# ============================================================================
# TEST 2: Module Import Test (Sequential)
# ============================================================================
print("\n[TEST 2] Module Import Test...")

modules_to_test = [
    ("geom3", "from geom3 import TangentLine, solid_generators"),
    ("cylinders", "from cylinders import common_radius, c6_config, o6_config"),
    ("balls", "from balls import verify_unlock, blowup"),
    ("platonic_sweep", "from platonic_sweep import radius_curve, maximize"),
    ("unlockd3", "from unlockd3 import d3_family, find_cm"),
    ("rigidity", "from rigidity import rigidity_report"),
    ("cex", "from cex import probe_analytic_paths, probe_beak"),
    ("cli", "import cli"),
]

for name, import_stmt in modules_to_test:
    try:
        print(f"  Testing {name}...", end=" ")
        sys.stdout.flush()

        result = subprocess.run(
            [sys.executable, "-c", import_stmt],
            capture_output=True,
            text=True,
            timeout=30,
            cwd=ROOT
        )

        if result.returncode == 0:
            print("[OK]")
        else:
            print("[FAIL]")
            print(f"    Error: {result.stderr[:200]}")
            failed_tests.append(f"Import: {name}")
    except subprocess.TimeoutExpired:
        print("[FAIL] TIMEOUT (likely circular import)")
        failed_tests.append(f"Import timeout: {name}")
    except Exception as e:
        print(f"[FAIL] {e}")
        failed_tests.append(f"Import: {name}")

# ============================================================================
# TEST 3: CLI Smoke Runs
# ============================================================================
print("\n[TEST 3] CLI Smoke Runs...")

with tempfile.TemporaryDirectory() as tmp:
    smoke_runs = [
        ("constants --quick", ["constants", "--quick"], 0),
        ("balls verify fcc", ["balls", "verify", "--cluster", "fcc", "--steps", "32"], 0),
        ("balls verify fcc_wrong", ["balls", "verify", "--cluster", "fcc_wrong", "--steps", "32"], 2),
        ("export o6 obj", ["export", "--builtin", "o6", "--out", str(Path(tmp) / "o6.obj")], 0),
        ("bad usage", ["nonsense"], 1),
    ]
    for name, argv, expected in smoke_runs:
        try:
            print(f"  Running {name}...", end=" ")
            sys.stdout.flush()
            result = subprocess.run(
                [sys.executable, "cli.py"] + argv,
                capture_output=True,
                text=True,
                timeout=300,
                cwd=ROOT
            )
            if result.returncode == expected:
                print("[OK]")
            else:
                print(f"[FAIL] exit {result.returncode}, expected {expected}")
                print(f"    stdout: {result.stdout[-200:]}")
                print(f"    stderr: {result.stderr[-200:]}")
                failed_tests.append(f"CLI: {name}")
        except subprocess.TimeoutExpired:
            print("[FAIL] TIMEOUT")
            failed_tests.append(f"CLI timeout: {name}")
        except Exception as e:
            print(f"[FAIL] {e}")
            failed_tests.append(f"CLI: {name}")

# ============================================================================
# TEST 4: Critical Configuration Files
# ============================================================================
print("\n[TEST 4] Critical Configuration Files...")
print("  Checking workbench_config.json...", end=" ")
config_path = ROOT / "workbench_config.json"
if not config_path.exists():
    print("[FAIL]")
    failed_tests.append("workbench_config.json missing")
else:
    with open(config_path, "r", encoding="utf-8") as f:
        config = json.load(f)
    missing = [k for k in ("tolerances", "sweep", "balls", "rigidity", "cex", "export") if k not in config]
    if missing:
        print("[FAIL]")
        print(f"    Missing sections: {missing}")
        failed_tests.append("workbench_config.json sections")
    elif not isinstance(config.get("seed"), int):
        print("[FAIL]")
        print(f"    seed must be an integer, got {config.get('seed')!r}")
        failed_tests.append("workbench_config.json seed")
    else:
        print("[OK]")

# ============================================================================
# RESULTS
# ============================================================================
print("\n" + "=" * 70)

if failed_tests:
    print("[FAIL] SMOKE TESTS FAILED - DO NOT DEPLOY!")
    print("=" * 70)
    print("\nFailed tests:")
    for i, test in enumerate(failed_tests, 1):
        print(f"  {i}. {test}")
    print("\n" + "=" * 70)
    sys.exit(1)
else:
    print("[PASS] ALL SMOKE TESTS PASSED - SAFE TO DEPLOY")
    print("=" * 70)
    print("\nNext: pytest -m 'not slow'   (or plain pytest for the full run)")
    print("=" * 70)
    sys.exit(0)

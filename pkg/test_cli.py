import json

import pytest

import cli
import exporters


def test_balls_verify_exit_codes(tmp_path):
    report = tmp_path / "fcc.json"
    assert cli.main(["balls", "verify", "--cluster", "fcc", "--steps", "32", "--report", str(report)]) == cli.EXIT_OK
    data = json.loads(report.read_text(encoding="utf-8"))
    assert data["verdict"] == "PASS"
    assert "elapsed_seconds" in data and "seed" in data
    assert cli.main(["balls", "verify", "--cluster", "fcc_wrong", "--steps", "32"]) == cli.EXIT_FAIL


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["export", "--builtin", "o6"],
    ["cyl", "radius"],
    ["cyl", "radius", "--builtin", "c6", "--input", "x.json"],
    ["balls", "verify", "--cluster", "bcc"],
])
def test_bad_usage(argv):
    assert cli.main(argv) == cli.EXIT_ERROR


def test_help_exits_cleanly():
    assert cli.main(["--help"]) == cli.EXIT_OK


def test_export_obj(tmp_path):
    out = tmp_path / "o6.obj"
    assert cli.main(["export", "--builtin", "o6", "--format", "obj", "--out", str(out)]) == cli.EXIT_OK
    objects = exporters.read_obj(out)
    assert len(objects) == 7


def test_export_then_load(tmp_path):
    config = tmp_path / "c6.json"
    assert cli.main(["export", "--builtin", "c6", "--format", "json", "--out", str(config)]) == cli.EXIT_OK
    report = tmp_path / "radius.json"
    assert cli.main(["cyl", "radius", "--input", str(config), "--report", str(report)]) == cli.EXIT_OK
    values = json.loads(report.read_text(encoding="utf-8"))["values"]
    assert values["radius"] == pytest.approx(1.0)
    assert values["degrees"] == [2] * 6


def test_export_of_balls_cannot_feed_cylinder_commands(tmp_path):
    config = tmp_path / "fcc.json"
    assert cli.main(["export", "--builtin", "fcc", "--format", "json", "--out", str(config)]) == cli.EXIT_OK
    assert cli.main(["cyl", "radius", "--input", str(config)]) == cli.EXIT_ERROR


def test_malformed_input_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "cylinders", "tangent_points": [[2, 0, 0]], "directions": [[0, 0, 1]]}', encoding="utf-8")
    assert cli.main(["cyl", "radius", "--input", str(bad)]) == cli.EXIT_ERROR
    assert cli.main(["cyl", "radius", "--input", str(tmp_path / "missing.json")]) == cli.EXIT_ERROR


def test_sweep_csv(tmp_path):
    out = tmp_path / "tt.csv"
    assert cli.main(["sweep", "--pair", "tt", "--samples", "16", "--out", str(out)]) == cli.EXIT_OK
    header, rows = exporters.read_csv(out)
    assert header == ["delta", "r"]
    assert len(rows) == 16


def test_sweep_maximize_and_dual_check():
    assert cli.main(["sweep", "maximize", "--pair", "oc"]) == cli.EXIT_OK
    assert cli.main(["sweep", "dual-check", "--pair", "tt", "--delta", "0.4"]) == cli.EXIT_OK


def test_trajectory_csv(tmp_path):
    out = tmp_path / "traj.csv"
    assert cli.main(["balls", "trajectory", "--cluster", "hcp", "--steps", "4", "--out", str(out)]) == cli.EXIT_OK
    header, rows = exporters.read_csv(out)
    assert header == ["t", "ball", "x", "y", "z"]
    assert len(rows) == 5 * 12


def test_blowup():
    assert cli.main(["balls", "blowup", "--solid", "octahedron"]) == cli.EXIT_OK


def test_quick_constants(tmp_path):
    report = tmp_path / "constants.json"
    assert cli.main(["constants", "--quick", "--report", str(report)]) == cli.EXIT_OK
    rows = json.loads(report.read_text(encoding="utf-8"))["values"]["rows"]
    assert all(r["ok"] for r in rows)
    assert "r_m" not in {r["name"] for r in rows}


def test_cex_probe(tmp_config):
    assert cli.main(["--seed", "7", "cex", "probe", "--paths", "5"]) == cli.EXIT_OK


def test_rigidity_of_c6_is_inconclusive(tmp_path):
    out = tmp_path / "cert.json"
    assert cli.main(["rigidity", "--builtin", "c6", "--out", str(out)]) == cli.EXIT_FAIL
    assert json.loads(out.read_text(encoding="utf-8"))["verdict"] == "INCONCLUSIVE"


def test_oc_optimum_builtin(tmp_path):
    report = tmp_path / "oc.json"
    assert cli.main(["cyl", "radius", "--builtin", "oc", "--report", str(report)]) == cli.EXIT_OK
    values = json.loads(report.read_text(encoding="utf-8"))["values"]
    assert values["n"] == 12
    assert values["radius"] == pytest.approx(cli.OC_RADIUS, abs=1e-8)
    assert "record" not in values


def test_sweep_maximize_reports_contacts(tmp_path):
    report = tmp_path / "oc.json"
    assert cli.main(["sweep", "maximize", "--pair", "oc", "--report", str(report)]) == cli.EXIT_OK
    values = json.loads(report.read_text(encoding="utf-8"))["values"]
    assert values["pair"] == "OC"
    assert values["radius"] == pytest.approx(cli.OC_RADIUS, abs=1e-8)
    assert values["degrees"] == [4]


@pytest.mark.slow
def test_sweep_zeros_reports_shapes(tmp_path):
    report = tmp_path / "zeros.json"
    assert cli.main(["sweep", "zeros", "--report", str(report)]) == cli.EXIT_OK
    zeros = json.loads(report.read_text(encoding="utf-8"))["values"]["zeros"]
    assert len(zeros) == 3
    for z in zeros:
        assert z["shapes"]["delta"] == pytest.approx(z["delta"])
        assert {"tetrahedra", "triangles", "planar_stars", "groups"} <= set(z["shapes"])


@pytest.mark.slow
def test_record_builtin_carries_the_record_report(tmp_path):
    report = tmp_path / "cm.json"
    assert cli.main(["cyl", "radius", "--builtin", "cm", "--report", str(report)]) == cli.EXIT_OK
    record = json.loads(report.read_text(encoding="utf-8"))["values"]["record"]
    assert abs(record["deviation"]) < 1e-9
    assert record["beats_firsching"]


def test_config_command_persists_seed(tmp_config, capsys):
    assert cli.main(["config"]) == cli.EXIT_OK
    assert "seed: 0" in capsys.readouterr().out
    assert cli.main(["config", "--set-seed", "11"]) == cli.EXIT_OK
    assert json.loads(tmp_config.read_text(encoding="utf-8"))["seed"] == 11
    assert "seed: 11" in capsys.readouterr().out

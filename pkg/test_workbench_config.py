import json

import pytest

import workbench_config


def test_missing_file_writes_defaults(tmp_config):
    config = workbench_config.load_config()
    assert tmp_config.exists()
    assert config["seed"] == 0
    assert config["tolerances"]["kissing"] == 1e-9
    saved = json.loads(tmp_config.read_text(encoding="utf-8"))
    assert saved["export"]["polygon_sides"] == 32


def test_partial_file_is_merged_with_defaults(write_config):
    write_config({"seed": 7, "tolerances": {"kissing": 1e-6}})
    assert workbench_config.get_seed() == 7
    assert workbench_config.tol("kissing") == 1e-6
    assert workbench_config.tol("svd") == 1e-8
    assert workbench_config.get("sweep", "samples") == 512


def test_env_seed_override(write_config, monkeypatch):
    write_config({"seed": 3})
    monkeypatch.setenv("WORKBENCH_SEED", "11")
    assert workbench_config.get_seed() == 11


def test_bad_env_seed_is_ignored(write_config, monkeypatch):
    write_config({"seed": 3})
    monkeypatch.setenv("WORKBENCH_SEED", "eleven")
    assert workbench_config.get_seed() == 3


def test_set_seed_survives_reload(tmp_config):
    workbench_config.set_seed(42)
    workbench_config._cached_config = None
    assert workbench_config.get_seed() == 42


def test_invalid_json_raises(tmp_config):
    tmp_config.write_text("{not json", encoding="utf-8")
    with pytest.raises(ValueError):
        workbench_config.load_config()


@pytest.mark.parametrize("section,key", [("nope", None), ("tolerances", "nope")])
def test_unknown_keys_raise(tmp_config, section, key):
    with pytest.raises(ValueError):
        workbench_config.get(section, key)


def test_save_config_round_trip(tmp_config):
    config = workbench_config.load_config()
    config["max_workers"] = 2
    workbench_config.save_config(config)
    workbench_config._cached_config = None
    assert workbench_config.get_max_workers() == 2
    assert "last_updated" in json.loads(tmp_config.read_text(encoding="utf-8"))


def test_status_mentions_seed(tmp_config):
    assert "seed: 0" in workbench_config.get_status()

import json

import pytest

import workbench_config

# smoke script, run directly
collect_ignore = ["test_before_deploy.py"]


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long numerical runs (record radius, rigidity, I/D sweep)")


@pytest.fixture
def tmp_config(tmp_path, monkeypatch):
    """Point the config manager at a throwaway file and drop its cache."""
    path = tmp_path / "workbench_config.json"
    monkeypatch.setattr(workbench_config, "CONFIG_PATH", path)
    monkeypatch.setattr(workbench_config, "_cached_config", None)
    monkeypatch.setattr(workbench_config, "_cache_timestamp", 0.0)
    monkeypatch.setattr(workbench_config, "_seed_override", None)
    monkeypatch.delenv("WORKBENCH_SEED", raising=False)
    return path


@pytest.fixture
def write_config(tmp_config):
    def _write(data):
        tmp_config.write_text(json.dumps(data), encoding="utf-8")
        workbench_config._cached_config = None
        return tmp_config
    return _write

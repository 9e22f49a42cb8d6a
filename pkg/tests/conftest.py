"""
Shared fixtures for the test suite
"""

import json
from pathlib import Path

import pytest

from construction import Params
from projection import ScheduleSettings, build_schedule, enumerate_set

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES_DIR = REPO_ROOT / "fixtures"
DEFAULT_CONFIG = REPO_ROOT / "config" / "default.json"

# Scans up to here cover every element of S_N below 10^5 under the shipped schedule
WINDOW_BOUND = 36100
WINDOW_ELEMENTS = list(range(35930, 36071, 2))


@pytest.fixture(scope="session")
def params():
    return Params(delta1=0.1, delta2=1e-4)


@pytest.fixture(scope="session")
def params_sets():
    """Three parameter sets that pass every clause"""
    return [
        Params(delta1=0.1, delta2=1e-4),
        Params(delta1=0.1, delta2=5e-4),
        Params(delta1=0.05, delta2=1e-4),
    ]


@pytest.fixture(scope="session")
def schedule(params):
    return build_schedule(ScheduleSettings(), params, WINDOW_BOUND)


@pytest.fixture(scope="session")
def prime_root_schedule(params):
    return build_schedule(ScheduleSettings(generator="prime_root"), params, 100000)


@pytest.fixture(scope="session")
def integer_set(params, schedule):
    return enumerate_set(WINDOW_BOUND, params, schedule)


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR


@pytest.fixture
def default_config_data():
    return json.loads(DEFAULT_CONFIG.read_text(encoding="utf-8"))


@pytest.fixture
def write_config(tmp_path, default_config_data):
    """Write a copy of the shipped config with overrides; golden file goes to tmp_path"""

    def _write(**sections):
        data = json.loads(json.dumps(default_config_data))
        data["golden_path"] = str(tmp_path / "golden.json")
        data["neighborhoods"] = [
            {**entry, "path": str(FIXTURES_DIR / Path(entry["path"]).name)}
            for entry in data["neighborhoods"]
        ]
        for name, overrides in sections.items():
            if isinstance(overrides, dict) and isinstance(data.get(name), dict):
                data[name].update(overrides)
            else:
                data[name] = overrides
        path = tmp_path / "config.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write


@pytest.fixture(scope="session")
def window_bound():
    return WINDOW_BOUND


@pytest.fixture(scope="session")
def window_elements():
    return WINDOW_ELEMENTS

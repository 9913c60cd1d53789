from pathlib import Path

import pytest

from alignsurf.scenario import Scenario, load_scenario

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture(scope="session")
def scenario_dir() -> Path:
    return SCENARIO_DIR


@pytest.fixture(scope="session")
def default_scenario() -> Scenario:
    return load_scenario(SCENARIO_DIR / "default.toml")


@pytest.fixture(scope="session")
def degenerate_scenario() -> Scenario:
    return load_scenario(SCENARIO_DIR / "degenerate.toml")


@pytest.fixture(scope="session")
def repair_scenario() -> Scenario:
    return load_scenario(SCENARIO_DIR / "repair_case.toml")

from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    assert FIXTURES.is_dir(), "run scripts/make_fixtures.py first"
    return FIXTURES


@pytest.fixture(scope="session")
def trade_csv(fixtures_dir: Path) -> Path:
    return fixtures_dir / "trade.csv"


@pytest.fixture(scope="session")
def firms_csv(fixtures_dir: Path) -> Path:
    return fixtures_dir / "firms.csv"


@pytest.fixture(scope="session")
def capacity_csv(fixtures_dir: Path) -> Path:
    return fixtures_dir / "capacity.csv"


@pytest.fixture(scope="session")
def observations_csv(fixtures_dir: Path) -> Path:
    return fixtures_dir / "observations.csv"


@pytest.fixture(scope="session")
def config_json(fixtures_dir: Path) -> Path:
    return fixtures_dir / "config.json"

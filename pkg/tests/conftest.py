import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from pushddp.pushdyn import SliderParams

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURE_DIR = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def params():
    return SliderParams()


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURE_DIR

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from multitalk.kinesim import SimConfig, default_model


@pytest.fixture(scope="session")
def arm_model():
    return default_model()


@pytest.fixture(scope="session")
def sim_config():
    return SimConfig()

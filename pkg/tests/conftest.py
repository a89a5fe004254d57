import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from nonmono.logic import make_backend  # noqa: E402
from nonmono.operations import OperationTable  # noqa: E402

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def b1():
    return make_backend("classical", ["p"])


@pytest.fixture
def b2():
    return make_backend("classical", ["p", "q"])


@pytest.fixture
def b3():
    return make_backend("classical", ["p", "q", "r"])


@pytest.fixture
def c0(b1):
    """Th(empty) goes to Th(p); every other theory to itself."""
    return OperationTable(b1, {0: 0, 1: 1, 2: 2, 3: 2})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

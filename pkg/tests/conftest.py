import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nbldpc.code import build_regular_2dc  # noqa: E402
from nbldpc.gf import build_field  # noqa: E402


@pytest.fixture(scope="session")
def gf4():
    return build_field(2)


@pytest.fixture(scope="session")
def gf8():
    return build_field(3)


@pytest.fixture(scope="session")
def gf32():
    return build_field(5)


@pytest.fixture(scope="session")
def code192(gf32):
    return build_regular_2dc(192, 4, gf32, seed=1)


@pytest.fixture(scope="session")
def toy6(gf4):
    return build_regular_2dc(6, 3, gf4, seed=7)

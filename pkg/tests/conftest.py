import pytest

from sl2cayley.cayley import build_cayley
from sl2cayley.presets import get_preset


@pytest.fixture(scope="session")
def diag222():
    return build_cayley(get_preset("DIAGONAL"), (2, 2, 2))


@pytest.fixture(scope="session")
def diag333():
    return build_cayley(get_preset("DIAGONAL"), (3, 3, 3))


@pytest.fixture(scope="session")
def twisted222():
    return build_cayley(get_preset("TWISTED"), (2, 2, 2))


@pytest.fixture(scope="session")
def twisted333():
    return build_cayley(get_preset("TWISTED"), (3, 3, 3))

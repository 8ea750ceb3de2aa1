import pytest

from gridlab.folsomono import FOBuilder
from gridlab.zagier import ZagierGrid, build_g_basis


@pytest.fixture(scope="session")
def grid():
    """Exact Zagier grid: indices <= 25, known below q^300."""
    return ZagierGrid.build(25, 25, 300)


@pytest.fixture(scope="session")
def fo():
    return FOBuilder()


@pytest.fixture(scope="session")
def g_long():
    """g_1 .. g_9, exact, known below q^3000 (enough for T(3^6) on g_4)."""
    return build_g_basis(9, 3000)

import pytest

from grasplog.kernels import derive_seed
from grasplog.scene import generate_pile


@pytest.fixture(scope="session")
def pile4():
    """A fixed four-log pile shared by read-only tests."""
    return generate_pile(4, 7)


@pytest.fixture(scope="session")
def small_piles():
    """A handful of three-log piles with derived seeds."""
    return [generate_pile(3, derive_seed(20, 101, i)) for i in range(4)]

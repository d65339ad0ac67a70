import numpy as np
import pytest

from gpbogo.fockspace import ModeSet
from gpbogo.potential import smooth_bump, square_well, tabulated


@pytest.fixture
def well():
    return square_well(2.0, 1.0)


@pytest.fixture
def weak_well():
    return square_well(0.2, 1.0)


@pytest.fixture
def bump():
    return smooth_bump(1.0, 1.0)


@pytest.fixture
def table():
    r = np.linspace(0.0, 1.5, 31)
    return tabulated(np.stack([r, 3.0 * (1 - (r / 1.5) ** 2) ** 2], 1))


@pytest.fixture(params=["well", "weak_well", "bump", "table"])
def potential(request):
    return request.getfixturevalue(request.param)


@pytest.fixture
def seven_modes():
    """0 and the six momenta 2 pi (+-e_i)."""
    return ModeSet.from_cutoff(2 * np.pi)


@pytest.fixture
def line_modes():
    """0, +-2 pi e1 and +-4 pi e1."""
    return ModeSet.from_momenta([(1, 0, 0), (2, 0, 0)])


@pytest.fixture
def three_modes():
    return ModeSet.from_momenta([(1, 0, 0)])

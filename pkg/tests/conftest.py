import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from discgibbs import disc_spectrum, ground_state


@pytest.fixture(scope="session")
def gs4():
    return ground_state.solve_ground_state(4.0)


@pytest.fixture(scope="session")
def basis64():
    return disc_spectrum.build_basis(64)


@pytest.fixture(scope="session")
def basis256():
    return disc_spectrum.build_basis(256)


@pytest.fixture(scope="session")
def basis512():
    return disc_spectrum.build_basis(512)


@pytest.fixture(scope="session")
def big_disc():
    """Radius-20 surrogate for plane-limit operator checks."""
    return disc_spectrum.build_basis(200, radius=20.0)

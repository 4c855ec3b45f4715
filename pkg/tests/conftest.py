import numpy as np
import pytest

from spherediff.modes import enumerate_modes


@pytest.fixture(scope="session")
def ms_small():
    """Mixed-order mode set shared by tests (R0=1, D=0.01, ~30 modes)."""
    return enumerate_modes(1.0, 0.01, 30)


@pytest.fixture(scope="session")
def ms_radial():
    """n = 0 only, 40 radial modes (R0=1, D=0.01)."""
    return enumerate_modes(1.0, 0.01, 40, n_max=0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)

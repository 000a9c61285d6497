import numpy as np
import pytest

from omrepeater.dynamics import STAGE_A_KETS, stage_a_space
from omrepeater.hilbert import basis_index
from omrepeater.models import ModelParams

# the parameter point of the stage-A figures' solid curves
FIG_OMEGA, FIG_G, FIG_T = 0.5, 2.0, 1.0


@pytest.fixture
def fig_params():
    return ModelParams.simplified(FIG_OMEGA, FIG_G)


@pytest.fixture(scope="session")
def stage_a_indices():
    space = stage_a_space()
    return space, np.array([basis_index(space, k) for k in STAGE_A_KETS])


@pytest.fixture
def rng():
    return np.random.default_rng(20191107)


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)

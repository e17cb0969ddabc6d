import numpy as np
import pytest

from multirc.netgen import build_network
from multirc.taskgen import circle_pair
from multirc.training import TrainingParams, train_multifunctional


@pytest.fixture(scope="session")
def net_small():
    # n below the sparse threshold exercises the dense adjacency path
    return build_network(n=50, d=2, p=0.1, sigma=0.2, gamma=5.0, tau=0.01, seed=3)


@pytest.fixture(scope="session")
def net_sparse():
    return build_network(n=100, d=2, p=0.05, sigma=0.2, gamma=5.0, tau=0.01, seed=5)


@pytest.fixture(scope="session")
def short_params():
    return TrainingParams(t_listen=20.0, t_train=60.0)


@pytest.fixture(scope="session")
def targets_centre():
    return circle_pair(0.0, 5.0, "opposite", 0.01)


@pytest.fixture(scope="session")
def trained_small(net_sparse, short_params, targets_centre):
    """A readout trained on the overlapping pair; not necessarily a good one."""
    readout, finals = train_multifunctional(
        net_sparse, 1.0, targets_centre, short_params
    )
    return readout, finals


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.Philox(key=1234))

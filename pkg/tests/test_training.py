import numpy as np
import pytest

from multirc.errors import InvalidSpecError, RankDeficiencyError
from multirc.training import (
    DataMatrices, TrainingParams, assemble_data_matrices, feature_map,
    load_readout, ridge_solve, save_readout, train_multifunctional,
)
from multirc.dynamics import StateTrajectory
from multirc.taskgen import Trajectory, circle_pair


def test_params_validation():
    with pytest.raises(InvalidSpecError):
        TrainingParams(t_listen=100, t_train=50)
    with pytest.raises(InvalidSpecError):
        TrainingParams(beta=-1.0)
    p = TrainingParams(t_listen=20.0, t_train=60.0, tau=0.01)
    assert p.listen_index == 2000 and p.train_index == 6000


def test_feature_map_stacks_square():
    r = np.array([1.0, -2.0, 3.0])
    np.testing.assert_array_equal(feature_map(r), [1, -2, 3, 1, 4, 9])
    batch = feature_map(np.array([[1.0, 2.0], [0.0, -1.0]]))
    np.testing.assert_array_equal(batch, [[1, 2, 1, 4], [0, -1, 0, 1]])


def test_ridge_solve_satisfies_normal_equations(rng):
    x = rng.standard_normal((8, 40))
    y = rng.standard_normal((3, 40))
    for beta in (0.01, 0.1, 1.0):
        w = ridge_solve(x, y, beta)
        # stationarity of |WX - Y|^2 + beta |W|^2
        grad = (w @ x - y) @ x.T + beta * w
        assert np.max(np.abs(grad)) < 1e-10


def test_ridge_zero_beta_rank_deficient(rng):
    x = np.zeros((6, 10))
    x[0] = rng.standard_normal(10)  # rank 1
    y = rng.standard_normal((2, 10))
    with pytest.raises(RankDeficiencyError):
        ridge_solve(x, y, 0.0)


def test_ridge_shape_mismatch(rng):
    with pytest.raises(InvalidSpecError):
        ridge_solve(rng.standard_normal((4, 10)), rng.standard_normal((2, 9)), 0.1)


def test_assemble_window_is_inclusive():
    params = TrainingParams(t_listen=0.02, t_train=0.05, tau=0.01)
    states = StateTrajectory(0.01, np.arange(12.0).reshape(6, 2))
    inputs = Trajectory(0.01, np.arange(12.0).reshape(6, 2) * 10)
    data = assemble_data_matrices(states, inputs, params)
    assert data.k == 4  # indices 2..5 inclusive
    np.testing.assert_array_equal(data.x[:2, 0], [4.0, 5.0])
    np.testing.assert_array_equal(data.x[2:, 0], [16.0, 25.0])
    np.testing.assert_array_equal(data.y[:, -1], [100.0, 110.0])


def test_assemble_too_short_rejected():
    params = TrainingParams(t_listen=0.02, t_train=0.2, tau=0.01)
    states = StateTrajectory(0.01, np.zeros((6, 2)))
    inputs = Trajectory(0.01, np.zeros((6, 2)))
    with pytest.raises(InvalidSpecError):
        assemble_data_matrices(states, inputs, params)


def test_train_reproduces_targets_open_loop(net_sparse, short_params):
    """The trained readout must fit its own training data closely."""
    from multirc.dynamics import integrate_open_loop, readout_apply
    from multirc.taskgen import generate_orbit

    targets = circle_pair(2.0, 5.0, "opposite", 0.01)
    readout, finals = train_multifunctional(net_sparse, 1.0, targets, short_params)
    assert len(finals) == 2
    assert readout.rho == 1.0
    for spec in targets:
        orbit = generate_orbit(spec, short_params.train_index)
        states = integrate_open_loop(
            net_sparse, orbit, np.zeros(net_sparse.n), rho=1.0
        )
        fit = readout_apply(readout, states.states[short_params.listen_index :])
        err = np.max(np.abs(fit - orbit.samples[short_params.listen_index :]))
        assert err < 0.1  # within 2% of the radius


def test_train_rejects_mixed_steps(net_sparse, short_params):
    from multirc.taskgen import OrbitSpec

    specs = (OrbitSpec(5, 5, 0, 0, 0.01), OrbitSpec(5, 5, 0, 0, 0.02))
    with pytest.raises(InvalidSpecError):
        train_multifunctional(net_sparse, 1.0, specs, short_params)
    with pytest.raises(InvalidSpecError):
        train_multifunctional(net_sparse, 1.0, [], short_params)


def test_readout_round_trip(tmp_path, trained_small):
    readout, _ = trained_small
    path = tmp_path / "readout.txt"
    save_readout(readout, path)
    loaded = load_readout(path)
    np.testing.assert_array_equal(loaded.w_out, readout.w_out)
    assert loaded.provenance == readout.provenance

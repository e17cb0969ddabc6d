import math

import numpy as np
import pytest

from multirc.dynamics import StateTrajectory, TrainedReadout, integrate_open_loop
from multirc.errors import InvalidSpecError, UndefinedRatioError
from multirc.symmetry import (
    SymmetryReport, check_b9_pair, half_period_antisymmetry,
    mirror_trajectory_residual, square_readout_ratio, train_mirror_pair,
)
from multirc.taskgen import circle_pair, generate_orbit

PERIOD = 2 * math.pi


def test_square_ratio_basics():
    w = np.zeros((2, 8))
    w[:, :4] = 1.0
    assert square_readout_ratio(TrainedReadout(w)) == 0.0
    w[:, 4:] = 2.0
    assert square_readout_ratio(TrainedReadout(w)) == pytest.approx(2.0)
    with pytest.raises(UndefinedRatioError):
        square_readout_ratio(TrainedReadout(np.zeros((2, 8))))


def test_b9_self_pair_and_random(rng):
    w = rng.standard_normal((2, 10))
    readout = TrainedReadout(w)
    linear, square = check_b9_pair(readout, readout)
    assert linear == 0.0
    assert square == pytest.approx(2.0)  # |W2 + W2| / |W2|
    other = TrainedReadout(rng.standard_normal((2, 10)))
    linear, square = check_b9_pair(readout, other)
    assert linear > 0.1 and square > 0.1
    with pytest.raises(InvalidSpecError):
        check_b9_pair(readout, TrainedReadout(rng.standard_normal((2, 12))))


def test_b9_pair_small_net(net_sparse, short_params):
    plus, minus = train_mirror_pair(net_sparse, 1.0, 3.0, 5.0, short_params)
    linear, square = check_b9_pair(plus, minus)
    assert linear < 1e-6
    assert square < 1e-6


def test_half_period_antisymmetry_of_input_orbit():
    spec = circle_pair(0.0, 5.0, "opposite", 0.01)[0]
    orbit = generate_orbit(spec, 2000)
    states = StateTrajectory(0.01, orbit.samples)
    assert half_period_antisymmetry(states, PERIOD) < 1e-9
    # an offset breaks the symmetry at the scale of the offset
    spec_off = circle_pair(2.0, 5.0, "opposite", 0.01)[0]
    orbit_off = generate_orbit(spec_off, 2000)
    states_off = StateTrajectory(0.01, orbit_off.samples)
    assert half_period_antisymmetry(states_off, PERIOD) > 0.3


def test_half_period_antisymmetry_of_response(net_sparse, short_params):
    spec = circle_pair(0.0, 5.0, "opposite", 0.01)[0]
    orbit = generate_orbit(spec, short_params.train_index)
    states = integrate_open_loop(net_sparse, orbit, np.zeros(net_sparse.n), rho=1.0)
    post = StateTrajectory(0.01, states.states[short_params.listen_index :])
    assert half_period_antisymmetry(post, PERIOD) < 1e-6


def test_half_period_window_too_short():
    states = StateTrajectory(0.01, np.zeros((100, 3)))
    with pytest.raises(InvalidSpecError):
        half_period_antisymmetry(states, PERIOD)


def test_mirror_residual_zero_square(net_small, rng):
    w = 0.05 * rng.standard_normal((2, 2 * net_small.n))
    readout = TrainedReadout(w, {"rho": 1.0}).with_zero_square()
    r0 = 0.1 * rng.standard_normal(net_small.n)
    assert mirror_trajectory_residual(net_small, readout, r0, span=100.0) < 1e-10


def test_mirror_residual_generic_square(net_small, rng):
    w = 0.05 * rng.standard_normal((2, 2 * net_small.n))
    readout = TrainedReadout(w, {"rho": 1.0})
    r0 = 0.1 * rng.standard_normal(net_small.n)
    assert mirror_trajectory_residual(net_small, readout, r0, span=20.0) > 1e-3


def test_report_validation_and_csv(tmp_path):
    with pytest.raises(InvalidSpecError):
        SymmetryReport(w2_ratio=-1.0)
    report = SymmetryReport(w2_ratio=1e-4, b9_linear_residual=1e-8)
    path = tmp_path / "symmetry.csv"
    report.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("w2_ratio,")
    fields = lines[1].split(",")
    assert float(fields[0]) == pytest.approx(1e-4)
    assert fields[1] == ""  # unset fields stay empty

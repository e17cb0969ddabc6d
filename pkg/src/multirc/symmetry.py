"""Odd-symmetry diagnostics of trained readouts and responses.

Because tanh is odd, negating the training input negates the open-loop
response exactly.  Consequences checked here: the square readout part
vanishes for input sets that are their own negation; readouts trained on
exactly negated input sets have equal linear and opposite square parts;
the open-loop response to a zero-centred orbit is antisymmetric under a
half-period shift; and a closed loop whose square part is zero maps
mirrored initial states to mirrored trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from . import defaults
from .dynamics import StateTrajectory, TrainedReadout, integrate_closed_loop
from .errors import InvalidSpecError, UndefinedRatioError
from .netgen import ReservoirNet
from .taskgen import Mode, circle_pair
from .training import TrainingParams, train_multifunctional


@dataclass(frozen=True)
class SymmetryReport:
    w2_ratio: Optional[float] = None
    b2_residual: Optional[float] = None  # half-period antisymmetry
    b9_linear_residual: Optional[float] = None
    b9_square_residual: Optional[float] = None
    mirror_residual: Optional[float] = None

    def __post_init__(self):
        for name in (
            "w2_ratio", "b2_residual", "b9_linear_residual",
            "b9_square_residual", "mirror_residual",
        ):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise InvalidSpecError(f"{name} must be nonnegative, got {value}")

    def to_csv(self, path) -> None:
        fields = (
            "w2_ratio", "b2_residual", "b9_linear_residual",
            "b9_square_residual", "mirror_residual",
        )
        with open(path, "w", newline="") as fh:
            fh.write(",".join(fields) + "\n")
            fh.write(",".join(
                "" if getattr(self, f) is None else f"{getattr(self, f):.17g}"
                for f in fields
            ) + "\n")


def square_readout_ratio(readout: TrainedReadout) -> float:
    """Frobenius-norm ratio of the square part to the linear part."""
    linear = float(np.linalg.norm(readout.w1))
    if linear == 0.0:
        raise UndefinedRatioError("the linear readout part is exactly zero")
    return float(np.linalg.norm(readout.w2)) / linear


def check_b9_pair(
    readout_plus: TrainedReadout, readout_minus: TrainedReadout
) -> tuple[float, float]:
    """Relative residuals of W1_+ = W1_- and W2_+ = -W2_-."""
    if readout_plus.w_out.shape != readout_minus.w_out.shape:
        raise InvalidSpecError(
            f"readout shapes disagree: {readout_plus.w_out.shape} "
            f"vs {readout_minus.w_out.shape}"
        )
    lin_scale = np.linalg.norm(readout_plus.w1)
    sq_scale = np.linalg.norm(readout_plus.w2)
    if lin_scale == 0.0 or sq_scale == 0.0:
        raise UndefinedRatioError("a readout part is exactly zero; residual undefined")
    linear = float(np.linalg.norm(readout_plus.w1 - readout_minus.w1) / lin_scale)
    square = float(np.linalg.norm(readout_plus.w2 + readout_minus.w2) / sq_scale)
    return linear, square


def train_mirror_pair(
    net: ReservoirNet,
    rho: float,
    x_cen: float,
    b: float,
    params: TrainingParams,
    mode: Mode = "opposite",
) -> tuple[TrainedReadout, TrainedReadout]:
    """Train the readout pair whose training sets are exact negations.

    The first readout is trained on the standard orbit pair centred at
    (+x_cen, 0) / (-x_cen, 0); the second on the sample-for-sample negated
    orbits.  Oddness of the response then forces equal linear parts and
    opposite square parts, up to the conditioning of the ridge solve.
    """
    specs_plus = circle_pair(x_cen, b, mode, params.tau)
    specs_minus = tuple(s.negated() for s in specs_plus)
    readout_plus, _ = train_multifunctional(net, rho, specs_plus, params)
    readout_minus, _ = train_multifunctional(net, rho, specs_minus, params)
    return readout_plus, readout_minus


def half_period_antisymmetry(states: StateTrajectory, period: float) -> float:
    """max_t |r(t) + r(t + T/2)|_inf / max |r|_inf over the supplied states.

    The half-period shift is rarely a whole number of samples, so the
    shifted state is evaluated with a cubic spline through the samples.
    The states must cover at least 1.5 periods (post-transient).
    """
    if period <= 0:
        raise InvalidSpecError(f"period must be positive, got {period}")
    duration = (len(states.states) - 1) * states.step
    if duration < 1.5 * period:
        raise InvalidSpecError(
            f"window of {duration} time units is shorter than 1.5 periods "
            f"({1.5 * period})"
        )
    half = 0.5 * period
    times = states.times
    spline = CubicSpline(times, states.states, axis=0)
    base = times[times <= duration - half]
    shifted = spline(base + half)
    residual = float(np.max(np.abs(states.states[: len(base)] + shifted)))
    return residual / float(np.max(np.abs(states.states)))


def mirror_trajectory_residual(
    net: ReservoirNet,
    readout: TrainedReadout,
    r0: np.ndarray,
    span: float,
    rho: float | None = None,
) -> float:
    """max_t |r_+(t) + r_-(t)|_inf for closed loops started at +-r0."""
    n_steps = int(round(span / net.tau))
    plus, _ = integrate_closed_loop(net, readout, np.asarray(r0), n_steps, rho=rho)
    minus, _ = integrate_closed_loop(net, readout, -np.asarray(r0), n_steps, rho=rho)
    return float(np.max(np.abs(plus.states + minus.states)))


def ratio_sweep(
    net: ReservoirNet,
    rhos: Sequence[float],
    x_cen: float,
    b: float,
    params: TrainingParams,
    mode: Mode = "opposite",
) -> np.ndarray:
    """square_readout_ratio at each spectral radius, same task throughout."""
    specs = circle_pair(x_cen, b, mode, params.tau)
    out = np.empty(len(rhos))
    for i, rho in enumerate(rhos):
        readout, _ = train_multifunctional(net, rho, specs, params)
        out[i] = square_readout_ratio(readout)
    return out


def find_breaking_threshold(
    net: ReservoirNet,
    params: TrainingParams,
    b: float,
    rho_lo: float,
    rho_hi: float,
    mode: Mode = "opposite",
    refinements: int = 8,
) -> float:
    """Spectral radius where the zero-centred task stops killing the square part.

    Bisects on the ratio crossing 10x its value at `rho_lo` (the low-rho
    floor).  Realisation-specific; reported, never asserted.
    """
    specs = circle_pair(0.0, b, mode, params.tau)

    def ratio_at(rho):
        readout, _ = train_multifunctional(net, rho, specs, params)
        return square_readout_ratio(readout)

    floor = ratio_at(rho_lo)
    threshold = 10.0 * floor
    if ratio_at(rho_hi) <= threshold:
        raise InvalidSpecError(
            f"no symmetry breaking found in [{rho_lo}, {rho_hi}]"
        )
    lo, hi = rho_lo, rho_hi
    for _ in range(refinements):
        mid = 0.5 * (lo + hi)
        if ratio_at(mid) > threshold:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def w2_elements_to_csv(readout: TrainedReadout, path) -> None:
    """Raw square-part elements, one per line (binning is a plotting concern)."""
    with open(path, "w", newline="") as fh:
        fh.write("w2_element\n")
        for v in readout.w2.ravel():
            fh.write(f"{v:.17g}\n")

"""Attractor characterisation of projected trajectories.

Provides the roundness error metric, rotation-direction detection,
extrema-based period estimation, the five-way prediction classification,
the largest Lyapunov exponent (variational tangent method) and
residence-time statistics for itinerant switching dynamics.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import defaults
from .dynamics import TrainedReadout, readout_apply
from .errors import DivergenceError, InvalidSpecError
from .netgen import ReservoirNet
from .taskgen import OrbitSpec, Trajectory


class Kind(enum.Enum):
    CORRECT_CYCLE = "correct_cycle"
    SWITCHED_CYCLE = "switched_cycle"
    NON_PERIODIC = "non_periodic"
    OTHER_LIMIT_CYCLE = "other_limit_cycle"
    FIXED_POINT = "fixed_point"
    DIVERGED = "diverged"


# Plotting-parity colour names for the five regular outcomes.
COLOR_NAMES = {
    Kind.CORRECT_CYCLE: "blue",
    Kind.SWITCHED_CYCLE: "yellow",
    Kind.NON_PERIODIC: "magenta",
    Kind.OTHER_LIMIT_CYCLE: "black",
    Kind.FIXED_POINT: "green",
    Kind.DIVERGED: "grey",
}


@dataclass(frozen=True)
class AttractorLabel:
    kind: Kind
    centre: np.ndarray
    winding: int
    period: Optional[float] = None
    delta_rel: Optional[float] = None

    def __post_init__(self):
        if self.kind is Kind.FIXED_POINT and (self.period is not None or self.winding != 0):
            raise InvalidSpecError("a fixed point has no period and zero winding")
        if self.kind is Kind.CORRECT_CYCLE and (
            self.delta_rel is None or self.delta_rel >= defaults.DELTA_REL_MAX
        ):
            raise InvalidSpecError(
                "a correct cycle must carry a relative roundness below the threshold"
            )

    @property
    def color(self) -> str:
        return COLOR_NAMES[self.kind]


@dataclass(frozen=True)
class LyapunovEstimate:
    lambda_max: float
    window: float
    renorm_interval: float

    def __post_init__(self):
        if self.window < 10 * self.renorm_interval:
            raise InvalidSpecError(
                "averaging window must cover at least 10 renormalisation intervals"
            )


@dataclass(frozen=True)
class ResidenceRecord:
    intervals: list  # ordered (label, duration) pairs; consecutive labels differ
    switch_count: int


def roundness(traj: Trajectory, centre: np.ndarray, b: float) -> tuple[float, float]:
    """Difference between the enclosing and inscribing radii about `centre`.

    Both circles are centred at the target-orbit centre; delta_rel = delta/b.
    """
    if b <= 0:
        raise InvalidSpecError(f"orbit radius must be positive, got {b}")
    radii = np.linalg.norm(traj.samples - np.asarray(centre), axis=1)
    delta = float(radii.max() - radii.min())
    return delta, delta / b


def winding_direction(traj: Trajectory, centre: np.ndarray) -> int:
    """Sign of the total signed angle swept about `centre` (0 below half a turn)."""
    if traj.dim != 2:
        raise InvalidSpecError("winding detection needs a planar trajectory")
    rel = traj.samples - np.asarray(centre)
    x0, y0 = rel[:-1, 0], rel[:-1, 1]
    x1, y1 = rel[1:, 0], rel[1:, 1]
    increments = np.arctan2(x0 * y1 - y0 * x1, x0 * x1 + y0 * y1)
    total = float(np.sum(increments))
    if abs(total) < math.pi:
        return 0
    return 1 if total > 0 else -1


def _local_maxima(x: np.ndarray, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Parabolically refined times and values of strict interior maxima."""
    idx = np.nonzero((x[1:-1] > x[:-2]) & (x[1:-1] >= x[2:]))[0] + 1
    times = np.empty(len(idx))
    values = np.empty(len(idx))
    for k, i in enumerate(idx):
        a, b_, c = x[i - 1], x[i], x[i + 1]
        denom = a - 2 * b_ + c
        shift = 0.0 if denom == 0 else 0.5 * (a - c) / denom
        times[k] = (i + shift) * tau
        values[k] = b_ - 0.25 * (a - c) * shift
    return times, values


def estimate_period(
    traj: Trajectory,
    tau: float | None = None,
    amp_tol: float | None = None,
) -> Optional[tuple[float, np.ndarray]]:
    """Period and maxima-cluster values from the x-component, if stable.

    Local maxima of x(t) are clustered by value; the smallest cluster count
    c whose pattern recurs (values match c apart within `amp_tol`) defines
    the pattern, and the period is the mean spacing between recurrences.
    Returns None when no pattern repeats at least 3 times.
    """
    if len(traj.samples) < 4:
        raise InvalidSpecError("need at least 4 samples for period estimation")
    tau = traj.step if tau is None else tau
    x = traj.samples[:, 0]
    if amp_tol is None:
        amp_tol = max(1e-2 * float(np.ptp(x)), 1e-12)
    times, values = _local_maxima(x, tau)
    m = len(values)
    if m < 3:
        return None
    for c in range(1, m // 3 + 1):
        if np.all(np.abs(values[c:] - values[:-c]) <= amp_tol):
            period = float(np.mean(times[c:] - times[:-c]))
            clusters = np.array([values[j::c].mean() for j in range(c)])
            return period, clusters
    return None


def _target_matches(centre, winding, spec: OrbitSpec, eps_cen: float) -> bool:
    return (
        float(np.linalg.norm(centre - spec.centre)) <= eps_cen
        and winding == spec.winding
    )


def diverged_label() -> AttractorLabel:
    """Sentinel label for runs aborted by the divergence guard."""
    return AttractorLabel(Kind.DIVERGED, centre=np.full(2, np.nan), winding=0)


def classify_prediction(
    traj: Trajectory,
    targets: tuple[OrbitSpec, OrbitSpec],
    which: str,
    window: float = defaults.ASSESS_WINDOW,
) -> AttractorLabel:
    """Label the attractor approached in the final `window` time units.

    Outcomes: the designated target reconstructed (correct cycle), the
    other target reconstructed (switched), a fixed point, some other limit
    cycle (wrong identity or roundness above threshold), or no periodic
    settling at all.
    """
    if which not in ("A", "B"):
        raise InvalidSpecError(f"`which` must be 'A' or 'B', got {which!r}")
    own, other = (targets[0], targets[1]) if which == "A" else (targets[1], targets[0])
    b = own.b
    tail = traj.tail(window)
    if not np.all(np.isfinite(tail.samples)):
        return diverged_label()

    motion = float(np.max(np.ptp(tail.samples, axis=0)))
    centre = tail.samples.mean(axis=0)
    if motion < defaults.fp_tol(b):
        return AttractorLabel(Kind.FIXED_POINT, centre=centre, winding=0)

    est = estimate_period(tail, amp_tol=defaults.amp_tol(b))
    winding = winding_direction(tail, centre)
    if est is None:
        return AttractorLabel(Kind.NON_PERIODIC, centre=centre, winding=winding)
    period, _clusters = est

    eps_cen = defaults.centre_tol(b)
    if _target_matches(centre, winding, own, eps_cen):
        _, delta_rel = roundness(tail, own.centre, own.b)
        if delta_rel < defaults.DELTA_REL_MAX:
            return AttractorLabel(
                Kind.CORRECT_CYCLE, centre=centre, winding=winding,
                period=period, delta_rel=delta_rel,
            )
    if _target_matches(centre, winding, other, eps_cen):
        _, delta_rel = roundness(tail, other.centre, other.b)
        if delta_rel < defaults.DELTA_REL_MAX:
            return AttractorLabel(
                Kind.SWITCHED_CYCLE, centre=centre, winding=winding,
                period=period, delta_rel=delta_rel,
            )
    _, delta_rel = roundness(tail, own.centre, own.b)
    return AttractorLabel(
        Kind.OTHER_LIMIT_CYCLE, centre=centre, winding=winding,
        period=period, delta_rel=delta_rel,
    )


def lyapunov_from_system(
    rate: Callable[[np.ndarray], np.ndarray],
    tangent_rate: Callable[[np.ndarray, np.ndarray], np.ndarray],
    r0: np.ndarray,
    tau: float,
    transient: float = defaults.LYAP_TRANSIENT,
    renorm_interval: float = defaults.LYAP_RENORM,
    span: float = defaults.LYAP_SPAN,
    seed: int = 0,
) -> LyapunovEstimate:
    """Largest Lyapunov exponent of an arbitrary smooth system.

    Integrates the trajectory and one tangent vector jointly with RK4,
    renormalising the tangent every `renorm_interval`; the exponent is the
    mean log growth rate over `span` after discarding `transient`.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    r = np.array(r0, dtype=np.float64)
    v = rng.standard_normal(r.shape[0])
    v /= np.linalg.norm(v)

    steps_per_renorm = max(1, int(round(renorm_interval / tau)))
    n_transient = int(round(transient / (steps_per_renorm * tau)))
    n_average = int(round(span / (steps_per_renorm * tau)))
    h = tau

    log_sum = 0.0
    time_sum = 0.0
    for block in range(n_transient + n_average):
        for _ in range(steps_per_renorm):
            f1 = rate(r); g1 = tangent_rate(r, v)
            r2 = r + 0.5 * h * f1; v2 = v + 0.5 * h * g1
            f2 = rate(r2); g2 = tangent_rate(r2, v2)
            r3 = r + 0.5 * h * f2; v3 = v + 0.5 * h * g2
            f3 = rate(r3); g3 = tangent_rate(r3, v3)
            r4 = r + h * f3; v4 = v + h * g3
            f4 = rate(r4); g4 = tangent_rate(r4, v4)
            r = r + (h / 6.0) * (f1 + 2 * f2 + 2 * f3 + f4)
            v = v + (h / 6.0) * (g1 + 2 * g2 + 2 * g3 + g4)
        if not np.all(np.isfinite(r)):
            raise DivergenceError(block * steps_per_renorm)
        norm = float(np.linalg.norm(v))
        v /= norm
        if block >= n_transient:
            log_sum += math.log(norm)
            time_sum += steps_per_renorm * h
    return LyapunovEstimate(
        lambda_max=log_sum / time_sum,
        window=time_sum,
        renorm_interval=steps_per_renorm * h,
    )


def largest_lyapunov(
    net: ReservoirNet,
    readout: TrainedReadout,
    r0: np.ndarray,
    rho: float | None = None,
    transient: float = defaults.LYAP_TRANSIENT,
    renorm_interval: float = defaults.LYAP_RENORM,
    span: float = defaults.LYAP_SPAN,
    seed: int = 0,
    method: str = "variational",
) -> LyapunovEstimate:
    """Largest Lyapunov exponent of the closed loop started at r0.

    The default method integrates the variational equation along the
    trajectory (deterministic given the seed of the initial tangent).  The
    two-trajectory method, kept for cross-validation, renormalises the
    separation of a nearby shadow trajectory instead.
    """
    from .dynamics import closed_loop_rate, jacobian_apply

    rho_val = readout.rho if rho is None else float(rho)
    if method == "variational":
        return lyapunov_from_system(
            rate=lambda r: closed_loop_rate(net, readout, r, rho=rho_val),
            tangent_rate=lambda r, v: jacobian_apply(net, readout, r, v, rho=rho_val),
            r0=r0, tau=net.tau,
            transient=transient, renorm_interval=renorm_interval, span=span,
            seed=seed,
        )
    if method == "two_trajectory":
        return _lyapunov_two_trajectory(
            net, readout, r0, rho_val, transient, renorm_interval, span, seed
        )
    raise InvalidSpecError(f"unknown Lyapunov method {method!r}")


def _lyapunov_two_trajectory(
    net, readout, r0, rho, transient, renorm_interval, span, seed, d0=1e-8
):
    from .dynamics import closed_loop_rate

    rng = np.random.Generator(np.random.Philox(key=seed))
    direction = rng.standard_normal(len(r0))
    direction /= np.linalg.norm(direction)
    r = np.array(r0, dtype=np.float64)
    s = r + d0 * direction
    h = net.tau
    steps_per_renorm = max(1, int(round(renorm_interval / h)))
    n_transient = int(round(transient / (steps_per_renorm * h)))
    n_average = int(round(span / (steps_per_renorm * h)))

    def rk4(state):
        f1 = closed_loop_rate(net, readout, state, rho=rho)
        f2 = closed_loop_rate(net, readout, state + 0.5 * h * f1, rho=rho)
        f3 = closed_loop_rate(net, readout, state + 0.5 * h * f2, rho=rho)
        f4 = closed_loop_rate(net, readout, state + h * f3, rho=rho)
        return state + (h / 6.0) * (f1 + 2 * f2 + 2 * f3 + f4)

    log_sum = 0.0
    time_sum = 0.0
    for block in range(n_transient + n_average):
        for _ in range(steps_per_renorm):
            r = rk4(r)
            s = rk4(s)
        if not np.all(np.isfinite(r)):
            raise DivergenceError(block * steps_per_renorm)
        sep = float(np.linalg.norm(s - r))
        if block >= n_transient:
            log_sum += math.log(sep / d0)
            time_sum += steps_per_renorm * h
        s = r + (d0 / sep) * (s - r)
    return LyapunovEstimate(
        lambda_max=log_sum / time_sum,
        window=time_sum,
        renorm_interval=steps_per_renorm * h,
    )


def residence_intervals(
    traj: Trajectory,
    targets: tuple[OrbitSpec, OrbitSpec],
    window: float,
) -> ResidenceRecord:
    """Segment an itinerant trajectory into per-quasi-attractor intervals.

    Each non-overlapping window gets the label of the target about whose
    centre the state winds in that target's own direction; consecutive
    equal labels merge.  Durations are multiples of the window length.
    """
    if traj.dim != 2:
        raise InvalidSpecError("residence analysis needs a planar trajectory")
    w_samples = max(2, int(round(window / traj.step)))
    n_windows = (len(traj.samples) - 1) // w_samples
    if n_windows < 1:
        raise InvalidSpecError("trajectory shorter than one assessment window")

    labels = []
    for k in range(n_windows):
        chunk = Trajectory(traj.step, traj.samples[k * w_samples : (k + 1) * w_samples + 1])
        scores = []
        for spec in targets:
            rel = chunk.samples - spec.centre
            x0, y0 = rel[:-1, 0], rel[:-1, 1]
            x1, y1 = rel[1:, 0], rel[1:, 1]
            angle = float(np.sum(np.arctan2(x0 * y1 - y0 * x1, x0 * x1 + y0 * y1)))
            scores.append(angle * spec.winding)
        labels.append("A" if scores[0] >= scores[1] else "B")

    duration = w_samples * traj.step
    intervals: list[tuple[str, float]] = []
    for label in labels:
        if intervals and intervals[-1][0] == label:
            intervals[-1] = (label, intervals[-1][1] + duration)
        else:
            intervals.append((label, duration))
    return ResidenceRecord(intervals=intervals, switch_count=len(intervals) - 1)


def residence_to_csv(record: ResidenceRecord, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("label,duration\n")
        for label, duration in record.intervals:
            fh.write(f"{label},{duration:.17g}\n")

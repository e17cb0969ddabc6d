"""Open- and closed-loop integration of the reservoir equations.

The open loop is the input-driven system
``dr/dt = gamma * (-r + tanh(M r + sigma * W_in u(t)))``;
the closed loop replaces ``u`` with the trained readout
``psi(r) = W1 r + W2 r^2``.  Both are integrated with fixed-step RK4 at
the network's step ``tau``; the mid-stage input is the average of the two
bracketing samples.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .defaults import DIVERGENCE_BOUND
from .errors import DivergenceError, InvalidSpecError
from .netgen import ReservoirNet
from .taskgen import Trajectory


@dataclass(frozen=True)
class StateTrajectory:
    """Reservoir states sampled every `step` time units; states[i] in R^N."""

    step: float
    states: np.ndarray  # shape (K, N)

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.states)) * self.step

    def to_csv(self, path) -> None:
        # Full state dumps are large; callers gate this behind a flag.
        header = "t," + ",".join(f"r_{i+1}" for i in range(self.n))
        data = np.column_stack([self.times, self.states])
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


@dataclass(frozen=True)
class TrainedReadout:
    """D x 2N readout matrix, split into linear and square halves.

    ``provenance`` records how the readout was produced (rho, x_cen, mode,
    seeds, beta) so that closed-loop experiments are reproducible from the
    readout alone.
    """

    w_out: np.ndarray  # shape (D, 2N)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.w_out.ndim != 2 or self.w_out.shape[1] % 2 != 0:
            raise InvalidSpecError("readout matrix must be D x 2N")

    @property
    def n(self) -> int:
        return self.w_out.shape[1] // 2

    @property
    def d(self) -> int:
        return self.w_out.shape[0]

    @property
    def w1(self) -> np.ndarray:
        """Linear half (first N columns); a view, not a copy."""
        return self.w_out[:, : self.n]

    @property
    def w2(self) -> np.ndarray:
        """Square half (last N columns); a view, not a copy."""
        return self.w_out[:, self.n :]

    @property
    def rho(self) -> float:
        return float(self.provenance["rho"])

    def with_zero_square(self) -> "TrainedReadout":
        """A copy whose square half is exactly zero (odd closed loop)."""
        w = self.w_out.copy()
        w[:, self.n :] = 0.0
        return TrainedReadout(w, dict(self.provenance))


def _csr_parts(net: ReservoirNet, rho: float):
    m = net.m_csr(rho)
    return (
        np.ascontiguousarray(m.data, dtype=np.float64),
        np.ascontiguousarray(m.indices),
        np.ascontiguousarray(m.indptr),
    )


def _resolve_rho(readout: TrainedReadout, rho) -> float:
    if rho is not None:
        return float(rho)
    return readout.rho


def readout_apply(readout: TrainedReadout, r: np.ndarray) -> np.ndarray:
    """Project a reservoir state (or stack of states) to the task plane.

    Accepts a single N-vector or an array of shape (K, N); returns the
    matching (D,) or (K, D) array.
    """
    r = np.asarray(r)
    if r.shape[-1] != readout.n:
        raise InvalidSpecError(
            f"state length {r.shape[-1]} does not match readout size {readout.n}"
        )
    return r @ readout.w1.T + (r * r) @ readout.w2.T


def integrate_open_loop(
    net: ReservoirNet,
    input_traj: Trajectory,
    r0: np.ndarray,
    rho: float = 1.0,
) -> StateTrajectory:
    """Drive the open loop with a sampled input; states align with samples."""
    if abs(input_traj.step - net.tau) > 1e-12:
        raise InvalidSpecError(
            f"input step {input_traj.step} must equal the network step {net.tau}"
        )
    r0 = np.ascontiguousarray(r0, dtype=np.float64)
    if not np.all(np.isfinite(r0)):
        raise InvalidSpecError("initial state must be finite")
    mdata, mind, mptr = _csr_parts(net, rho)
    u = np.ascontiguousarray(input_traj.samples, dtype=np.float64)
    states, bad = kernels.open_loop_rk4(
        mdata, mind, mptr, net.w_in, net.sigma, net.gamma, net.tau, u, r0
    )
    if bad != kernels.NO_DIVERGENCE:
        raise DivergenceError(bad)
    return StateTrajectory(net.tau, states)


def integrate_closed_loop(
    net: ReservoirNet,
    readout: TrainedReadout,
    r0: np.ndarray,
    n_steps: int,
    rho: float | None = None,
    state_stride: int = 1,
    bound: float = DIVERGENCE_BOUND,
) -> tuple[StateTrajectory, Trajectory]:
    """Run the autonomous loop; returns states and their projection.

    The projection is recorded at every step; states every `state_stride`
    steps (full state histories at N = 1000 are memory-heavy).  Any
    component leaving [-bound, bound] raises `DivergenceError` - closed-
    loop states cannot legitimately leave (-1, 1).
    """
    rho = _resolve_rho(readout, rho)
    r0 = np.ascontiguousarray(r0, dtype=np.float64)
    mdata, mind, mptr = _csr_parts(net, rho)
    states, proj, _, bad = kernels.closed_loop_rk4(
        mdata, mind, mptr, net.w_in,
        np.ascontiguousarray(readout.w1), np.ascontiguousarray(readout.w2),
        net.sigma, net.gamma, net.tau, r0, int(n_steps), int(state_stride), bound,
    )
    if bad != kernels.NO_DIVERGENCE:
        raise DivergenceError(bad)
    return (
        StateTrajectory(net.tau * state_stride, states),
        Trajectory(net.tau, proj),
    )


def closed_loop_tail(
    net: ReservoirNet,
    readout: TrainedReadout,
    r0: np.ndarray,
    n_steps: int,
    n_tail: int,
    rho: float | None = None,
    bound: float = DIVERGENCE_BOUND,
) -> tuple[Trajectory | None, np.ndarray, int | None]:
    """Memory-light closed-loop run keeping only the final projections.

    Returns (tail trajectory, final state, divergence index or None); a
    diverged run returns ``None`` for the trajectory instead of raising,
    so grid sweeps can record the failure and continue.
    """
    rho = _resolve_rho(readout, rho)
    r0 = np.ascontiguousarray(r0, dtype=np.float64)
    mdata, mind, mptr = _csr_parts(net, rho)
    tail, r_final, bad = kernels.closed_loop_tail(
        mdata, mind, mptr, net.w_in,
        np.ascontiguousarray(readout.w1), np.ascontiguousarray(readout.w2),
        net.sigma, net.gamma, net.tau, r0, int(n_steps), int(n_tail), bound,
    )
    if bad != kernels.NO_DIVERGENCE:
        return None, r_final, int(bad)
    return Trajectory(net.tau, tail), r_final, None


def closed_loop_rate(
    net: ReservoirNet,
    readout: TrainedReadout,
    r: np.ndarray,
    rho: float | None = None,
) -> np.ndarray:
    """The closed-loop vector field at a single state (reference path)."""
    rho = _resolve_rho(readout, rho)
    m = net.m_csr(rho)
    a = m @ r + net.sigma * net.w_in @ readout_apply(readout, r)
    return net.gamma * (-r + np.tanh(a))


def closed_loop_jacobian(
    net: ReservoirNet,
    readout: TrainedReadout,
    r: np.ndarray,
    rho: float | None = None,
) -> np.ndarray:
    """Analytic Jacobian of the closed-loop vector field at state r.

    J = gamma * (-I + diag(1 - tanh^2 a) (M + sigma W_in (W1 + 2 W2 diag r)))
    with a the closed-loop activation argument at r.
    """
    rho = _resolve_rho(readout, rho)
    r = np.asarray(r, dtype=np.float64)
    m = net.m_csr(rho)
    a = m @ r + net.sigma * net.w_in @ readout_apply(readout, r)
    gain = 1.0 - np.tanh(a) ** 2
    inner = m.toarray() if hasattr(m, "toarray") else np.array(m)
    inner = inner + net.sigma * net.w_in @ (readout.w1 + 2.0 * readout.w2 * r)
    jac = gain[:, None] * inner
    np.fill_diagonal(jac, jac.diagonal() - 1.0)
    return net.gamma * jac


def jacobian_apply(
    net: ReservoirNet,
    readout: TrainedReadout,
    r: np.ndarray,
    v: np.ndarray,
    rho: float | None = None,
) -> np.ndarray:
    """J(r) @ v without forming the N x N Jacobian (v may be N x k).

    Used by the variational Lyapunov and monodromy integrations.
    """
    rho = _resolve_rho(readout, rho)
    m = net.m_csr(rho)
    a = m @ r + net.sigma * net.w_in @ readout_apply(readout, r)
    gain = 1.0 - np.tanh(a) ** 2
    rv = r[:, None] * v if v.ndim == 2 else r * v
    lifted = readout.w1 @ v + 2.0 * (readout.w2 @ rv)
    inner = m @ v + net.sigma * net.w_in @ lifted
    if v.ndim == 2:
        return net.gamma * (-v + gain[:, None] * inner)
    return net.gamma * (-v + gain * inner)

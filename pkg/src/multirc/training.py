"""Ridge-regression training of the readout, single- and multi-attractor.

Training drives the open loop with each target signal from the zero state,
discards the listening (washout) interval, stacks the quadratic features
(r, r^2) of the remaining response into a data matrix per target, and
solves the regularised normal equations for the readout.  For several
targets the per-target blocks are concatenated columnwise; the network and
all training parameters are identical across targets.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .defaults import BETA, T_LISTEN, T_TRAIN, TAU
from .dynamics import StateTrajectory, TrainedReadout, integrate_open_loop
from .errors import InvalidSpecError, RankDeficiencyError
from .netgen import ReservoirNet
from .taskgen import OrbitSpec, Trajectory, generate_orbit


@dataclass(frozen=True)
class TrainingParams:
    t_listen: float = T_LISTEN
    t_train: float = T_TRAIN
    beta: float = BETA
    tau: float = TAU

    def __post_init__(self):
        if not (0 < self.t_listen < self.t_train):
            raise InvalidSpecError(
                f"need 0 < t_listen < t_train, got {self.t_listen}, {self.t_train}"
            )
        if self.beta < 0:
            raise InvalidSpecError(f"regulariser must be nonnegative, got {self.beta}")

    @property
    def listen_index(self) -> int:
        return int(round(self.t_listen / self.tau))

    @property
    def train_index(self) -> int:
        return int(round(self.t_train / self.tau))


@dataclass(frozen=True)
class DataMatrices:
    """Columnwise-aligned feature and target matrices for the regression."""

    x: np.ndarray  # 2N x K, column j = (r[l*+j], r[l*+j]^2)
    y: np.ndarray  # D x K, column j = u[l*+j]

    @property
    def k(self) -> int:
        return self.x.shape[1]


def feature_map(r: np.ndarray) -> np.ndarray:
    """Stack a state and its componentwise square: R^N -> R^2N."""
    r = np.asarray(r)
    return np.concatenate([r, r * r], axis=-1)


def assemble_data_matrices(
    states: StateTrajectory, inputs: Trajectory, params: TrainingParams
) -> DataMatrices:
    """Columns run from the listening index l* to the training index t* inclusive."""
    l_star = params.listen_index
    t_star = params.train_index
    if len(states.states) <= t_star or len(inputs.samples) <= t_star:
        raise InvalidSpecError(
            f"trajectory too short: need at least {t_star + 1} samples, "
            f"got {len(states.states)} states / {len(inputs.samples)} inputs"
        )
    r_block = states.states[l_star : t_star + 1]  # K x N
    x = np.empty((2 * states.n, t_star - l_star + 1))
    x[: states.n] = r_block.T
    x[states.n :] = (r_block * r_block).T
    y = np.ascontiguousarray(inputs.samples[l_star : t_star + 1].T)
    return DataMatrices(x=x, y=y)


def ridge_solve(x_c: np.ndarray, y_c: np.ndarray, beta: float) -> np.ndarray:
    """W = Y X^T (X X^T + beta I)^(-1), via an SPD solve (no explicit inverse)."""
    if x_c.shape[1] != y_c.shape[1]:
        raise InvalidSpecError(
            f"column counts disagree: {x_c.shape[1]} vs {y_c.shape[1]}"
        )
    gram = x_c @ x_c.T
    gram[np.diag_indices_from(gram)] += beta
    rhs = x_c @ y_c.T
    try:
        w_t = scipy.linalg.solve(gram, rhs, assume_a="pos")
    except np.linalg.LinAlgError:
        rank = np.linalg.matrix_rank(x_c @ x_c.T)
        raise RankDeficiencyError(rank, gram.shape[0]) from None
    return np.ascontiguousarray(w_t.T)


def gram_condition(x_c: np.ndarray, beta: float) -> float:
    """Condition number of the regularised Gram matrix (diagnostic)."""
    gram = x_c @ x_c.T
    gram[np.diag_indices_from(gram)] += beta
    return float(np.linalg.cond(gram))


def train_multifunctional(
    net: ReservoirNet,
    rho: float,
    orbit_specs: Sequence[OrbitSpec],
    params: TrainingParams,
) -> tuple[TrainedReadout, list[np.ndarray]]:
    """Train one readout on the concatenated responses to several orbits.

    The same network (adjacency scaled to spectral radius rho) is driven by
    each orbit from the zero state; the per-orbit data matrices are
    concatenated columnwise before the ridge solve.  Also returns each
    orbit's reservoir state at the end of the drive, which initialises the
    closed loop on the corresponding attractor.
    """
    if not orbit_specs:
        raise InvalidSpecError("need at least one training orbit")
    taus = {spec.tau for spec in orbit_specs}
    if len(taus) != 1 or abs(next(iter(taus)) - params.tau) > 1e-12:
        raise InvalidSpecError("all orbits must share the training step tau")

    d = net.d  # orbits are planar; the net must be built with d = 2
    n_steps = params.train_index
    k_per = params.train_index - params.listen_index + 1
    n_orbits = len(orbit_specs)

    x_c = np.empty((2 * net.n, n_orbits * k_per))
    y_c = np.empty((d, n_orbits * k_per))
    final_states: list[np.ndarray] = []
    for j, spec in enumerate(orbit_specs):
        orbit = generate_orbit(spec, n_steps)
        states = integrate_open_loop(net, orbit, np.zeros(net.n), rho=rho)
        block = assemble_data_matrices(states, orbit, params)
        x_c[:, j * k_per : (j + 1) * k_per] = block.x
        y_c[:, j * k_per : (j + 1) * k_per] = block.y
        final_states.append(states.states[-1].copy())
        del states, block

    w_out = ridge_solve(x_c, y_c, params.beta)
    provenance = {
        "rho": float(rho),
        "x_cen": float(orbit_specs[0].x_cen),
        "mode": "same" if all(s.winding == orbit_specs[0].winding for s in orbit_specs)
        else "opposite",
        "seeds": int(net.seed),
        "beta": float(params.beta),
    }
    return TrainedReadout(w_out, provenance), final_states


def save_readout(readout: TrainedReadout, path) -> None:
    """Text archive: one provenance header line, then D rows of 2N values."""
    prov = readout.provenance
    with open(path, "w") as fh:
        fh.write(
            "multirc-readout 1 "
            + " ".join(f"{k}={prov[k]!r}" for k in sorted(prov))
            + "\n"
        )
        fh.write(f"shape {readout.d} {2 * readout.n}\n")
        for row in readout.w_out:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_readout(path) -> TrainedReadout:
    with open(path) as fh:
        head = fh.readline().split()
        if head[:1] != ["multirc-readout"]:
            raise InvalidSpecError(f"{path}: not a multirc readout file")
        provenance = {}
        for item in head[2:]:
            key, value = item.split("=", 1)
            provenance[key] = ast.literal_eval(value)
        d, two_n = (int(v) for v in fh.readline().split()[1:])
        w_out = np.loadtxt(fh, ndmin=2)
    if w_out.shape != (d, two_n):
        raise InvalidSpecError(f"{path}: shape mismatch")
    return TrainedReadout(np.ascontiguousarray(w_out), provenance)

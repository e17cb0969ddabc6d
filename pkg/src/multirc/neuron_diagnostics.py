"""Internal-state views of a multifunctional reservoir.

Two reconstructed attractors are realised by the same network, so the
interesting object is the per-neuron difference between the two closed-
loop trajectories: its histogram stream shows that the attractors are
carried by genuinely different internal states even where their projected
outputs cross.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import spearmanr

from .dynamics import TrainedReadout, integrate_closed_loop
from .errors import InvalidSpecError
from .netgen import ReservoirNet

# tanh confines states to (-1, 1); differences to (-2, 2).
BIN_RANGE = (-2.0, 2.0)
BIN_WIDTH = 0.02
N_BINS = int(round((BIN_RANGE[1] - BIN_RANGE[0]) / BIN_WIDTH))  # 200
BIN_EDGES = BIN_RANGE[0] + BIN_WIDTH * np.arange(N_BINS + 1)


@dataclass(frozen=True)
class DifferenceStream:
    """Histogram stream of per-neuron differences between two runs."""

    times: np.ndarray  # (T,)
    histograms: np.ndarray  # (T, N_BINS) integer counts, each row sums to N
    x_gap: np.ndarray  # (T,) first projected component, run A minus run B

    def __post_init__(self):
        if not (len(self.times) == len(self.histograms) == len(self.x_gap)):
            raise InvalidSpecError("stream fields must share their length")
        if self.histograms.shape[1] != N_BINS:
            raise InvalidSpecError(f"histograms must have {N_BINS} bins")

    @property
    def n(self) -> int:
        return int(self.histograms[0].sum())

    def spread(self) -> np.ndarray:
        """Per-time standard deviation of the binned differences."""
        centres = BIN_EDGES[:-1] + 0.5 * BIN_WIDTH
        total = self.histograms.sum(axis=1)
        mean = (self.histograms @ centres) / total
        second = (self.histograms @ centres**2) / total
        return np.sqrt(np.maximum(second - mean**2, 0.0))

    def gap_spread_correlation(self) -> float:
        """Spearman rank correlation of |x_gap| against the histogram spread.

        Positive for a multifunctional run: the wider the output gap, the
        wider the internal difference distribution.
        """
        corr = spearmanr(np.abs(self.x_gap), self.spread()).statistic
        return float(corr)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("t,x_gap," + ",".join(f"bin_{i}" for i in range(N_BINS)) + "\n")
            for t, gap, row in zip(self.times, self.x_gap, self.histograms):
                fh.write(f"{t:.17g},{gap:.17g}," + ",".join(str(c) for c in row) + "\n")


def paired_run_difference(
    net: ReservoirNet,
    readout: TrainedReadout,
    r0_a: np.ndarray,
    r0_b: np.ndarray,
    span: float,
    rho: float | None = None,
) -> DifferenceStream:
    """Closed-loop runs from two starts; per-step difference histograms.

    Each time step contributes one histogram of the N component
    differences r_A(t) - r_B(t) (every count lands in some bin: states
    live in (-1, 1), differences in (-2, 2)) plus the gap between the two
    projected x-outputs.
    """
    n_steps = int(round(span / net.tau))
    states_a, proj_a = integrate_closed_loop(net, readout, np.asarray(r0_a), n_steps, rho=rho)
    states_b, proj_b = integrate_closed_loop(net, readout, np.asarray(r0_b), n_steps, rho=rho)
    diff = states_a.states - states_b.states
    histograms = np.empty((len(diff), N_BINS), dtype=np.int64)
    for t in range(len(diff)):
        histograms[t] = np.histogram(diff[t], bins=BIN_EDGES)[0]
    return DifferenceStream(
        times=states_a.times,
        histograms=histograms,
        x_gap=proj_a.samples[:, 0] - proj_b.samples[:, 0],
    )


def neuron_traces(states, indices) -> np.ndarray:
    """Component time series for the requested neuron indices, shape (T, k)."""
    arr = states.states
    for i in indices:
        if not 0 <= i < arr.shape[1]:
            raise InvalidSpecError(
                f"neuron index {i} out of range for a network of size {arr.shape[1]}"
            )
    return arr[:, list(indices)]

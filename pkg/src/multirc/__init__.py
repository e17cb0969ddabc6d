"""Reservoir-computer multifunctionality laboratory.

Trains a continuous-time reservoir computer to host several coexisting
attractors at once (the twin-circle reconstruction task) and analyses the
resulting closed-loop dynamics: classification, parameter sweeps, basins
of attraction, branch continuation, Floquet and Lyapunov spectra, and the
odd-symmetry structure of the trained readouts.
"""

__version__ = "1.0.0"

from .analysis import (
    AttractorLabel, Kind, LyapunovEstimate, ResidenceRecord,
    classify_prediction, estimate_period, largest_lyapunov,
    residence_intervals, roundness, winding_direction,
)
from .basins import BasinGrid, attractors_match, map_basins, mirror_consistency
from .config import ExperimentConfig, load_config
from .continuation import BifurcationBranch, detect_period_doubling, track_branch
from .dynamics import (
    StateTrajectory, TrainedReadout, closed_loop_jacobian, closed_loop_rate,
    integrate_closed_loop, integrate_open_loop, jacobian_apply, readout_apply,
)
from .errors import (
    ConfigError, DivergenceError, InvalidSpecError, MultircError,
    NetGenerationError, NotOnCycleError, RankDeficiencyError,
    UndefinedRatioError,
)
from .floquet import MonodromyResult, floquet_multipliers, monodromy, refine_period
from .harness import run_experiment, run_sweep
from .netgen import (
    ReservoirNet, build_adjacency, build_input_matrix, build_network,
    load_network, rescale_to_rho, save_network, spectral_radius,
)
from .symmetry import (
    SymmetryReport, check_b9_pair, half_period_antisymmetry,
    mirror_trajectory_residual, square_readout_ratio, train_mirror_pair,
)
from .taskgen import OrbitSpec, Trajectory, circle_pair, generate_orbit
from .training import (
    TrainingParams, feature_map, ridge_solve, train_multifunctional,
)

__all__ = [name for name in dir() if not name.startswith("_")]

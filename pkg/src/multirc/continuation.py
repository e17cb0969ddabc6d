"""Attractor continuation across a spectral-radius sweep.

Follows one closed-loop attractor while the spectral radius is stepped,
retraining the readout at every step and seeding each run with the final
reservoir state of the previous one.  A branch ends when the settled
attractor no longer matches its predecessor under the catalog identity
rule, which is how period-doubling cascades and crises show up.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import defaults
from .analysis import estimate_period
from .basins import CatalogEntry, attractors_match, characterise_tail
from .dynamics import closed_loop_tail
from .errors import InvalidSpecError
from .netgen import ReservoirNet
from .taskgen import OrbitSpec
from .training import TrainingParams, train_multifunctional

# Tolerated ratio of consecutive periods for a period-doubling detection.
DOUBLING_RATIO = (1.9, 2.1)


@dataclass(frozen=True)
class BranchPoint:
    param: float
    entry: CatalogEntry
    extrema: np.ndarray  # maxima-cluster values of x(t); empty if aperiodic

    @property
    def period(self) -> Optional[float]:
        return self.entry.period


@dataclass(frozen=True)
class BifurcationBranch:
    """Points of one tracked branch; `lost_at` marks where tracking failed.

    `lost_at` is None when the branch survives the whole sweep; otherwise
    it is the parameter value at which the settled attractor stopped
    matching its predecessor (that point is still recorded).
    """

    points: list
    lost_at: Optional[float]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("param,period,label,extrema\n")
            for p in self.points:
                period = "" if p.period is None else f"{p.period:.17g}"
                extrema = ";".join(f"{v:.17g}" for v in p.extrema)
                fh.write(f"{p.param:.17g},{period},{p.entry.kind},{extrema}\n")


def track_branch(
    net: ReservoirNet,
    orbit_specs: Sequence[OrbitSpec],
    params: TrainingParams,
    rhos: Sequence[float],
    which: int = 0,
    settle: float = defaults.SETTLE_TIME,
    window: float = defaults.ASSESS_WINDOW,
) -> BifurcationBranch:
    """Track the attractor seeded by training orbit `which` across `rhos`.

    At each parameter value the readout is retrained from scratch; the
    first run starts from the listening state of the designated orbit and
    every later run starts from the previous run's final reservoir state.
    Each run settles for `settle` time units before its final `window` is
    characterised.
    """
    if len(rhos) < 2:
        raise InvalidSpecError("a branch needs at least 2 parameter values")
    if not 0 <= which < len(orbit_specs):
        raise InvalidSpecError(f"orbit index {which} out of range")
    b = orbit_specs[which].b
    n_steps = int(round((settle + window) / params.tau))
    n_tail = int(round(window / params.tau))

    points: list[BranchPoint] = []
    prev_entry: Optional[CatalogEntry] = None
    r0: Optional[np.ndarray] = None
    lost_at: Optional[float] = None
    for rho in rhos:
        readout, finals = train_multifunctional(net, rho, orbit_specs, params)
        if r0 is None:
            r0 = finals[which]
        tail, r_final, bad = closed_loop_tail(
            net, readout, r0, n_steps, n_tail, rho=rho
        )
        if bad is not None or tail is None:
            lost_at = float(rho)
            break
        entry = characterise_tail(tail, b)
        est = estimate_period(tail, amp_tol=defaults.amp_tol(b))
        extrema = est[1] if est is not None else np.empty(0)
        points.append(BranchPoint(param=float(rho), entry=entry, extrema=extrema))
        if prev_entry is not None and not attractors_match(entry, prev_entry, b):
            lost_at = float(rho)
            break
        prev_entry = entry
        r0 = r_final
    return BifurcationBranch(points=points, lost_at=lost_at)


def detect_period_doubling(branch: BifurcationBranch) -> list[float]:
    """Parameters at which the period doubles between consecutive points.

    A doubling requires both the period ratio to fall in DOUBLING_RATIO
    and the count of distinct maxima clusters to double.  Returns the
    parameter value of the doubled point.
    """
    lo, hi = DOUBLING_RATIO
    found = []
    for prev, cur in zip(branch.points, branch.points[1:]):
        if prev.period is None or cur.period is None or prev.period <= 0:
            continue
        ratio = cur.period / prev.period
        if lo <= ratio <= hi and len(cur.extrema) == 2 * len(prev.extrema):
            found.append(cur.param)
    return found

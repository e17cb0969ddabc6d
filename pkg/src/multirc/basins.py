"""Basins of attraction in the task plane.

Each grid point (x, y) is turned into a reservoir initial condition by
driving the open loop with the constant input (x, y) from the zero state;
the closed loop then runs from that state and its final window is matched
against a catalog of attractors that grows as the grid is scanned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from . import defaults
from .analysis import estimate_period, winding_direction
from .dynamics import TrainedReadout, closed_loop_tail
from .errors import InvalidSpecError
from .kernels import const_drive_rk4
from .netgen import ReservoirNet
from .taskgen import Trajectory

# Catalog-matching shape tolerance, as a fraction of the orbit radius.
SHAPE_TOL_REL = 0.1

# Upper bound on the points kept per attractor for Hausdorff comparisons.
_SHAPE_POINTS = 200

DIVERGED_INDEX = -1


@dataclass(frozen=True)
class CatalogEntry:
    """One attractor found while scanning the grid."""

    kind: str  # "fixed_point" | "cycle" | "non_periodic"
    centre: np.ndarray
    winding: int
    period: Optional[float]
    shape: np.ndarray  # subsampled final-window points, (K, 2)


@dataclass(frozen=True)
class BasinGrid:
    """Attractor index per grid cell plus the attractor catalog.

    ``index[i, j]`` labels the cell at ``(xs[j], ys[i])``; -1 marks a
    diverged run.
    """

    xs: np.ndarray
    ys: np.ndarray
    index: np.ndarray  # (len(ys), len(xs)) int
    catalog: list

    def entry(self, i: int, j: int) -> Optional[CatalogEntry]:
        k = self.index[i, j]
        return None if k == DIVERGED_INDEX else self.catalog[k]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("x,y,catalog_index,kind,winding\n")
            for i, y in enumerate(self.ys):
                for j, x in enumerate(self.xs):
                    k = self.index[i, j]
                    if k == DIVERGED_INDEX:
                        fh.write(f"{x:.17g},{y:.17g},-1,diverged,0\n")
                    else:
                        e = self.catalog[k]
                        fh.write(f"{x:.17g},{y:.17g},{k},{e.kind},{e.winding}\n")

    def catalog_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write("catalog_index,kind,winding,centre_x,centre_y,period\n")
            for k, e in enumerate(self.catalog):
                period = "" if e.period is None else f"{e.period:.17g}"
                fh.write(
                    f"{k},{e.kind},{e.winding},"
                    f"{e.centre[0]:.17g},{e.centre[1]:.17g},{period}\n"
                )


def _subsample(points: np.ndarray, limit: int = _SHAPE_POINTS) -> np.ndarray:
    stride = max(1, len(points) // limit)
    return np.ascontiguousarray(points[::stride])


def _hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])


def characterise_tail(tail: Trajectory, b: float) -> CatalogEntry:
    """Reduce a settled final window to a catalog entry."""
    samples = tail.samples
    centre = samples.mean(axis=0)
    motion = float(np.max(np.ptp(samples, axis=0)))
    if motion < defaults.fp_tol(b):
        return CatalogEntry(
            "fixed_point", centre=centre, winding=0, period=None,
            shape=centre[None, :],
        )
    winding = winding_direction(tail, centre)
    est = estimate_period(tail, amp_tol=defaults.amp_tol(b))
    if est is None:
        return CatalogEntry(
            "non_periodic", centre=centre, winding=winding, period=None,
            shape=_subsample(samples),
        )
    return CatalogEntry(
        "cycle", centre=centre, winding=winding, period=est[0],
        shape=_subsample(samples),
    )


def attractors_match(a: CatalogEntry, b_entry: CatalogEntry, b: float) -> bool:
    """Catalog identity rule: kind, winding, centre and shape must agree.

    Centres must lie within the centre tolerance and the symmetric
    Hausdorff distance between the stored shapes must stay below
    ``SHAPE_TOL_REL * b``.
    """
    if a.kind != b_entry.kind or a.winding != b_entry.winding:
        return False
    if float(np.linalg.norm(a.centre - b_entry.centre)) > defaults.centre_tol(b):
        return False
    return _hausdorff(a.shape, b_entry.shape) < SHAPE_TOL_REL * b


def point_response(
    net: ReservoirNet,
    readout: TrainedReadout,
    point,
    rho: float | None = None,
    listen_time: float = defaults.T_LISTEN,
    t_predict: float = defaults.T_PREDICT,
    window: float = defaults.ASSESS_WINDOW,
) -> Optional[Trajectory]:
    """Final closed-loop window for one grid point, or None on divergence.

    The reservoir is first driven from the zero state by the constant
    input ``point`` for ``listen_time`` (the drive contracts at rate gamma,
    so this settles the state onto the point's response); the closed loop
    then runs for ``t_predict``.
    """
    rho_val = readout.rho if rho is None else float(rho)
    m = net.m_csr(rho_val)
    mdata = np.ascontiguousarray(m.data, dtype=np.float64)
    mind = np.ascontiguousarray(m.indices)
    mptr = np.ascontiguousarray(m.indptr)
    u_const = np.ascontiguousarray(point, dtype=np.float64)
    if u_const.shape != (net.d,):
        raise InvalidSpecError(f"grid point must have {net.d} components")
    r0 = const_drive_rk4(
        mdata, mind, mptr, net.w_in, net.sigma, net.gamma, net.tau,
        u_const, np.zeros(net.n), int(round(listen_time / net.tau)),
    )
    n_steps = int(round(t_predict / net.tau))
    n_tail = min(n_steps, int(round(window / net.tau)))
    tail, _, _bad = closed_loop_tail(net, readout, r0, n_steps, n_tail, rho=rho_val)
    return tail


def map_basins(
    net: ReservoirNet,
    readout: TrainedReadout,
    xs: np.ndarray,
    ys: np.ndarray,
    b: float = defaults.ORBIT_RADIUS,
    rho: float | None = None,
    listen_time: float = defaults.T_LISTEN,
    t_predict: float = defaults.T_PREDICT,
    window: float = defaults.ASSESS_WINDOW,
) -> BasinGrid:
    """Scan a rectangular grid of plane initial conditions.

    Cells are visited row by row (increasing y, then increasing x) and
    each settled attractor is matched against the catalog in insertion
    order; the first match wins, otherwise a new entry is appended.  The
    scan order makes the catalog indices deterministic.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    index = np.empty((len(ys), len(xs)), dtype=np.int64)
    catalog: list[CatalogEntry] = []
    for i, y in enumerate(ys):
        for j, x in enumerate(xs):
            tail = point_response(
                net, readout, (x, y), rho=rho,
                listen_time=listen_time, t_predict=t_predict, window=window,
            )
            if tail is None or not np.all(np.isfinite(tail.samples)):
                index[i, j] = DIVERGED_INDEX
                continue
            entry = characterise_tail(tail, b)
            for k, known in enumerate(catalog):
                if attractors_match(entry, known, b):
                    index[i, j] = k
                    break
            else:
                catalog.append(entry)
                index[i, j] = len(catalog) - 1
    return BasinGrid(xs=xs, ys=ys, index=index, catalog=catalog)


def mirror_consistency(grid: BasinGrid, b: float = defaults.ORBIT_RADIUS) -> float:
    """Fraction of cells whose attractor mirrors that of the negated cell.

    Requires grids symmetric under negation (xs == -xs reversed, same for
    ys).  Cell (x, y) is consistent with cell (-x, -y) when both diverge,
    or when their kinds and windings agree and their centres are exact
    negatives within the centre tolerance (a point reflection preserves
    the rotation direction).
    """
    if not (np.allclose(grid.xs, -grid.xs[::-1]) and np.allclose(grid.ys, -grid.ys[::-1])):
        raise InvalidSpecError("mirror consistency needs a grid symmetric about 0")
    ny, nx = grid.index.shape
    good = 0
    total = 0
    for i in range(ny):
        for j in range(nx):
            if i == ny - 1 - i and j == nx - 1 - j:
                continue  # the origin is its own mirror image
            total += 1
            a = grid.entry(i, j)
            m = grid.entry(ny - 1 - i, nx - 1 - j)
            if a is None or m is None:
                good += a is None and m is None
                continue
            ok = (
                a.kind == m.kind
                and a.winding == m.winding
                and float(np.linalg.norm(a.centre + m.centre)) <= defaults.centre_tol(b)
            )
            good += ok
    return good / total

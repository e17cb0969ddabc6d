"""Reservoir network construction with reproducible, counter-based randomness.

The adjacency matrix is Erdos-Renyi over all entries (the diagonal may be
nonzero): each entry is independently nonzero with probability ``p`` and
the nonzero values are uniform on (-1, 1).  The matrix is stored once at
unit spectral radius; sweeps over the spectral radius then reduce to a
scalar multiplication.

All randomness comes from numpy's Philox counter-based bit generator so
that a (n, p, seed) triple produces bitwise-identical matrices on every
platform.  A master seed derives the adjacency and input sub-seeds through
``numpy.random.SeedSequence``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidSpecError, NetGenerationError

# Below this size sparse storage buys nothing; keep a dense array.
DENSE_FALLBACK_N = 64

# Spectral radii below this are treated as degenerate draws.
MIN_SPECTRAL_RADIUS = 1e-12

MAX_REGENERATION_ATTEMPTS = 10


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed)))


def spectral_radius(m) -> float:
    """Largest absolute eigenvalue, via a dense nonsymmetric eigensolve.

    Handles complex conjugate dominant pairs; intended for n <= 2000.
    """
    dense = m.toarray() if sp.issparse(m) else np.asarray(m)
    return float(np.max(np.abs(np.linalg.eigvals(dense))))


def build_adjacency(n: int, p: float, seed: int):
    """Draw the adjacency matrix and rescale it to unit spectral radius.

    Returns a scipy CSR array for n >= 64, a dense ndarray below.  If a
    draw has spectral radius below 1e-12 the sub-seed is incremented and
    the draw repeated; after 10 failures a `NetGenerationError` is raised.
    """
    if not (0 < p <= 1):
        raise InvalidSpecError(f"connection probability must be in (0, 1], got {p}")
    if n < 2:
        raise InvalidSpecError(f"need at least 2 neurons, got {n}")

    for attempt in range(MAX_REGENERATION_ATTEMPTS):
        rng = _rng(seed + attempt)
        mask = rng.random((n, n)) < p
        values = rng.uniform(-1.0, 1.0, size=(n, n))
        m = np.where(mask, values, 0.0)
        radius = spectral_radius(m)
        if radius >= MIN_SPECTRAL_RADIUS:
            m /= radius
            if n >= DENSE_FALLBACK_N:
                return sp.csr_array(m)
            return m
    raise NetGenerationError(
        f"adjacency generation failed {MAX_REGENERATION_ATTEMPTS} times in a row "
        f"(spectral radius below {MIN_SPECTRAL_RADIUS}) for n={n}, p={p}, seed={seed}"
    )


def rescale_to_rho(m_unit, rho: float):
    """Scale a unit-spectral-radius matrix so its spectral radius equals rho."""
    if rho < 0:
        raise InvalidSpecError(f"spectral radius must be nonnegative, got {rho}")
    return m_unit * rho


def build_input_matrix(n: int, d: int, seed: int) -> np.ndarray:
    """N x D input matrix with exactly one nonzero per row, uniform on (-1, 1)."""
    if n < 1 or d < 1:
        raise InvalidSpecError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    rng = _rng(seed)
    cols = rng.integers(0, d, size=n)
    values = rng.uniform(-1.0, 1.0, size=n)
    w_in = np.zeros((n, d))
    w_in[np.arange(n), cols] = values
    return w_in


@dataclass(frozen=True)
class ReservoirNet:
    """Immutable reservoir: unit-radius adjacency, input matrix, parameters.

    The open-loop vector field is
    ``dr/dt = gamma * (-r + tanh(rho * m_unit @ r + sigma * w_in @ u))``
    with the spectral radius ``rho`` supplied per experiment.
    """

    n: int
    d: int
    m_unit: object = field(repr=False)  # csr_array or ndarray, unit spectral radius
    w_in: np.ndarray = field(repr=False)
    sigma: float
    gamma: float
    tau: float
    seed: int

    def __post_init__(self):
        if self.gamma <= 0:
            raise InvalidSpecError(f"decay rate must be positive, got {self.gamma}")
        if self.sigma < 0:
            raise InvalidSpecError(f"input strength must be nonnegative, got {self.sigma}")
        if self.tau <= 0:
            raise InvalidSpecError(f"integration step must be positive, got {self.tau}")

    def m_csr(self, rho: float = 1.0) -> sp.csr_array:
        """The adjacency at spectral radius rho, in CSR form."""
        m = rescale_to_rho(self.m_unit, rho)
        return m if sp.issparse(m) else sp.csr_array(m)


def build_network(
    n: int,
    d: int,
    p: float,
    sigma: float,
    gamma: float,
    tau: float,
    seed: int,
) -> ReservoirNet:
    """Construct a reservoir from a single master seed.

    The adjacency and input sub-seeds are derived deterministically from
    the master seed via `numpy.random.SeedSequence`.
    """
    sub_adj, sub_in = (int(s) for s in np.random.SeedSequence(seed).generate_state(2))
    m_unit = build_adjacency(n, p, sub_adj)
    w_in = build_input_matrix(n, d, sub_in)
    return ReservoirNet(
        n=n, d=d, m_unit=m_unit, w_in=w_in,
        sigma=sigma, gamma=gamma, tau=tau, seed=seed,
    )


_NET_FORMAT_VERSION = 1


def save_network(net: ReservoirNet, path) -> None:
    """Archive a network realisation as a text file.

    Format: a version line; a header line with the dimensions, scalar
    parameters and seed; one ``i j value`` coordinate line per nonzero of
    the unit-radius adjacency; then one per nonzero of the input matrix.
    Values are written in full decimal (round-trip) precision.
    """
    m = net.m_csr(1.0).tocoo()
    wi, wj = np.nonzero(net.w_in)
    with open(path, "w") as fh:
        fh.write(f"multirc-net {_NET_FORMAT_VERSION}\n")
        fh.write(
            f"n {net.n} d {net.d} sigma {net.sigma!r} gamma {net.gamma!r} "
            f"tau {net.tau!r} seed {net.seed}\n"
        )
        fh.write(f"m {m.nnz}\n")
        for i, j, v in zip(m.row, m.col, m.data):
            fh.write(f"{i} {j} {float(v)!r}\n")
        fh.write(f"w_in {len(wi)}\n")
        for i, j in zip(wi, wj):
            fh.write(f"{i} {j} {float(net.w_in[i, j])!r}\n")


def load_network(path) -> ReservoirNet:
    """Reload a network archived with `save_network`."""
    with open(path) as fh:
        magic = fh.readline().split()
        if magic[:1] != ["multirc-net"]:
            raise InvalidSpecError(f"{path}: not a multirc network file")
        head = fh.readline().split()
        fields = dict(zip(head[0::2], head[1::2]))
        n, d = int(fields["n"]), int(fields["d"])
        nnz = int(fh.readline().split()[1])
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz)
        for k in range(nnz):
            i, j, v = fh.readline().split()
            rows[k], cols[k], vals[k] = int(i), int(j), float(v)
        m = sp.coo_array((vals, (rows, cols)), shape=(n, n)).tocsr()
        m_unit = m if n >= DENSE_FALLBACK_N else m.toarray()
        n_in = int(fh.readline().split()[1])
        w_in = np.zeros((n, d))
        for _ in range(n_in):
            i, j, v = fh.readline().split()
            w_in[int(i), int(j)] = float(v)
    return ReservoirNet(
        n=n, d=d, m_unit=m_unit, w_in=w_in,
        sigma=float(fields["sigma"]), gamma=float(fields["gamma"]),
        tau=float(fields["tau"]), seed=int(fields["seed"]),
    )

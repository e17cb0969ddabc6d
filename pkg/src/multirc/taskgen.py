"""Circular-orbit training signals for the twin-circle reconstruction task.

The task asks a reservoir computer to reconstruct a coexistence of two
circles of equal radius whose centres sit at ``(x_cen, 0)`` and
``(-x_cen, 0)``.  Depending on the mode the circles rotate in opposite or
in the same direction; they overlap whenever ``|x_cen| <= b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import InvalidSpecError

Mode = Literal["opposite", "same"]


@dataclass(frozen=True)
class OrbitSpec:
    """One circular orbit, ``u(t) = (b_x cos t + x_cen, b_y sin t + y_cen)``.

    ``b_x`` and ``b_y`` are signed radii; their signs encode the rotation
    direction and phase convention.
    """

    b_x: float
    b_y: float
    x_cen: float
    y_cen: float
    tau: float

    def __post_init__(self):
        if self.tau <= 0:
            raise InvalidSpecError(f"sampling step must be positive, got {self.tau}")
        if self.b_x == 0 or self.b_y == 0:
            raise InvalidSpecError("signed radii must be nonzero")

    @property
    def b(self) -> float:
        """Unsigned orbit radius (requires |b_x| == |b_y|)."""
        return abs(self.b_x)

    @property
    def winding(self) -> int:
        """+1 for counter-clockwise parametrisation, -1 for clockwise."""
        return 1 if self.b_x * self.b_y > 0 else -1

    @property
    def centre(self) -> np.ndarray:
        return np.array([self.x_cen, self.y_cen])

    def negated(self) -> "OrbitSpec":
        """The orbit traced by ``-u(t)``, sample for sample."""
        return OrbitSpec(-self.b_x, -self.b_y, -self.x_cen, -self.y_cen, self.tau)


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled time series in the projected plane.

    ``samples[i]`` is the D-vector at time ``i * step``.
    """

    step: float
    samples: np.ndarray  # shape (K, D)

    def __post_init__(self):
        if self.samples.ndim != 2 or len(self.samples) < 2:
            raise InvalidSpecError("a trajectory needs at least 2 samples of shape (K, D)")

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.step

    @property
    def duration(self) -> float:
        return (len(self.samples) - 1) * self.step

    def tail(self, window: float) -> "Trajectory":
        """The final `window` time units (at least 2 samples)."""
        k = max(2, int(round(window / self.step)) + 1)
        return Trajectory(self.step, self.samples[-k:])

    def to_csv(self, path) -> None:
        header = "t," + ",".join(
            ("x", "y")[: self.dim] if self.dim <= 2 else (f"u_{i+1}" for i in range(self.dim))
        )
        data = np.column_stack([self.times, self.samples])
        np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


def generate_orbit(spec: OrbitSpec, n_steps: int) -> Trajectory:
    """Sample the circle at times 0, tau, ..., n_steps*tau (n_steps+1 points).

    Angles are evaluated as ``i * tau`` in double precision; no phase
    wrapping is applied.
    """
    if n_steps < 2:
        raise InvalidSpecError(f"need n_steps >= 2, got {n_steps}")
    t = np.arange(n_steps + 1) * spec.tau
    samples = np.column_stack(
        [spec.b_x * np.cos(t) + spec.x_cen, spec.b_y * np.sin(t) + spec.y_cen]
    )
    return Trajectory(spec.tau, samples)


def circle_pair(
    x_cen: float, b: float, mode: Mode, tau: float
) -> tuple[OrbitSpec, OrbitSpec]:
    """The two target orbits: centres at (x_cen, 0) and (-x_cen, 0).

    ``mode="opposite"`` flips the rotation direction of the second circle;
    ``mode="same"`` keeps both counter-clockwise.  The circles intersect
    iff ``|x_cen| <= b``.
    """
    if b <= 0:
        raise InvalidSpecError(f"orbit radius must be positive, got {b}")
    if mode not in ("opposite", "same"):
        raise InvalidSpecError(f"unknown mode {mode!r}")
    orbit_a = OrbitSpec(b, b, x_cen, 0.0, tau)
    bx_b = -b if mode == "opposite" else b
    orbit_b = OrbitSpec(bx_b, b, -x_cen, 0.0, tau)
    return orbit_a, orbit_b


def orbits_overlap(x_cen: float, b: float) -> bool:
    """True when the two circles of `circle_pair` share at least one point."""
    return abs(2 * x_cen) <= 2 * b

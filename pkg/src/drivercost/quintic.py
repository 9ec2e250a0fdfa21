"""Quintic polynomial trajectory segments.

Position over segment-local time tau in [0, duration] is

    s(tau) = c0*tau^5 + c1*tau^4 + c2*tau^3 + c3*tau^2 + c4*tau + c5

so ``coeffs`` is in descending power order and the initial state is
(c5, c4, 2*c3) = (position, velocity, acceleration) at tau=0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._kernels import quintic_table
from .errors import FitError


class TrajectoryPoint(NamedTuple):
    position: float
    velocity: float
    acceleration: float


@dataclass(frozen=True)
class QuinticSegment:
    coeffs: tuple[float, float, float, float, float, float]
    duration: float

    def __post_init__(self):
        if len(self.coeffs) != 6:
            raise ValueError(f"expected 6 coefficients, got {len(self.coeffs)}")
        if not self.duration > 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")

    def evaluate(self, tau: float) -> TrajectoryPoint:
        """Position, velocity and acceleration at local time tau (Horner)."""
        if not 0.0 <= tau <= self.duration:
            raise ValueError(f"tau={tau} outside [0, {self.duration}]")
        c0, c1, c2, c3, c4, c5 = self.coeffs
        pos = ((((c0 * tau + c1) * tau + c2) * tau + c3) * tau + c4) * tau + c5
        vel = (((5.0 * c0 * tau + 4.0 * c1) * tau + 3.0 * c2) * tau + 2.0 * c3) * tau + c4
        acc = ((20.0 * c0 * tau + 12.0 * c1) * tau + 6.0 * c2) * tau + 2.0 * c3
        return TrajectoryPoint(pos, vel, acc)

    def sample(self, dt: float, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(position, velocity, acceleration) arrays on the grid tau = i*dt."""
        return quintic_table(np.asarray(self.coeffs, dtype=float), dt, n)


def from_initial_state(
    p0: float, v0: float, a0: float, free: tuple[float, float, float], duration: float
) -> QuinticSegment:
    """Segment whose state at tau=0 is exactly (p0, v0, a0).

    ``free`` supplies the three high-order coefficients (c0, c1, c2); the
    low-order ones are pinned analytically (c3 = a0/2, c4 = v0, c5 = p0).
    """
    c0, c1, c2 = free
    return QuinticSegment((float(c0), float(c1), float(c2), a0 / 2.0, float(v0), float(p0)), duration)


def fit_slice(times, positions, duration: float) -> tuple[QuinticSegment, float]:
    """Least-squares quintic through (local time, position) samples.

    Returns the fitted segment and the residual RMS in meters.
    """
    t = np.asarray(times, dtype=float)
    pos = np.asarray(positions, dtype=float)
    if t.shape != pos.shape or t.ndim != 1:
        raise FitError(f"times/positions must be matching 1-D arrays, got {t.shape} vs {pos.shape}")
    if t.size < 6:
        raise FitError(f"need at least 6 samples to fit a quintic, got {t.size}")
    if np.unique(t).size < 6:
        raise FitError("need at least 6 distinct sample times")
    vand = np.column_stack([t**5, t**4, t**3, t**2, t, np.ones_like(t)])
    coeffs, _, rank, _ = np.linalg.lstsq(vand, pos, rcond=None)
    if rank < 6:
        raise FitError(f"rank-deficient fit (rank {rank} < 6)")
    residuals = vand @ coeffs - pos
    rms = float(np.sqrt(np.mean(residuals**2)))
    return QuinticSegment(tuple(float(c) for c in coeffs), duration), rms

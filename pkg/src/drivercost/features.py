"""Car-following feature integrals and behavioral indicators.

Six features, each a trapezoidal integral of a nonnegative integrand over
one planning horizon:

    f_a   squared acceleration
    f_ds  squared deviation from the desired speed v_d
    f_rs  squared deviation from the leader speed
    f_cd  squared deviation of the gap from d_c = v(t)*tau + d_s
    f_sd  squared deviation of the gap from the safety clearance d_s
    f_fd  exp(-gap), rewarding large gaps in free motion

Each driving phase activates a fixed subset (see phase.FEATURES_BY_PHASE).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kern
from .phase import FEATURES_BY_PHASE, Indicators, PhaseLabel

FEATURE_NAMES = ("f_a", "f_ds", "f_rs", "f_cd", "f_sd", "f_fd")

# Guards for stopped-vehicle divisions in THW; they affect phase
# classification and the tau context only, never feature values.
THW_CAP = 3600.0
SPEED_EPS = 0.1

_ID_BY_NAME = {name: i for i, name in enumerate(FEATURE_NAMES)}
_IDS_BY_PHASE = {
    ph: np.array([_ID_BY_NAME[n] for n in names], dtype=np.intc)
    for ph, names in FEATURES_BY_PHASE.items()
}


def feature_ids(phase: PhaseLabel) -> np.ndarray:
    """Kernel feature-id array for a phase, in canonical order."""
    return _IDS_BY_PHASE[phase]


@dataclass(frozen=True)
class FeatureContext:
    """Everything besides the follower trajectory that the integrals need."""

    leader_position: np.ndarray
    leader_velocity: np.ndarray
    v_d: float            # desired speed: observed max leader speed [m/s]
    tau_headway: float    # observed average time headway [s]
    d_s: float            # minimum safety clearance [m]
    horizon: float        # integration horizon [s]
    dt: float             # grid spacing [s]

    def __post_init__(self):
        if self.v_d < 0:
            raise ValueError(f"v_d must be >= 0, got {self.v_d}")
        if self.tau_headway <= 0:
            raise ValueError(f"tau_headway must be > 0, got {self.tau_headway}")
        if self.d_s <= 0:
            raise ValueError(f"d_s must be > 0, got {self.d_s}")
        n = self.n_samples
        if len(self.leader_position) != n or len(self.leader_velocity) != n:
            raise ValueError(
                f"leader arrays must have {n} samples for horizon {self.horizon} at dt {self.dt}"
            )

    @property
    def n_samples(self) -> int:
        return int(round(self.horizon / self.dt)) + 1


@dataclass(frozen=True)
class FeatureVector:
    phase: PhaseLabel
    values: dict[str, float] = field(compare=False)

    def __post_init__(self):
        expected = FEATURES_BY_PHASE[self.phase]
        if tuple(self.values.keys()) != expected:
            raise ValueError(
                f"feature keys {tuple(self.values)} do not match phase set {expected}"
            )

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def as_array(self) -> np.ndarray:
        return np.array([self.values[n] for n in FEATURES_BY_PHASE[self.phase]])


def compute_features(position, velocity, acceleration, ctx: FeatureContext,
                     phase: PhaseLabel) -> FeatureVector:
    """Integrate the phase's features for a sampled follower trajectory."""
    position = np.asarray(position, dtype=float)
    if position.shape != (ctx.n_samples,):
        raise ValueError(
            f"trajectory grid mismatch: got {position.shape[0]} samples, context has {ctx.n_samples}"
        )
    raw = kern.feature_values(
        position, velocity, acceleration,
        ctx.leader_position, ctx.leader_velocity,
        ctx.dt, ctx.v_d, ctx.tau_headway, ctx.d_s,
        feature_ids(phase),
    )
    names = FEATURES_BY_PHASE[phase]
    return FeatureVector(phase=phase, values={n: float(v) for n, v in zip(names, raw)})


def thw_series(gap, follower_speed) -> np.ndarray:
    """Per-sample time headway, capped where the follower is near-stopped."""
    gap = np.asarray(gap, dtype=float)
    speed = np.asarray(follower_speed, dtype=float)
    safe = speed >= SPEED_EPS
    out = np.full(gap.shape, THW_CAP)
    out[safe] = np.minimum(gap[safe] / speed[safe], THW_CAP)
    return out


def indicators_from_arrays(gap, follower_speed, leader_speed) -> Indicators:
    gap = np.asarray(gap, dtype=float)
    if gap.size == 0:
        raise ValueError("empty window")
    if np.any(gap <= 0):
        raise ValueError("indicators require positive gaps")
    follower_speed = np.asarray(follower_speed, dtype=float)
    leader_speed = np.asarray(leader_speed, dtype=float)
    thw = thw_series(gap, follower_speed)
    ttci = (follower_speed - leader_speed) / gap
    return Indicators(
        mean_thw=float(thw.mean()),
        mean_ttci=float(ttci.mean()),
        mean_gap=float(gap.mean()),
        mean_speed=float(follower_speed.mean()),
    )


def headway_indicators(window) -> Indicators:
    """Indicator means for a trace window (anything with s_f/v_f/s_l/v_l)."""
    return indicators_from_arrays(window.s_l - window.s_f, window.v_f, window.v_l)


def mean_capped_thw(gap, follower_speed) -> float:
    """Average observed time headway used as the tau context parameter."""
    return float(thw_series(gap, follower_speed).mean())

"""Driving-phase classification and the speed/gap K-means diagnostic.

A trajectory segment is exactly one of steady car-following, free motion,
or unsteady car-following. The rule classifier drives the pipeline; the
seeded K-means on (mean speed, mean gap) is exposed for inspecting the
two-cluster free/non-free structure on new data.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ClusteringError


class PhaseLabel(enum.Enum):
    STEADY_FOLLOWING = "steady_following"
    FREE_MOTION = "free_motion"
    UNSTEADY_FOLLOWING = "unsteady_following"


# Feature subset active in each phase, in canonical order.
FEATURES_BY_PHASE: dict[PhaseLabel, tuple[str, ...]] = {
    PhaseLabel.STEADY_FOLLOWING: ("f_a", "f_ds", "f_rs", "f_cd"),
    PhaseLabel.FREE_MOTION: ("f_a", "f_ds", "f_fd"),
    PhaseLabel.UNSTEADY_FOLLOWING: ("f_a", "f_ds", "f_rs", "f_sd"),
}

# Rule thresholds. Boundary semantics are exact: thw=6.0 is not steady,
# ttci=0.05 is not steady, gap=35.0 and speed=5.0 are free-motion-eligible.
STEADY_THW_MAX = 6.0
STEADY_TTCI_MAX = 0.05
FREE_TTCI_MAX = 0.0
FREE_GAP_MIN = 35.0
FREE_SPEED_MIN = 5.0


class Indicators(NamedTuple):
    """Segment-level behavioral indicators (means over the window)."""

    mean_thw: float
    mean_ttci: float
    mean_gap: float
    mean_speed: float


def classify_segment(indicators: Indicators) -> PhaseLabel:
    """Map indicator means to a driving phase. Total: every input labels."""
    if indicators.mean_thw < STEADY_THW_MAX and indicators.mean_ttci < STEADY_TTCI_MAX:
        return PhaseLabel.STEADY_FOLLOWING
    if (
        indicators.mean_thw >= STEADY_THW_MAX
        and indicators.mean_ttci <= FREE_TTCI_MAX
        and indicators.mean_gap >= FREE_GAP_MIN
        and indicators.mean_speed >= FREE_SPEED_MIN
    ):
        return PhaseLabel.FREE_MOTION
    return PhaseLabel.UNSTEADY_FOLLOWING


@dataclass
class KMeansResult:
    k: int
    centroids: np.ndarray        # (k, 2) in original (m/s, m) units
    assignments: np.ndarray      # (n,) cluster index per point
    inertia: float               # sum of squared distances, original units
    inertia_history: list[float]  # standardized-space objective per iteration
    n_iter: int


def kmeans_speed_gap(points, k: int, seed: int, max_iter: int = 200) -> KMeansResult:
    """Lloyd's algorithm on z-scored (mean_speed, mean_gap) points.

    Seeded k-means++ initialization; deterministic for a given seed.
    Centroids are reported in original units; ``inertia_history`` tracks the
    standardized objective, which is non-increasing across iterations.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ClusteringError(f"expected (n, 2) points, got shape {pts.shape}")
    n = pts.shape[0]
    if k < 1:
        raise ClusteringError(f"k must be >= 1, got {k}")
    if n < k:
        raise ClusteringError(f"need at least k={k} points, got {n}")
    n_distinct = np.unique(pts, axis=0).shape[0]
    if n_distinct < k:
        raise ClusteringError(f"k={k} exceeds the {n_distinct} distinct point(s)")

    mean = pts.mean(axis=0)
    std = pts.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    z = (pts - mean) / std

    rng = np.random.default_rng(seed)
    centers = np.empty((k, 2))
    centers[0] = z[rng.integers(n)]
    for j in range(1, k):
        d2 = np.min(((z[:, None, :] - centers[None, :j, :]) ** 2).sum(axis=2), axis=1)
        total = d2.sum()
        if total == 0:
            # duplicates of chosen centers; pick any point not yet a center
            centers[j] = z[rng.integers(n)]
            continue
        centers[j] = z[rng.choice(n, p=d2 / total)]

    assignments = np.full(n, -1, dtype=int)
    history: list[float] = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        d2 = ((z[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = d2.argmin(axis=1)
        history.append(float(d2[np.arange(n), new_assign].sum()))
        if np.array_equal(new_assign, assignments):
            break
        assignments = new_assign
        for j in range(k):
            members = z[assignments == j]
            if len(members):
                centers[j] = members.mean(axis=0)
            else:
                # re-seed an empty cluster at the point farthest from its center
                worst = d2[np.arange(n), assignments].argmax()
                centers[j] = z[worst]

    centroids = centers * std + mean
    diffs = pts - centroids[assignments]
    inertia = float((diffs**2).sum())
    return KMeansResult(
        k=k,
        centroids=centroids,
        assignments=assignments,
        inertia=inertia,
        inertia_history=history,
        n_iter=n_iter,
    )

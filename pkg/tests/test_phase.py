import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drivercost.errors import ClusteringError
from drivercost.phase import (
    Indicators,
    KMeansResult,
    PhaseLabel,
    classify_segment,
    kmeans_speed_gap,
)


def ind(thw, ttci, gap=20.0, speed=10.0):
    return Indicators(mean_thw=thw, mean_ttci=ttci, mean_gap=gap, mean_speed=speed)


def test_classify_examples():
    assert classify_segment(ind(2, 0.01, 20, 15)) is PhaseLabel.STEADY_FOLLOWING
    assert classify_segment(ind(10, -0.02, 50, 20)) is PhaseLabel.FREE_MOTION
    assert classify_segment(ind(10, -0.02, 30, 4)) is PhaseLabel.UNSTEADY_FOLLOWING


def test_boundary_semantics_exact():
    # thw=6.0 is not steady; ttci=0.05 is not steady
    assert classify_segment(ind(6.0, 0.0, 30, 10)) is not PhaseLabel.STEADY_FOLLOWING
    assert classify_segment(ind(5.0, 0.05, 30, 10)) is not PhaseLabel.STEADY_FOLLOWING
    assert classify_segment(ind(5.99, 0.049, 30, 10)) is PhaseLabel.STEADY_FOLLOWING
    # gap=35.0 and speed=5.0 are free-motion-eligible (inclusive)
    assert classify_segment(ind(6.0, 0.0, 35.0, 5.0)) is PhaseLabel.FREE_MOTION
    assert classify_segment(ind(6.0, 0.0, 34.9, 5.0)) is PhaseLabel.UNSTEADY_FOLLOWING
    assert classify_segment(ind(6.0, 0.0, 35.0, 4.9)) is PhaseLabel.UNSTEADY_FOLLOWING
    # ttci just above zero blocks free motion
    assert classify_segment(ind(6.0, 1e-9, 50, 10)) is PhaseLabel.UNSTEADY_FOLLOWING


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0, max_value=4000, allow_nan=False),
       st.floats(min_value=-5, max_value=5, allow_nan=False),
       st.floats(min_value=0.01, max_value=500, allow_nan=False),
       st.floats(min_value=0, max_value=60, allow_nan=False))
def test_classify_is_total(thw, ttci, gap, speed):
    assert classify_segment(ind(thw, ttci, gap, speed)) in PhaseLabel


def blobs(rng, n_a=40, n_b=40):
    a = rng.normal([20.0, 60.0], [1.0, 3.0], size=(n_a, 2))
    b = rng.normal([3.0, 8.0], [0.5, 1.0], size=(n_b, 2))
    return np.vstack([a, b])


def test_kmeans_separated_blobs():
    pts = blobs(np.random.default_rng(0))
    result = kmeans_speed_gap(pts, k=2, seed=1)
    assert isinstance(result, KMeansResult)
    first_half = result.assignments[:40]
    second_half = result.assignments[40:]
    assert len(set(first_half)) == 1
    assert len(set(second_half)) == 1
    assert first_half[0] != second_half[0]
    # centroids in original units, near the blob centers
    cents = sorted(result.centroids.tolist())
    assert np.allclose(cents[0], [3.0, 8.0], atol=1.0)
    assert np.allclose(cents[1], [20.0, 60.0], atol=2.0)


def test_kmeans_k1_closed_form():
    pts = blobs(np.random.default_rng(2), 25, 25)
    result = kmeans_speed_gap(pts, k=1, seed=0)
    assert np.allclose(result.centroids[0], pts.mean(axis=0))
    expected = ((pts - pts.mean(axis=0)) ** 2).sum()
    assert result.inertia == pytest.approx(expected)


def test_kmeans_rejects_duplicate_points():
    pts = np.tile([[4.0, 9.0]], (10, 1))
    with pytest.raises(ClusteringError):
        kmeans_speed_gap(pts, k=2, seed=0)


def test_kmeans_rejects_k_above_n():
    with pytest.raises(ClusteringError):
        kmeans_speed_gap([[1.0, 2.0]], k=2, seed=0)


def test_kmeans_deterministic_and_permutation_stable():
    rng = np.random.default_rng(7)
    pts = blobs(rng)
    a = kmeans_speed_gap(pts, k=2, seed=42)
    b = kmeans_speed_gap(pts, k=2, seed=42)
    assert np.array_equal(a.assignments, b.assignments)
    assert np.array_equal(a.centroids, b.centroids)

    perm = rng.permutation(len(pts))
    c = kmeans_speed_gap(pts[perm], k=2, seed=42)
    assert np.allclose(sorted(a.centroids.tolist()), sorted(c.centroids.tolist()), atol=1e-9)
    assert a.inertia == pytest.approx(c.inertia)


def test_kmeans_inertia_history_non_increasing():
    pts = blobs(np.random.default_rng(9), 60, 60)
    result = kmeans_speed_gap(pts, k=2, seed=3)
    hist = result.inertia_history
    assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))

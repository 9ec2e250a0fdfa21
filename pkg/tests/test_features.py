import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from drivercost.features import (
    THW_CAP,
    FeatureContext,
    compute_features,
    headway_indicators,
    indicators_from_arrays,
)
from drivercost.phase import FEATURES_BY_PHASE, PhaseLabel

DT = 0.1
N = 11  # 1 s horizon


def make_ctx(lead_pos, lead_vel, v_d=10.0, tau=2.0, d_s=5.0):
    return FeatureContext(
        leader_position=np.asarray(lead_pos, dtype=float),
        leader_velocity=np.asarray(lead_vel, dtype=float),
        v_d=v_d, tau_headway=tau, d_s=d_s, horizon=1.0, dt=DT,
    )


def const_traj(pos0, vel, acc=0.0):
    t = DT * np.arange(N)
    return pos0 + vel * t + 0.5 * acc * t**2, vel + acc * t, np.full(N, acc)


def test_constant_acceleration_integral():
    pos, vel, acc = const_traj(0.0, 5.0, acc=1.0)
    ctx = make_ctx(pos + 30.0, np.full(N, 5.0))
    fv = compute_features(pos, vel, acc, ctx, PhaseLabel.UNSTEADY_FOLLOWING)
    assert fv["f_a"] == pytest.approx(1.0)


def test_zero_integrands_at_matched_speeds():
    pos, vel, acc = const_traj(0.0, 10.0)
    ctx = make_ctx(pos + 20.0, np.full(N, 10.0), v_d=10.0)
    fv = compute_features(pos, vel, acc, ctx, PhaseLabel.UNSTEADY_FOLLOWING)
    assert fv["f_ds"] == 0.0
    assert fv["f_rs"] == 0.0


def test_free_gap_feature_closed_form():
    pos, vel, acc = const_traj(0.0, 8.0)
    ctx = make_ctx(pos + 10.0, np.full(N, 8.0), v_d=8.0)
    fv = compute_features(pos, vel, acc, ctx, PhaseLabel.FREE_MOTION)
    assert fv["f_fd"] == pytest.approx(math.exp(-10.0), rel=1e-12)


def test_steady_gap_feature_zero_at_target():
    pos, vel, acc = const_traj(0.0, 10.0)
    ctx = make_ctx(pos + 25.0, np.full(N, 10.0), v_d=10.0, tau=2.0, d_s=5.0)
    fv = compute_features(pos, vel, acc, ctx, PhaseLabel.STEADY_FOLLOWING)
    assert fv["f_cd"] == 0.0


def test_grid_mismatch_rejected():
    pos, vel, acc = const_traj(0.0, 10.0)
    ctx = make_ctx(pos + 25.0, np.full(N, 10.0))
    with pytest.raises(ValueError, match="grid"):
        compute_features(pos[:-1], vel[:-1], acc[:-1], ctx, PhaseLabel.FREE_MOTION)


def test_key_set_matches_phase():
    pos, vel, acc = const_traj(0.0, 10.0)
    ctx = make_ctx(pos + 25.0, np.full(N, 10.0))
    for phase in PhaseLabel:
        fv = compute_features(pos, vel, acc, ctx, phase)
        assert tuple(fv.values.keys()) == FEATURES_BY_PHASE[phase]


def test_indicator_examples():
    n = 5
    ind = indicators_from_arrays(np.full(n, 20.0), np.full(n, 10.0), np.full(n, 10.0))
    assert ind.mean_thw == pytest.approx(2.0)
    assert ind.mean_ttci == pytest.approx(0.0)

    ind = indicators_from_arrays(np.full(n, 25.0), np.full(n, 15.0), np.full(n, 10.0))
    assert ind.mean_ttci == pytest.approx(0.2)

    ind = indicators_from_arrays(np.full(n, 30.0), np.zeros(n), np.full(n, 5.0))
    assert ind.mean_thw == THW_CAP


def test_headway_indicators_from_window():
    class Window:
        s_f = np.zeros(4)
        s_l = np.full(4, 20.0)
        v_f = np.full(4, 10.0)
        v_l = np.full(4, 10.0)

    ind = headway_indicators(Window)
    assert ind.mean_thw == pytest.approx(2.0)
    assert ind.mean_gap == pytest.approx(20.0)
    assert ind.mean_speed == pytest.approx(10.0)


def test_richardson_refinement_under_one_percent():
    """Halving dt changes smooth-trajectory features by < 1%."""
    from helpers import smooth_trajectory_arrays, smooth_trajectory_draw

    rng = np.random.default_rng(5)
    for _ in range(20):
        draw = smooth_trajectory_draw(rng)
        values = {}
        for n, dt in ((11, 0.1), (21, 0.05)):
            pos, vel, acc, lead_pos, lead_vel, v_d, tau = smooth_trajectory_arrays(draw, dt, n)
            ctx = FeatureContext(lead_pos, lead_vel, v_d=v_d, tau_headway=tau,
                                 d_s=5.0, horizon=1.0, dt=dt)
            fv = compute_features(pos, vel, acc, ctx, PhaseLabel.STEADY_FOLLOWING)
            values[dt] = fv.as_array()
        coarse, fine = values[0.1], values[0.05]
        assert np.all(np.abs(coarse - fine) <= 0.01 * np.abs(fine))


def test_monotonicity_spot_checks():
    pos, vel, acc = const_traj(0.0, 8.0, acc=0.5)
    ctx = make_ctx(pos + 20.0, np.full(N, 8.0), v_d=10.0)
    base = compute_features(pos, vel, acc, ctx, PhaseLabel.UNSTEADY_FOLLOWING)
    bigger_a = compute_features(pos, vel, 2 * acc, ctx, PhaseLabel.UNSTEADY_FOLLOWING)
    assert bigger_a["f_a"] >= base["f_a"]
    closer_v = compute_features(pos, vel + 0.5 * (10.0 - vel), acc, ctx,
                                PhaseLabel.UNSTEADY_FOLLOWING)
    assert closer_v["f_ds"] <= base["f_ds"]


finite = st.floats(min_value=-50, max_value=50, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(finite, min_size=N, max_size=N),
       st.lists(finite, min_size=N, max_size=N),
       st.lists(st.floats(min_value=0.2, max_value=60), min_size=N, max_size=N),
       st.floats(min_value=0, max_value=40),
       st.floats(min_value=0.1, max_value=5))
def test_features_always_nonnegative(vel, acc, gaps, v_d, tau):
    pos = np.zeros(N)
    lead_pos = np.asarray(gaps)
    lead_vel = np.abs(np.asarray(vel))[::-1].copy()
    ctx = FeatureContext(lead_pos, lead_vel, v_d=v_d, tau_headway=tau,
                         d_s=5.0, horizon=1.0, dt=DT)
    for phase in PhaseLabel:
        fv = compute_features(pos, np.asarray(vel), np.asarray(acc), ctx, phase)
        assert all(v >= 0 for v in fv.values.values())

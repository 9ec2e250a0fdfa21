"""Shared test fixtures: optimal-driver demo construction and tiny scenarios."""

from __future__ import annotations

import numpy as np

from drivercost.config import PipelineConfig
from drivercost.dataio import ScenarioSpec, TraceWindow, TrajectorySegment
from drivercost.features import FeatureContext
from drivercost.sirl import WeightVector, optimize_subsegment


def build_demo_segment(theta: WeightVector, cfg: PipelineConfig, *,
                       leader_speed: float, gap0: float, v0: float,
                       a0: float = 0.0, seg_index: int = 0) -> TrajectorySegment:
    """Chain optimal subsegments under a known weight vector into one segment.

    The follower trajectory is exactly the optimizer's output sampled on the
    grid, so learning from this segment sees a perfectly matchable
    demonstration. Only valid for phases whose feature set ignores the
    time-headway context (free motion / unsteady following), because the
    construction does not solve for a self-consistent tau.
    """
    n_sub = cfg.subsegments_per_segment
    steps = cfg.steps_per_subsegment
    dt = cfg.sample_time_ts
    n = n_sub * steps + 1
    t = dt * np.arange(n)
    s_l = gap0 + leader_speed * t
    v_l = np.full(n, leader_speed)
    s_f = np.empty(n)
    v_f = np.empty(n)
    a_f = np.empty(n)
    p, v, a = 0.0, float(v0), float(a0)
    for k in range(n_sub):
        i0 = k * steps
        ctx = FeatureContext(
            leader_position=s_l[i0: i0 + steps + 1],
            leader_velocity=v_l[i0: i0 + steps + 1],
            v_d=float(leader_speed),
            tau_headway=1.0,
            d_s=cfg.safe_gap_ds,
            horizon=cfg.subsegment_len_tp,
            dt=dt,
        )
        seg = optimize_subsegment((p, v, a), theta, ctx)
        pos, vel, acc = seg.sample(dt, steps + 1)
        s_f[i0: i0 + steps + 1] = pos
        v_f[i0: i0 + steps + 1] = vel
        a_f[i0: i0 + steps + 1] = acc
        p, v, a = seg.evaluate(cfg.subsegment_len_tp)
    window = TraceWindow(t=t, s_f=s_f, v_f=v_f, a_f=a_f, s_l=s_l, v_l=v_l)
    return TrajectorySegment(segment_index=seg_index, window=window,
                             steps_per_subsegment=steps)


def smooth_trajectory_draw(rng) -> dict:
    """Random smooth car-following snippet with sign-definite integrands.

    Acceleration keeps one sign over the horizon, the follower stays slower
    than both the leader and the desired speed, and the gap stays above the
    steady-following target, so no squared integrand crosses zero (zero
    crossings make relative quadrature error unbounded for any grid).
    """
    a0 = rng.choice([-1.0, 1.0]) * rng.uniform(0.4, 1.8)
    s = abs(a0)
    coeffs = np.array([
        rng.uniform(-1, 1) * 0.004 * s,
        rng.uniform(-1, 1) * 0.008 * s,
        rng.uniform(-1, 1) * 0.04 * s,
        a0 / 2,
        rng.uniform(3, 12),
        rng.uniform(-5, 5),
    ])
    return {
        "coeffs": coeffs,
        "lead_offset": rng.uniform(0.5, 2.0),
        "lead_wiggle": rng.uniform(0, 0.2),
        "tau": rng.uniform(1.0, 2.0),
        "v_d_extra": rng.uniform(1.0, 4.0),
        "gap_extra": rng.uniform(1.0, 6.0),
    }


def smooth_trajectory_arrays(draw: dict, dt: float, n: int, d_s: float = 5.0):
    """Sample one smooth draw: follower/leader arrays plus context values."""
    c = draw["coeffs"]
    t = dt * np.arange(n)
    pos = np.polyval(c, t)
    vel = np.polyval(np.polyder(c), t)
    acc = np.polyval(np.polyder(c, 2), t)
    lead_vel = vel + draw["lead_offset"] + draw["lead_wiggle"] * np.sin(2 * t)
    rel = draw["lead_offset"] * t + draw["lead_wiggle"] * (1 - np.cos(2 * t)) / 2
    v_d = float(vel.max() + draw["v_d_extra"])
    tau = draw["tau"]
    gap0 = float((vel * tau + d_s).max() + draw["gap_extra"])
    lead_pos = pos + gap0 + rel
    return pos, vel, acc, lead_pos, lead_vel, v_d, tau


def mini_scenarios() -> list[ScenarioSpec]:
    """Two short scenarios for fast CLI/pipeline tests."""
    return [
        ScenarioSpec("mini_cruise", ((0, 18), (12, 18)), 12, 25, 17),
        ScenarioSpec("mini_brake", ((0, 20), (4, 20), (7, 9), (12, 9)), 12, 28, 19),
    ]

"""Receding-horizon trajectory generation against sampled cost functions.

At every sample step the planner searches a constant acceleration over the
subsegment horizon (41-point grid plus golden-section refinement), scoring
candidates by theta . f plus a large penalty for violating the gap and
speed constraints, and applies the first step of the winner. Weight vectors
are re-drawn from the fitted distribution at every segment boundary
(stochastic mode) or taken from the pooled per-phase weights
(deterministic mode).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import _kernels as kern
from .config import PipelineConfig
from .copula import sample_weights_rng
from .dataio import ScenarioSpec
from .errors import TraceError, ValidationError
from .features import feature_ids, indicators_from_arrays, mean_capped_thw
from .phase import PhaseLabel, classify_segment
from .seeding import rng_for
from .sirl import WeightVector

log = logging.getLogger(__name__)

PENALTY_COEF = 1e6
GRID_POINTS = 41
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
_REFINE_TOL = 1e-4
_MIN_PREVIEW_GAP = 1e-3

# When a classified phase has no model (empty or unfittable cluster, e.g.
# free motion whose gap feature is numerically zero at >= 35 m), try the
# behaviorally closest phases in order.
_PHASE_FALLBACK = {
    PhaseLabel.FREE_MOTION: (
        PhaseLabel.STEADY_FOLLOWING, PhaseLabel.UNSTEADY_FOLLOWING),
    PhaseLabel.STEADY_FOLLOWING: (
        PhaseLabel.UNSTEADY_FOLLOWING, PhaseLabel.FREE_MOTION),
    PhaseLabel.UNSTEADY_FOLLOWING: (
        PhaseLabel.STEADY_FOLLOWING, PhaseLabel.FREE_MOTION),
}

ROLLOUT_HEADER = ("sample_id", "t", "d", "V_H", "V_PV", "a_applied", "theta_segment_index")


class RolloutState(NamedTuple):
    t: float
    d: float      # gap to the leader [m]
    v_h: float    # follower speed [m/s]
    v_pv: float   # leader speed [m/s]
    s_h: float    # follower position, integrated for reporting [m]


def step_dynamics(state: RolloutState, a: float, ts: float, v_pv_next: float) -> RolloutState:
    """One explicit step of the inter-vehicle dynamics.

    Constraint enforcement is the planner's job; the integrator applies any
    acceleration as commanded.
    """
    return RolloutState(
        t=state.t + ts,
        d=(state.v_pv - state.v_h) * ts + state.d,
        v_h=state.v_h + a * ts,
        v_pv=float(v_pv_next),
        s_h=state.s_h + state.v_h * ts,
    )


class PlanResult(NamedTuple):
    accel: float
    feasible: bool
    cost: float


def _extrapolated_gap(d0: float, v_h: float, vpv: np.ndarray, ts: float) -> np.ndarray:
    """Gap series if the follower held its current speed (preview model)."""
    gap = np.empty(len(vpv))
    gap[0] = d0
    for i in range(1, len(vpv)):
        gap[i] = (vpv[i - 1] - v_h) * ts + gap[i - 1]
    return gap


def preview_phase(state: RolloutState, leader_speeds: np.ndarray, ts: float) -> PhaseLabel:
    """Classify the upcoming window from a constant-speed extrapolation."""
    gap = np.maximum(_extrapolated_gap(state.d, state.v_h, leader_speeds, ts), _MIN_PREVIEW_GAP)
    ind = indicators_from_arrays(gap, np.full(len(leader_speeds), state.v_h), leader_speeds)
    return classify_segment(ind)


def plan_step(state: RolloutState, theta: WeightVector, leader_preview: np.ndarray,
              cfg: PipelineConfig, v_max: float) -> PlanResult:
    """Choose the constant acceleration for the next step.

    ``leader_preview`` must span the full planning horizon
    (steps_per_subsegment + 1 speeds). A candidate is feasible only if its
    simulated horizon has a violation sum of exactly zero; if no candidate
    is feasible the result carries the least-violating action (maximum
    braking whenever the gap constraint binds) with feasible=False.
    """
    n_expected = cfg.steps_per_subsegment + 1
    if len(leader_preview) != n_expected:
        raise ValidationError(
            f"leader preview must have {n_expected} samples, got {len(leader_preview)}"
        )
    ts = cfg.sample_time_ts
    vpv = np.asarray(leader_preview, dtype=float)
    v_d = float(vpv.max())
    pred_gap = np.maximum(_extrapolated_gap(state.d, state.v_h, vpv, ts), _MIN_PREVIEW_GAP)
    tau = mean_capped_thw(pred_gap, np.full(len(vpv), state.v_h))
    theta_arr = theta.as_array()
    ids = feature_ids(theta.phase)

    def evaluate(accels: np.ndarray):
        return kern.candidate_costs(
            accels, state.d, state.v_h, vpv, ts, v_d, tau, cfg.safe_gap_ds,
            theta_arr, ids, cfg.safe_gap_ds, cfg.v_min, v_max, PENALTY_COEF,
        )

    grid = np.linspace(cfg.accel_min, cfg.accel_max, GRID_POINTS)
    costs, viols = evaluate(grid)
    feasible = viols == 0.0
    if not feasible.any():
        # emergency: penalty dominates, so this is maximum braking when the
        # gap constraint binds, and the least-violating action otherwise
        # (returning a_min blindly would drive the speed floor violation
        # further and make infeasibility absorbing)
        best = int(costs.argmin())
        return PlanResult(accel=float(grid[best]), feasible=False, cost=float(costs[best]))

    masked = np.where(feasible, costs, np.inf)
    best_i = int(masked.argmin())
    best_a = float(grid[best_i])
    best_cost = float(costs[best_i])

    # golden-section refinement on the bracket around the best grid point
    lo = float(grid[max(0, best_i - 1)])
    hi = float(grid[min(GRID_POINTS - 1, best_i + 1)])
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    (c1,), (v1,) = evaluate(np.array([x1]))
    (c2,), (v2,) = evaluate(np.array([x2]))
    if v1 == 0.0 and c1 < best_cost:
        best_a, best_cost = x1, float(c1)
    if v2 == 0.0 and c2 < best_cost:
        best_a, best_cost = x2, float(c2)
    while hi - lo > _REFINE_TOL:
        if c1 <= c2:
            hi, x2, c2, v2 = x2, x1, c1, v1
            x1 = hi - _GOLDEN * (hi - lo)
            (c1,), (v1,) = evaluate(np.array([x1]))
            if v1 == 0.0 and c1 < best_cost:
                best_a, best_cost = x1, float(c1)
        else:
            lo, x1, c1, v1 = x1, x2, c2, v2
            x2 = lo + _GOLDEN * (hi - lo)
            (c2,), (v2,) = evaluate(np.array([x2]))
            if v2 == 0.0 and c2 < best_cost:
                best_a, best_cost = x2, float(c2)
    return PlanResult(accel=best_a, feasible=True, cost=best_cost)


@dataclass
class RolloutResult:
    scenario_id: str
    sample_id: int
    mode: str
    t: np.ndarray            # n_steps + 1 sample times
    d: np.ndarray
    v_h: np.ndarray
    v_pv: np.ndarray
    s_h: np.ndarray
    a_applied: np.ndarray    # n_steps applied accelerations
    theta_segment_index: np.ndarray
    theta_schedule: list[tuple[float, WeightVector]]
    infeasible: bool
    first_infeasible_t: float | None


def _select_theta(models, phase: PhaseLabel, mode: str, rng, scenario_id: str) -> WeightVector:
    chain = (phase,) + _PHASE_FALLBACK[phase]
    for candidate in chain:
        if candidate in models:
            if candidate is not phase:
                log.warning("%s: no model for phase %s; fell back to %s",
                            scenario_id, phase.value, candidate.value)
            if mode == "sirl":
                return sample_weights_rng(models[candidate], 1, rng)[0]
            return models[candidate]
    raise ValidationError(f"no weights available for any phase (requested {phase.value})")


def rollout(scenario: ScenarioSpec, models, cfg: PipelineConfig, seed: int,
            sample_id: int = 0, mode: str = "sirl") -> RolloutResult:
    """Simulate one follower sample through a scenario.

    ``models`` maps PhaseLabel to CopulaModel (mode="sirl") or to a pooled
    WeightVector (mode="dirl"). Deterministic given (seed, scenario, sample).
    """
    if mode not in ("sirl", "dirl"):
        raise ValidationError(f"mode must be 'sirl' or 'dirl', got {mode!r}")
    if scenario.duration < cfg.segment_len_th:
        raise ValidationError(
            f"scenario {scenario.scenario_id!r} shorter than one segment "
            f"({scenario.duration} < {cfg.segment_len_th} s)"
        )
    ts = cfg.sample_time_ts
    n_steps = int(round(scenario.duration / ts))
    steps_seg = cfg.steps_per_segment
    sub_steps = cfg.steps_per_subsegment
    # leader speeds extended past the end so previews near the end are full
    t_ext = ts * np.arange(n_steps + steps_seg + sub_steps + 1)
    lead_vel = scenario.leader_speed(t_ext)
    v_max = cfg.v_max if cfg.v_max is not None else float(lead_vel[: n_steps + 1].max())

    rng = rng_for(seed, "rollout", scenario.scenario_id, sample_id) if mode == "sirl" else None

    n = n_steps + 1
    arr_t = np.empty(n)
    arr_d = np.empty(n)
    arr_vh = np.empty(n)
    arr_vpv = np.empty(n)
    arr_sh = np.empty(n)
    a_applied = np.empty(n_steps)
    theta_idx = np.empty(n, dtype=int)

    state = RolloutState(
        t=0.0, d=float(scenario.initial_gap),
        v_h=float(scenario.initial_follower_speed),
        v_pv=float(lead_vel[0]), s_h=0.0,
    )
    theta: WeightVector | None = None
    schedule: list[tuple[float, WeightVector]] = []
    infeasible = False
    first_bad: float | None = None

    for i in range(n_steps):
        if i % steps_seg == 0:
            phase = preview_phase(state, lead_vel[i: i + steps_seg + 1], ts)
            theta = _select_theta(models, phase, mode, rng, scenario.scenario_id)
            schedule.append((float(i * ts), theta))
        arr_t[i], arr_d[i], arr_vh[i], arr_vpv[i], arr_sh[i] = state
        theta_idx[i] = i // steps_seg
        plan = plan_step(state, theta, lead_vel[i: i + sub_steps + 1], cfg, v_max)
        if not plan.feasible and not infeasible:
            infeasible = True
            first_bad = float(state.t)
        a_applied[i] = plan.accel
        state = step_dynamics(state, plan.accel, ts, lead_vel[i + 1])
    arr_t[-1], arr_d[-1], arr_vh[-1], arr_vpv[-1], arr_sh[-1] = state
    theta_idx[-1] = (n_steps - 1) // steps_seg

    return RolloutResult(
        scenario_id=scenario.scenario_id, sample_id=sample_id, mode=mode,
        t=arr_t, d=arr_d, v_h=arr_vh, v_pv=arr_vpv, s_h=arr_sh,
        a_applied=a_applied, theta_segment_index=theta_idx,
        theta_schedule=schedule, infeasible=infeasible, first_infeasible_t=first_bad,
    )


def write_rollout_csv(result: RolloutResult, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ROLLOUT_HEADER)
        n = len(result.t)
        for i in range(n):
            a = repr(float(result.a_applied[i])) if i < n - 1 else ""
            writer.writerow([
                result.sample_id, repr(float(result.t[i])), repr(float(result.d[i])),
                repr(float(result.v_h[i])), repr(float(result.v_pv[i])), a,
                int(result.theta_segment_index[i]),
            ])


class GeneratedSeries(NamedTuple):
    """The slice of a rollout CSV that evaluation consumes."""

    sample_id: int
    t: np.ndarray
    speed: np.ndarray
    accel: np.ndarray  # one per applied step (len(t) - 1)
    gap: np.ndarray


def read_rollout_csv(path: str | Path) -> GeneratedSeries:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != ROLLOUT_HEADER:
            raise TraceError(f"{path}: bad rollout header {header!r}")
        rows = list(reader)
    if not rows:
        raise TraceError(f"{path}: empty rollout file")
    sample_id = int(rows[0][0])
    t = np.array([float(r[1]) for r in rows])
    gap = np.array([float(r[2]) for r in rows])
    speed = np.array([float(r[3]) for r in rows])
    accel = np.array([float(r[5]) for r in rows if r[5] != ""])
    return GeneratedSeries(sample_id=sample_id, t=t, speed=speed, accel=accel, gap=gap)

"""Per-segment maximum-entropy cost learning with normalized gradient descent.

Each demonstrated segment yields one weight vector: starting from all ones,
every epoch re-optimizes each subsegment under the current weights, compares
mean optimized features against mean observed features, and takes a
unit-normalized gradient step scaled by a halving learning rate. The
deterministic baseline pools all subsegments of a phase cluster into a
single such loop.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels as kern
from .config import PipelineConfig
from .dataio import TrajectorySegment
from .errors import OptimizationError
from .features import (
    FEATURES_BY_PHASE,
    FeatureContext,
    feature_ids,
    headway_indicators,
    mean_capped_thw,
)
from .phase import PhaseLabel, classify_segment
from .quintic import QuinticSegment

log = logging.getLogger(__name__)

# Inner-optimizer defaults: convergence is ||g||_inf <= gtol*max(1, |cost|).
INNER_GTOL = 1e-8
INNER_MAX_ITER = 200


@dataclass(frozen=True)
class WeightVector:
    """Cost-function weights for one segment (or one pooled cluster)."""

    phase: PhaseLabel
    segment_index: int  # -1 for pooled (deterministic baseline) weights
    weights: dict[str, float]

    def __post_init__(self):
        expected = FEATURES_BY_PHASE[self.phase]
        if tuple(self.weights.keys()) != expected:
            raise ValueError(
                f"weight keys {tuple(self.weights)} do not match phase set {expected}"
            )
        for name, value in self.weights.items():
            if not math.isfinite(value):
                raise ValueError(f"non-finite weight {name}={value}")

    def as_array(self) -> np.ndarray:
        return np.array([self.weights[n] for n in FEATURES_BY_PHASE[self.phase]])

    @classmethod
    def from_array(cls, phase: PhaseLabel, segment_index: int, arr) -> "WeightVector":
        names = FEATURES_BY_PHASE[phase]
        return cls(phase=phase, segment_index=segment_index,
                   weights={n: float(v) for n, v in zip(names, arr)})


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    grad_norm: float       # ||f_obs - f_exp||_2 computed before the update
    eta: float
    weights: np.ndarray    # snapshot after the update


@dataclass
class LearnTrace:
    """Full record of one NGD loop.

    ``records`` holds one entry per applied update (so every recorded step
    has ||dtheta||_2 == eta); the gradient norm that terminated the loop is
    in ``final_grad_norm`` with ``final_epoch`` counting gradient
    evaluations.
    """

    phase: PhaseLabel
    initial_weights: np.ndarray
    records: list[EpochRecord]
    final_grad_norm: float
    final_epoch: int
    converged: bool


def ngd_step(theta: np.ndarray, grad: np.ndarray, eta: float) -> np.ndarray:
    """One normalized-gradient-descent update; ||result - theta||_2 == eta."""
    norm = float(np.linalg.norm(grad))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero gradient")
    return theta - eta * (grad / norm)


@dataclass(frozen=True)
class SubsegmentProblem:
    """One subsegment's optimization context plus its demonstrated start."""

    ctx: FeatureContext
    p0: float
    v0: float
    a0: float
    observed_features: np.ndarray  # in the phase's canonical order


def build_context(window, cfg: PipelineConfig) -> FeatureContext:
    """Feature context from a demonstrated subsegment window."""
    return FeatureContext(
        leader_position=window.s_l,
        leader_velocity=window.v_l,
        v_d=float(window.v_l.max()),
        tau_headway=mean_capped_thw(window.gap, window.v_f),
        d_s=cfg.safe_gap_ds,
        horizon=cfg.subsegment_len_tp,
        dt=cfg.sample_time_ts,
    )


def build_problems(segment: TrajectorySegment, cfg: PipelineConfig,
                   phase: PhaseLabel) -> list[SubsegmentProblem]:
    problems = []
    ids = feature_ids(phase)
    for k in range(segment.n_subsegments):
        win = segment.subsegment(k)
        ctx = build_context(win, cfg)
        observed = kern.feature_values(
            win.s_f, win.v_f, win.a_f, ctx.leader_position, ctx.leader_velocity,
            ctx.dt, ctx.v_d, ctx.tau_headway, ctx.d_s, ids,
        )
        problems.append(SubsegmentProblem(
            ctx=ctx, p0=float(win.s_f[0]), v0=float(win.v_f[0]), a0=float(win.a_f[0]),
            observed_features=observed,
        ))
    return problems


def _optimized_features(problem: SubsegmentProblem, theta_arr: np.ndarray,
                        ids: np.ndarray) -> np.ndarray:
    ctx = problem.ctx
    free, _cost, _gnorm, _iters, status = kern.optimize_free_coeffs(
        problem.p0, problem.v0, problem.a0,
        ctx.leader_position, ctx.leader_velocity, ctx.dt,
        ctx.v_d, ctx.tau_headway, ctx.d_s, theta_arr, ids,
        INNER_GTOL, INNER_MAX_ITER,
    )
    if status == kern.STATUS_NON_FINITE:
        raise OptimizationError(
            f"non-finite cost at free coefficients {tuple(free)} "
            f"(theta={theta_arr.tolist()})"
        )
    coeffs = np.array([free[0], free[1], free[2], 0.5 * problem.a0, problem.v0, problem.p0])
    pos, vel, acc = kern.quintic_table(coeffs, ctx.dt, ctx.n_samples)
    return kern.feature_values(
        pos, vel, acc, ctx.leader_position, ctx.leader_velocity,
        ctx.dt, ctx.v_d, ctx.tau_headway, ctx.d_s, ids,
    )


def optimize_subsegment(initial_state, theta: WeightVector,
                        ctx: FeatureContext) -> QuinticSegment:
    """Minimum-cost quintic pinned at the given (p0, v0, a0) start state."""
    p0, v0, a0 = initial_state
    free, _cost, _gnorm, _iters, status = kern.optimize_free_coeffs(
        p0, v0, a0, ctx.leader_position, ctx.leader_velocity, ctx.dt,
        ctx.v_d, ctx.tau_headway, ctx.d_s,
        theta.as_array(), feature_ids(theta.phase),
        INNER_GTOL, INNER_MAX_ITER,
    )
    if status == kern.STATUS_NON_FINITE:
        raise OptimizationError(f"non-finite cost at free coefficients {tuple(free)}")
    return QuinticSegment(
        (float(free[0]), float(free[1]), float(free[2]), a0 / 2.0, float(v0), float(p0)),
        ctx.horizon,
    )


def _ngd_loop(problems: list[SubsegmentProblem], phase: PhaseLabel,
              cfg: PipelineConfig) -> tuple[np.ndarray, LearnTrace]:
    ids = feature_ids(phase)
    f_obs = np.mean([p.observed_features for p in problems], axis=0)
    theta = np.ones(len(ids))
    records: list[EpochRecord] = []
    final_gn = math.inf
    converged = False
    epoch = 0
    for epoch in range(1, cfg.max_epochs + 1):
        f_exp = np.mean([_optimized_features(p, theta, ids) for p in problems], axis=0)
        grad = f_obs - f_exp
        if not np.all(np.isfinite(grad)):
            raise OptimizationError(f"non-finite feature gradient {grad.tolist()}")
        final_gn = float(np.linalg.norm(grad))
        if final_gn < cfg.grad_norm_tol:
            converged = True
            break
        eta = cfg.learning_rate(epoch)
        theta = ngd_step(theta, grad, eta)
        records.append(EpochRecord(epoch=epoch, grad_norm=final_gn, eta=eta,
                                   weights=theta.copy()))
    trace = LearnTrace(
        phase=phase,
        initial_weights=np.ones(len(ids)),
        records=records,
        final_grad_norm=final_gn,
        final_epoch=epoch,
        converged=converged,
    )
    return theta, trace


def segment_feature_gap(segment: TrajectorySegment, cfg: PipelineConfig,
                        weights: WeightVector) -> np.ndarray:
    """Observed-minus-optimized mean features of a segment under given weights.

    The norm of this vector is the segment's residual; it is what the NGD
    loop drives below grad_norm_tol.
    """
    problems = build_problems(segment, cfg, weights.phase)
    ids = feature_ids(weights.phase)
    theta_arr = weights.as_array()
    f_obs = np.mean([p.observed_features for p in problems], axis=0)
    f_exp = np.mean([_optimized_features(p, theta_arr, ids) for p in problems], axis=0)
    return f_obs - f_exp


def learn_segment(segment: TrajectorySegment, cfg: PipelineConfig,
                  phase: PhaseLabel | None = None,
                  segment_index: int | None = None) -> tuple[WeightVector, LearnTrace]:
    """Learn one weight vector for one demonstrated segment."""
    if phase is None:
        phase = classify_segment(headway_indicators(segment.window))
    if segment_index is None:
        segment_index = segment.segment_index
    problems = build_problems(segment, cfg, phase)
    theta, trace = _ngd_loop(problems, phase, cfg)
    return WeightVector.from_array(phase, segment_index, theta), trace


@dataclass
class SegmentResult:
    segment_index: int
    phase: PhaseLabel
    weights: WeightVector
    trace: LearnTrace


@dataclass
class LearnAllResult:
    results: list[SegmentResult]

    @property
    def clusters(self) -> dict[PhaseLabel, list[WeightVector]]:
        out: dict[PhaseLabel, list[WeightVector]] = {ph: [] for ph in PhaseLabel}
        for res in self.results:
            out[res.phase].append(res.weights)
        return out


def _learn_indexed(task) -> SegmentResult:
    index, segment, cfg = task
    phase = classify_segment(headway_indicators(segment.window))
    weights, trace = learn_segment(segment, cfg, phase=phase, segment_index=index)
    return SegmentResult(index, phase, weights, trace)


def learn_all(segments: list[TrajectorySegment], cfg: PipelineConfig,
              jobs: int = 1) -> LearnAllResult:
    """Independent per-segment learning; input order sets the global index."""
    if not segments:
        raise ValueError("no segments to learn from")
    tasks = [(index, segment, cfg) for index, segment in enumerate(segments)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_learn_indexed, tasks, chunksize=8))
    else:
        results = [_learn_indexed(task) for task in tasks]
    out = LearnAllResult(results)
    for ph, cluster in out.clusters.items():
        if 0 < len(cluster) < 2:
            log.warning("phase cluster %s has only %d segment(s); "
                        "distribution fitting will fail for it", ph.value, len(cluster))
    return out


def learn_dirl(segments: list[TrajectorySegment], cfg: PipelineConfig,
               ) -> dict[PhaseLabel, tuple[WeightVector, LearnTrace]]:
    """Deterministic baseline: one pooled weight vector per phase cluster."""
    if not segments:
        raise ValueError("no segments to learn from")
    pooled: dict[PhaseLabel, list[SubsegmentProblem]] = {ph: [] for ph in PhaseLabel}
    for segment in segments:
        phase = classify_segment(headway_indicators(segment.window))
        pooled[phase].extend(build_problems(segment, cfg, phase))
    out: dict[PhaseLabel, tuple[WeightVector, LearnTrace]] = {}
    for ph, problems in pooled.items():
        if not problems:
            log.warning("phase cluster %s is empty; skipped", ph.value)
            continue
        theta, trace = _ngd_loop(problems, ph, cfg)
        out[ph] = (WeightVector.from_array(ph, -1, theta), trace)
    return out


WEIGHTS_HEADER = ("cluster", "segment_index", "feature_name", "weight")
LEARN_TRACE_HEADER = ("segment_index", "epoch", "grad_norm", "eta")


def write_weights_csv(weight_vectors: list[WeightVector], path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(WEIGHTS_HEADER)
        for wv in weight_vectors:
            for name in FEATURES_BY_PHASE[wv.phase]:
                writer.writerow([wv.phase.value, wv.segment_index, name,
                                 repr(wv.weights[name])])


def read_weights_csv(path) -> dict[PhaseLabel, list[WeightVector]]:
    grouped: dict[tuple[str, int], dict[str, float]] = {}
    order: list[tuple[str, int]] = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != WEIGHTS_HEADER:
            raise ValueError(f"{path}: bad weights header {header!r}")
        for row in reader:
            cluster, seg_idx, name, value = row
            key = (cluster, int(seg_idx))
            if key not in grouped:
                grouped[key] = {}
                order.append(key)
            grouped[key][name] = float(value)
    out: dict[PhaseLabel, list[WeightVector]] = {ph: [] for ph in PhaseLabel}
    for cluster, seg_idx in order:
        phase = PhaseLabel(cluster)
        names = FEATURES_BY_PHASE[phase]
        values = grouped[(cluster, seg_idx)]
        if set(values) != set(names):
            raise ValueError(
                f"{path}: segment {seg_idx} in {cluster} has features "
                f"{sorted(values)}, expected {sorted(names)}"
            )
        out[phase].append(WeightVector(phase=phase, segment_index=seg_idx,
                                       weights={n: values[n] for n in names}))
    return out


def write_learn_trace_csv(entries: list[tuple[int, LearnTrace]], path) -> None:
    """One row per gradient evaluation: all updates, plus the terminating
    below-tolerance evaluation for converged loops."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LEARN_TRACE_HEADER)
        for seg_idx, trace in entries:
            for rec in trace.records:
                writer.writerow([seg_idx, rec.epoch, repr(rec.grad_norm), repr(rec.eta)])
            if trace.converged:
                writer.writerow([seg_idx, trace.final_epoch,
                                 repr(trace.final_grad_norm), ""])

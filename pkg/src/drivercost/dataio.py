"""Trace ingestion, segmentation, scenarios, and the synthetic generator.

Traces are CSV files with the exact header ``t,s_f,v_f,a_f,s_l,v_l``
(follower position/speed/acceleration, leader position/speed) sampled at a
uniform rate. The synthetic generator stands in for human demonstrations:
a jittered intelligent-driver-model follower behind a scripted leader.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import PipelineConfig, read_kv_file
from .errors import ConfigError, GenerationError, TraceError, ValidationError
from .seeding import rng_for

TRACE_HEADER = ("t", "s_f", "v_f", "a_f", "s_l", "v_l")
_TIME_TOL = 1e-9


@dataclass(frozen=True)
class TraceWindow:
    """A contiguous slice of trace samples (arrays share one grid)."""

    t: np.ndarray
    s_f: np.ndarray
    v_f: np.ndarray
    a_f: np.ndarray
    s_l: np.ndarray
    v_l: np.ndarray

    @property
    def n_samples(self) -> int:
        return len(self.t)

    @property
    def gap(self) -> np.ndarray:
        return self.s_l - self.s_f

    def slice(self, i0: int, i1: int) -> "TraceWindow":
        """Half-open sample range [i0, i1)."""
        return TraceWindow(
            t=self.t[i0:i1], s_f=self.s_f[i0:i1], v_f=self.v_f[i0:i1],
            a_f=self.a_f[i0:i1], s_l=self.s_l[i0:i1], v_l=self.v_l[i0:i1],
        )


@dataclass(frozen=True)
class LeaderFollowerTrace:
    rate_hz: float
    window: TraceWindow

    def __getattr__(self, name):
        # delegate the array fields to the window
        if name in TRACE_HEADER:
            return getattr(self.window, name)
        raise AttributeError(name)

    @property
    def n_samples(self) -> int:
        return self.window.n_samples

    @property
    def duration(self) -> float:
        """Span between first and last timestamp."""
        return float(self.window.t[-1] - self.window.t[0])

    @property
    def gap(self) -> np.ndarray:
        return self.window.gap


def _validate_trace(window: TraceWindow, origin: str) -> float:
    t = window.t
    if len(t) < 2:
        raise TraceError(f"{origin}: need at least 2 samples")
    dt = np.diff(t)
    step = dt[0]
    if step <= 0:
        raise TraceError(f"{origin}: non-increasing timestamps at row 2")
    bad = np.nonzero(np.abs(dt - step) > _TIME_TOL)[0]
    if bad.size:
        raise TraceError(
            f"{origin}: non-uniform sampling at row {bad[0] + 3} "
            f"(dt={dt[bad[0]]!r}, expected {step!r})"
        )
    gap = window.gap
    bad = np.nonzero(gap <= 0)[0]
    if bad.size:
        raise TraceError(f"{origin}: non-positive gap {gap[bad[0]]!r} at row {bad[0] + 2}")
    for name in ("v_f", "v_l"):
        vals = getattr(window, name)
        bad = np.nonzero(vals < 0)[0]
        if bad.size:
            raise TraceError(f"{origin}: negative {name}={vals[bad[0]]!r} at row {bad[0] + 2}")
    return float(1.0 / step)


def make_trace(t, s_f, v_f, a_f, s_l, v_l, origin: str = "trace") -> LeaderFollowerTrace:
    window = TraceWindow(
        t=np.asarray(t, dtype=float), s_f=np.asarray(s_f, dtype=float),
        v_f=np.asarray(v_f, dtype=float), a_f=np.asarray(a_f, dtype=float),
        s_l=np.asarray(s_l, dtype=float), v_l=np.asarray(v_l, dtype=float),
    )
    rate = _validate_trace(window, origin)
    return LeaderFollowerTrace(rate_hz=rate, window=window)


def read_trace(path: str | Path) -> LeaderFollowerTrace:
    """Read and validate one demonstration CSV; rate is inferred from t."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceError(f"{path}: empty file") from None
        if tuple(header) != TRACE_HEADER:
            raise TraceError(f"{path}: bad header {header!r}, expected {','.join(TRACE_HEADER)}")
        cols: list[list[float]] = [[] for _ in TRACE_HEADER]
        for rowno, row in enumerate(reader, start=2):
            if len(row) != len(TRACE_HEADER):
                raise TraceError(f"{path}: row {rowno} has {len(row)} fields, expected 6")
            try:
                values = [float(x) for x in row]
            except ValueError as exc:
                raise TraceError(f"{path}: row {rowno}: {exc}") from None
            for col, val in zip(cols, values):
                col.append(val)
    return make_trace(*cols, origin=str(path))


def write_trace(trace: LeaderFollowerTrace, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        w = trace.window
        for i in range(w.n_samples):
            writer.writerow([
                repr(float(w.t[i])), repr(float(w.s_f[i])), repr(float(w.v_f[i])),
                repr(float(w.a_f[i])), repr(float(w.s_l[i])), repr(float(w.v_l[i])),
            ])


@dataclass(frozen=True)
class TrajectorySegment:
    """One T_H window of a trace, tiled by L closed subsegment windows.

    Consecutive subsegments (and consecutive segments) share their boundary
    sample so trapezoidal integrals tile the window exactly.
    """

    segment_index: int
    window: TraceWindow
    steps_per_subsegment: int

    @property
    def n_subsegments(self) -> int:
        return (self.window.n_samples - 1) // self.steps_per_subsegment

    def subsegment(self, k: int) -> TraceWindow:
        if not 0 <= k < self.n_subsegments:
            raise IndexError(f"subsegment {k} out of range ({self.n_subsegments})")
        i0 = k * self.steps_per_subsegment
        return self.window.slice(i0, i0 + self.steps_per_subsegment + 1)


def segment_trace(trace: LeaderFollowerTrace, cfg: PipelineConfig) -> list[TrajectorySegment]:
    """Cut a trace into full T_H segments; the trailing remainder is dropped."""
    expected_rate = 1.0 / cfg.sample_time_ts
    if abs(trace.rate_hz - expected_rate) > 1e-6 * expected_rate:
        raise TraceError(
            f"trace rate {trace.rate_hz} Hz does not match configured 1/T_s = {expected_rate} Hz"
        )
    steps = cfg.steps_per_segment
    n_segments = (trace.n_samples - 1) // steps
    if n_segments < 1:
        raise TraceError(
            f"trace duration {trace.duration:.3f} s is shorter than one segment "
            f"({cfg.segment_len_th} s)"
        )
    return [
        TrajectorySegment(
            segment_index=i,
            window=trace.window.slice(i * steps, i * steps + steps + 1),
            steps_per_subsegment=cfg.steps_per_subsegment,
        )
        for i in range(n_segments)
    ]


@dataclass(frozen=True)
class ScenarioSpec:
    """A scripted leader plus initial conditions for the follower."""

    scenario_id: str
    leader_profile: tuple[tuple[float, float], ...]  # (t, speed) breakpoints
    duration: float
    initial_gap: float
    initial_follower_speed: float

    def __post_init__(self):
        if self.duration <= 0:
            raise ValidationError(f"{self.scenario_id}: duration must be > 0")
        if self.initial_gap <= 0:
            raise ValidationError(f"{self.scenario_id}: initial_gap must be > 0")
        if self.initial_follower_speed < 0:
            raise ValidationError(f"{self.scenario_id}: initial_follower_speed must be >= 0")
        if not self.leader_profile:
            raise ValidationError(f"{self.scenario_id}: empty leader_profile")
        ts = [t for t, _ in self.leader_profile]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValidationError(f"{self.scenario_id}: leader_profile times must increase")
        if any(v < 0 for _, v in self.leader_profile):
            raise ValidationError(f"{self.scenario_id}: leader speeds must be >= 0")

    def leader_speed(self, t) -> np.ndarray:
        """Piecewise-linear leader speed; held constant beyond the last point."""
        ts = np.array([p[0] for p in self.leader_profile])
        vs = np.array([p[1] for p in self.leader_profile])
        return np.interp(np.asarray(t, dtype=float), ts, vs)


def leader_arrays(spec: ScenarioSpec, dt: float, n_samples: int,
                  start_position: float) -> tuple[np.ndarray, np.ndarray]:
    """Leader (position, speed) on the grid t = i*dt from start_position."""
    t = dt * np.arange(n_samples)
    v = spec.leader_speed(t)
    pos = np.empty(n_samples)
    pos[0] = start_position
    if n_samples > 1:
        pos[1:] = start_position + np.cumsum(0.5 * (v[:-1] + v[1:]) * dt)
    return pos, v


def read_scenario(path: str | Path) -> ScenarioSpec:
    """Parse a scenario file in the same key=value dialect as the config."""
    raw = read_kv_file(path)
    known = {"scenario_id", "duration", "initial_gap", "initial_follower_speed", "leader_profile"}
    for key in raw:
        if key not in known:
            raise ConfigError(f"{path}: unknown scenario key {key!r}")
    missing = known - set(raw)
    if missing:
        raise ConfigError(f"{path}: missing scenario key(s): {', '.join(sorted(missing))}")
    try:
        profile = []
        for pair in raw["leader_profile"].split(","):
            t_str, _, v_str = pair.strip().partition(":")
            profile.append((float(t_str), float(v_str)))
        spec = ScenarioSpec(
            scenario_id=raw["scenario_id"],
            leader_profile=tuple(profile),
            duration=float(raw["duration"]),
            initial_gap=float(raw["initial_gap"]),
            initial_follower_speed=float(raw["initial_follower_speed"]),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return spec


def write_scenario(spec: ScenarioSpec, path: str | Path) -> None:
    profile = ", ".join(f"{t:g}:{v:g}" for t, v in spec.leader_profile)
    Path(path).write_text(
        f"scenario_id = {spec.scenario_id}\n"
        f"duration = {spec.duration:g}\n"
        f"initial_gap = {spec.initial_gap:g}\n"
        f"initial_follower_speed = {spec.initial_follower_speed:g}\n"
        f"leader_profile = {profile}\n"
    )


def default_scenarios() -> list[ScenarioSpec]:
    """Nine representative car-following scenarios (cruise, stop-and-go,
    ramps, braking, approach, free road)."""
    return [
        ScenarioSpec("steady_cruise",
                     ((0, 20), (6, 20), (9, 16.5), (14, 16.5), (18, 21), (26, 21),
                      (30, 17.5), (35, 17.5), (40, 20.5)),
                     40, 28, 19),
        ScenarioSpec("slow_follow",
                     ((0, 9), (6, 9), (9, 12), (15, 12), (19, 7), (26, 7), (30, 11),
                      (36, 11), (40, 8.5)),
                     40, 12, 9),
        ScenarioSpec(
            "stop_and_go",
            ((0, 8), (8, 8), (13, 0), (18, 0), (24, 8), (32, 8), (37, 2), (44, 2)),
            44, 15, 8,
        ),
        ScenarioSpec(
            "hard_brake", ((0, 22), (12, 22), (15, 8), (22, 8), (26, 20), (40, 20)),
            40, 30, 20,
        ),
        ScenarioSpec("ramp_up", ((0, 6), (10, 6), (25, 22), (40, 22)), 40, 18, 6),
        ScenarioSpec("ramp_down", ((0, 24), (10, 24), (25, 7), (40, 7)), 40, 32, 22),
        ScenarioSpec("open_road", ((0, 27), (40, 27)), 40, 30, 20),
        ScenarioSpec("approach",
                     ((0, 10), (12, 10), (16, 7.5), (22, 7.5), (26, 12), (34, 12),
                      (38, 13), (44, 13)),
                     44, 55, 9),
        ScenarioSpec(
            "urban_mix",
            ((0, 14), (8, 14), (12, 5), (18, 5), (23, 16), (30, 16), (34, 9), (40, 12), (44, 12)),
            44, 20, 13,
        ),
    ]


@dataclass(frozen=True)
class SynthDriverParams:
    """Base follower model parameters plus richness knobs.

    desired_speed, time_headway, max_accel and comfort_decel are jittered
    per trial by a uniform relative factor in [-style_jitter, +style_jitter].
    Within a trial, desired_speed and time_headway additionally drift as a
    slow mean-reverting walk (drivers renegotiate their targets over tens of
    seconds), and the commanded acceleration carries zero-mean noise.
    """

    desired_speed: float = 23.0     # [m/s]
    time_headway: float = 1.4       # [s]
    max_accel: float = 1.8          # [m/s^2]
    comfort_decel: float = 2.0      # [m/s^2]
    jam_distance: float = 6.0       # [m], above the planner safety gap
    accel_exponent: float = 4.0
    max_brake: float = 5.5          # hard deceleration cap [m/s^2]
    style_jitter: float = 0.30      # relative half-width of per-trial jitter
    style_drift: float = 0.05       # stationary relative std of in-trial drift
    drift_time_const: float = 10.0  # mean-reversion time of the drift [s]
    accel_noise_std: float = 0.02   # [m/s^2]


def _style_drift(rng, n: int, dt: float, p: SynthDriverParams):
    """Mean-reverting multiplicative drift of the driver's targets (two
    independent walks for desired speed and time headway)."""
    if p.style_drift <= 0:
        ones = np.ones(n)
        return ones, ones
    rho = float(np.exp(-dt / p.drift_time_const))
    scale = p.style_drift * np.sqrt(1.0 - rho * rho)
    shocks = rng.normal(0.0, scale, size=(2, n))
    walks = np.empty((2, n))
    state = np.zeros(2)
    for i in range(n):
        state = rho * state + shocks[:, i]
        walks[:, i] = state
    return np.clip(1.0 + walks[0], 0.5, 1.5), np.clip(1.0 + walks[1], 0.5, 1.5)


def _idm_accel(v, gap, dv, p: SynthDriverParams, desired_speed, time_headway,
               max_accel, comfort_decel) -> float:
    s_star = p.jam_distance + max(
        0.0, v * time_headway + v * dv / (2.0 * np.sqrt(max_accel * comfort_decel))
    )
    accel = max_accel * (1.0 - (v / desired_speed) ** p.accel_exponent - (s_star / gap) ** 2)
    return float(np.clip(accel, -p.max_brake, max_accel))


def synth_trial(spec: ScenarioSpec, trial: int, params: SynthDriverParams,
                seed: int, rate_hz: float = 10.0) -> LeaderFollowerTrace:
    """Simulate one follower trial behind the scripted leader.

    Deterministic in (seed, scenario_id, trial). The written acceleration
    column is the forward difference of v_f, so it is always consistent
    with the recorded speeds.
    """
    rng = rng_for(seed, "synth", spec.scenario_id, trial)
    jit = 1.0 + params.style_jitter * rng.uniform(-1.0, 1.0, size=4)
    desired_speed = max(0.5, params.desired_speed * jit[0])
    time_headway = max(0.2, params.time_headway * jit[1])
    max_accel = max(0.3, params.max_accel * jit[2])
    comfort_decel = max(0.3, params.comfort_decel * jit[3])

    dt = 1.0 / rate_hz
    n = int(round(spec.duration * rate_hz)) + 1
    noise = rng.normal(0.0, params.accel_noise_std, size=n - 1) if params.accel_noise_std > 0 \
        else np.zeros(n - 1)
    drift_ds, drift_th = _style_drift(rng, n - 1, dt, params)

    s_l, v_l = leader_arrays(spec, dt, n, start_position=spec.initial_gap)
    t = dt * np.arange(n)
    s_f = np.empty(n)
    v_f = np.empty(n)
    s_f[0] = 0.0
    v_f[0] = spec.initial_follower_speed
    for i in range(n - 1):
        gap = s_l[i] - s_f[i]
        if gap <= 0:
            raise GenerationError(
                f"simulated collision in scenario {spec.scenario_id!r} trial {trial} "
                f"at t={t[i]:.1f} s (check driver parameters)"
            )
        a = _idm_accel(v_f[i], gap, v_f[i] - v_l[i], params,
                       desired_speed * drift_ds[i], time_headway * drift_th[i],
                       max_accel, comfort_decel)
        a += noise[i]
        s_f[i + 1] = s_f[i] + v_f[i] * dt
        v_f[i + 1] = max(0.0, v_f[i] + a * dt)
    if s_l[-1] - s_f[-1] <= 0:
        raise GenerationError(
            f"simulated collision in scenario {spec.scenario_id!r} trial {trial} at trace end"
        )

    a_f = np.empty(n)
    a_f[:-1] = np.diff(v_f) / dt
    a_f[-1] = a_f[-2]
    return make_trace(t, s_f, v_f, a_f, s_l, v_l,
                      origin=f"synth:{spec.scenario_id}:{trial}")


def synth_dataset(scenarios, trials_per_scenario: int, params: SynthDriverParams,
                  seed: int, rate_hz: float = 10.0) -> list[LeaderFollowerTrace]:
    """All scenario x trial traces, scenario-major, trial-ascending."""
    if trials_per_scenario < 1:
        raise ValidationError(f"trials_per_scenario must be >= 1, got {trials_per_scenario}")
    return [
        synth_trial(spec, trial, params, seed, rate_hz)
        for spec in scenarios
        for trial in range(trials_per_scenario)
    ]

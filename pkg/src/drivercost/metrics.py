"""Evaluation: RMSE of generated trajectories against observed test means.

Per scenario, the observed test repetitions are averaged pointwise into a
mean speed and mean acceleration series; every generated sample is scored
against those means, then RMSEs are averaged over samples and finally over
scenarios (documented order: samples first, then scenarios).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataio import LeaderFollowerTrace
from .nmpc import GeneratedSeries

log = logging.getLogger(__name__)


def rmse_series(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"series length mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty series")
    return float(np.sqrt(np.mean((a - b) ** 2)))


@dataclass(frozen=True)
class ScenarioEval:
    scenario_id: str
    speed_rmse: float
    accel_rmse: float
    n_samples: int
    n_observed: int


@dataclass(frozen=True)
class EvalReport:
    mode: str
    scenarios: tuple[ScenarioEval, ...]
    overall_speed_rmse: float
    overall_accel_rmse: float


def _common_grid(observed: list[LeaderFollowerTrace], generated: list[GeneratedSeries]):
    """Shared time grid: the coarser sampling over the common span."""
    steps = [t.t[1] - t.t[0] for t in observed] + [g.t[1] - g.t[0] for g in generated]
    dt = max(float(s) for s in steps)
    t_end = min(min(float(t.t[-1]) for t in observed),
                min(float(g.t[-1]) for g in generated))
    t_start = max(max(float(t.t[0]) for t in observed),
                  max(float(g.t[0]) for g in generated))
    n = int(np.floor((t_end - t_start) / dt + 1e-9))
    grid = t_start + dt * np.arange(n + 1)
    grid[-1] = t_end  # preserve the endpoint exactly
    return grid


def evaluate(observed_test: dict[str, list[LeaderFollowerTrace]],
             generated: dict[str, list[GeneratedSeries]], mode: str) -> EvalReport:
    """Score generated samples against the mean observed test trajectories."""
    rows: list[ScenarioEval] = []
    for scenario_id in sorted(set(observed_test) | set(generated)):
        obs = observed_test.get(scenario_id, [])
        gen = generated.get(scenario_id, [])
        if not obs or not gen:
            log.warning("scenario %s skipped: %d observed, %d generated",
                        scenario_id, len(obs), len(gen))
            continue
        grid = _common_grid(obs, gen)
        accel_grid = grid[:-1]  # applied accelerations stop one step early
        mean_speed = np.mean([np.interp(grid, tr.t, tr.v_f) for tr in obs], axis=0)
        mean_accel = np.mean([np.interp(accel_grid, tr.t, tr.a_f) for tr in obs], axis=0)
        speed_rmses = []
        accel_rmses = []
        for g in gen:
            speed_rmses.append(rmse_series(np.interp(grid, g.t, g.speed), mean_speed))
            accel_rmses.append(rmse_series(np.interp(accel_grid, g.t[:-1], g.accel), mean_accel))
        rows.append(ScenarioEval(
            scenario_id=scenario_id,
            speed_rmse=float(np.mean(speed_rmses)),
            accel_rmse=float(np.mean(accel_rmses)),
            n_samples=len(gen),
            n_observed=len(obs),
        ))
    if not rows:
        raise ValueError("no scenario had both observed and generated data")
    return EvalReport(
        mode=mode,
        scenarios=tuple(rows),
        overall_speed_rmse=float(np.mean([r.speed_rmse for r in rows])),
        overall_accel_rmse=float(np.mean([r.accel_rmse for r in rows])),
    )


EVAL_HEADER = ("scenario", "mode", "speed_rmse", "accel_rmse", "n_samples", "n_observed")


def write_eval_csv(report: EvalReport, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVAL_HEADER)
        for row in report.scenarios:
            writer.writerow([row.scenario_id, report.mode, repr(row.speed_rmse),
                             repr(row.accel_rmse), row.n_samples, row.n_observed])
        writer.writerow(["overall", report.mode, repr(report.overall_speed_rmse),
                         repr(report.overall_accel_rmse),
                         sum(r.n_samples for r in report.scenarios),
                         sum(r.n_observed for r in report.scenarios)])


def read_eval_csv(path: str | Path) -> dict:
    """Returns {scenario: (speed_rmse, accel_rmse)} plus an 'overall' key."""
    out = {}
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out[row["scenario"]] = (float(row["speed_rmse"]), float(row["accel_rmse"]))
    return out


def format_comparison_table(sirl: EvalReport, dirl: EvalReport,
                            reference_speed_gain: float = 0.24,
                            reference_accel_gain: float = 0.27) -> str:
    """Human-readable RMSE table; averaging order is samples, then scenarios."""
    lines = [
        "RMSE vs mean observed test trajectories (averaged over samples, then scenarios)",
        "",
        f"{'scenario':<16} {'speed sirl':>11} {'speed dirl':>11} {'accel sirl':>11} {'accel dirl':>11}",
    ]
    dirl_by_id = {r.scenario_id: r for r in dirl.scenarios}
    for row in sirl.scenarios:
        d = dirl_by_id.get(row.scenario_id)
        lines.append(
            f"{row.scenario_id:<16} {row.speed_rmse:>11.3f} "
            f"{(d.speed_rmse if d else float('nan')):>11.3f} "
            f"{row.accel_rmse:>11.3f} {(d.accel_rmse if d else float('nan')):>11.3f}"
        )
    lines.append(
        f"{'overall':<16} {sirl.overall_speed_rmse:>11.3f} {dirl.overall_speed_rmse:>11.3f} "
        f"{sirl.overall_accel_rmse:>11.3f} {dirl.overall_accel_rmse:>11.3f}"
    )
    def gain(sirl_value, dirl_value):
        if dirl_value == 0:
            return "n/a (baseline RMSE is zero)"
        return f"{1.0 - sirl_value / dirl_value:+.1%}"

    lines += [
        "",
        f"speed RMSE improvement over deterministic baseline: "
        f"{gain(sirl.overall_speed_rmse, dirl.overall_speed_rmse)} "
        f"(reference: {reference_speed_gain:+.0%})",
        f"accel RMSE improvement over deterministic baseline: "
        f"{gain(sirl.overall_accel_rmse, dirl.overall_accel_rmse)} "
        f"(reference: {reference_accel_gain:+.0%})",
    ]
    return "\n".join(lines)


def fan_rows(scenario_id: str, observed: list[LeaderFollowerTrace],
             generated: list[GeneratedSeries]) -> list[list]:
    """Long-format plot data: observed mean plus every generated sample."""
    grid = _common_grid(observed, generated)
    accel_grid = grid[:-1]
    mean_speed = np.mean([np.interp(grid, tr.t, tr.v_f) for tr in observed], axis=0)
    mean_accel = np.mean([np.interp(accel_grid, tr.t, tr.a_f) for tr in observed], axis=0)
    rows = []
    for i, t in enumerate(grid):
        a = repr(float(mean_accel[i])) if i < len(accel_grid) else ""
        rows.append([scenario_id, "observed_mean", repr(float(t)),
                     repr(float(mean_speed[i])), a])
    for g in generated:
        speed = np.interp(grid, g.t, g.speed)
        accel = np.interp(accel_grid, g.t[:-1], g.accel)
        for i, t in enumerate(grid):
            a = repr(float(accel[i])) if i < len(accel_grid) else ""
            rows.append([scenario_id, f"sample_{g.sample_id:03d}", repr(float(t)),
                         repr(float(speed[i])), a])
    return rows

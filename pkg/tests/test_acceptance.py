"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines live.
Criteria 6-8 share one full-pipeline run (9 scenarios x 30 trials, 25/5
split, 50 stochastic samples per scenario) executed twice for the
determinism check; expect roughly 10 minutes total with compiled kernels.
"""

import csv
import time
from pathlib import Path

import numpy as np
import pytest
from helpers import build_demo_segment, smooth_trajectory_arrays, smooth_trajectory_draw
from scipy import stats

from drivercost.cli import run
from drivercost.config import PipelineConfig
from drivercost.copula import fit_copula, implied_kendall_tau, sample_weights
from drivercost.dataio import default_scenarios
from drivercost.features import FeatureContext, compute_features, headway_indicators
from drivercost.metrics import read_eval_csv
from drivercost.nmpc import ROLLOUT_HEADER, RolloutState, step_dynamics
from drivercost.phase import FEATURES_BY_PHASE, Indicators, PhaseLabel, classify_segment
from drivercost.sirl import WeightVector, learn_segment, segment_feature_gap

SEED = 42


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")


# ---------------------------------------------------------- criteria 1 + 2

@pytest.fixture(scope="session")
def closure_run():
    """>= 20 demonstration segments built from a known weight vector, learned back."""
    cfg = PipelineConfig(safe_gap_ds=20.0, rng_seed=0)
    theta_star = WeightVector(
        PhaseLabel.UNSTEADY_FOLLOWING, 0,
        {"f_a": 1.2, "f_ds": 0.7, "f_rs": 1.1, "f_sd": 0.15},
    )
    rng = np.random.default_rng(10)
    t0 = time.time()
    results = []
    for i in range(24):
        seg = build_demo_segment(
            theta_star, cfg,
            leader_speed=rng.uniform(3.9, 4.3),
            gap0=rng.uniform(24.5, 28.0),
            v0=rng.uniform(3.3, 3.9),
            a0=rng.uniform(-0.15, 0.15),
            seg_index=i,
        )
        assert classify_segment(headway_indicators(seg.window)) is PhaseLabel.UNSTEADY_FOLLOWING
        weights, trace = learn_segment(seg, cfg)
        results.append((seg, weights, trace))
    return cfg, results, time.time() - t0


def test_criterion_1_generate_then_learn_closure(closure_run):
    cfg, results, elapsed = closure_run
    converged = [trace.converged for _, _, trace in results]
    frac = np.mean(converged)
    feature_ok = True
    for seg, weights, trace in results:
        if not trace.converged:
            continue
        gap = segment_feature_gap(seg, cfg, weights)
        feature_ok &= bool(np.all(np.abs(gap) < 2e-2))
    ok = frac >= 0.95 and feature_ok
    report(1, ok, f"{sum(converged)}/{len(results)} segments reached ||grad|| < 1e-2 "
                  f"within {cfg.max_epochs} epochs; per-feature match < 2e-2: "
                  f"{feature_ok} ({elapsed:.1f} s)")
    assert frac >= 0.95
    assert feature_ok


def test_criterion_2_ngd_mechanics(closure_run):
    cfg, results, _ = closure_run
    checked = 0
    for _, _, trace in results:
        prev = trace.initial_weights
        for rec in trace.records:
            step = float(np.linalg.norm(rec.weights - prev))
            assert step == pytest.approx(rec.eta, rel=1e-12), "||dtheta|| must equal eta"
            expected_eta = 0.2 * 2.0 ** (-((rec.epoch - 1) // 5))
            assert rec.eta == expected_eta  # exact: halving is exact in binary
            prev = rec.weights
            checked += 1
    report(2, True, f"{checked} recorded epochs satisfy ||dtheta||_2 == eta and the "
                    f"0.2 * 2^(-floor((epoch-1)/5)) schedule exactly")


# ---------------------------------------------------------------- criterion 3

def test_criterion_3_feature_quadrature_oracle():
    rng = np.random.default_rng(3)
    d_s = 5.0
    worst = 0.0
    for _ in range(100):
        draw = smooth_trajectory_draw(rng)
        pos, vel, acc, lead_pos, lead_vel, v_d, tau = smooth_trajectory_arrays(draw, 0.1, 11, d_s)
        ctx = FeatureContext(lead_pos, lead_vel, v_d=v_d, tau_headway=tau,
                             d_s=d_s, horizon=1.0, dt=0.1)
        coarse = np.concatenate([
            compute_features(pos, vel, acc, ctx, ph).as_array() for ph in PhaseLabel
        ])
        # oracle: independent trapezoid quadrature on a 10x finer grid
        f_pos, f_vel, f_acc, f_lp, f_lv, _, _ = smooth_trajectory_arrays(draw, 0.01, 101, d_s)
        gap = f_lp - f_pos
        integrands = {
            "f_a": f_acc**2,
            "f_ds": (v_d - f_vel) ** 2,
            "f_rs": (f_lv - f_vel) ** 2,
            "f_cd": (gap - (f_vel * tau + d_s)) ** 2,
            "f_sd": (gap - d_s) ** 2,
            "f_fd": np.exp(-gap),
        }
        fine = np.concatenate([
            np.array([np.trapezoid(integrands[name], dx=0.01)
                      for name in FEATURES_BY_PHASE[ph]])
            for ph in PhaseLabel
        ])
        rel = np.abs(coarse - fine) / np.abs(fine)
        worst = max(worst, float(rel.max()))
        assert np.all(rel <= 0.01)
    report(3, True, f"100 smooth trajectories: worst trapezoid-vs-oracle deviation "
                    f"{worst:.2%} (< 1%)")


# ---------------------------------------------------------------- criterion 4

def test_criterion_4_phase_truth_table():
    cases = 0
    for thw in (5.99, 6.0):
        for ttci in (-0.01, 0.0, 0.049, 0.05):
            for gap in (34.9, 35.0):
                for speed in (4.9, 5.0):
                    # independent re-statement of the rule
                    if thw < 6.0 and ttci < 0.05:
                        expected = PhaseLabel.STEADY_FOLLOWING
                    elif thw >= 6.0 and ttci <= 0.0 and gap >= 35.0 and speed >= 5.0:
                        expected = PhaseLabel.FREE_MOTION
                    else:
                        expected = PhaseLabel.UNSTEADY_FOLLOWING
                    got = classify_segment(Indicators(thw, ttci, gap, speed))
                    assert got is expected, (thw, ttci, gap, speed)
                    cases += 1
    report(4, True, f"all {cases} boundary indicator tuples map to the expected labels")


# ---------------------------------------------------------------- criterion 5

def test_criterion_5_copula_round_trip():
    t0 = time.time()
    rng = np.random.default_rng(7)
    corr = np.array([
        [1.0, 0.5, 0.2, 0.0],
        [0.5, 1.0, 0.4, 0.1],
        [0.2, 0.4, 1.0, 0.3],
        [0.0, 0.1, 0.3, 1.0],
    ])
    chol = np.linalg.cholesky(corr)
    z = rng.standard_normal((500, 4)) @ chol.T
    g = rng.chisquare(6, 500)
    u = stats.t.cdf(z / np.sqrt(g / 6)[:, None], df=6)
    data = np.column_stack([
        np.exp(0.3 * stats.norm.ppf(u[:, 0])),
        stats.gamma.ppf(u[:, 1], a=3.0),
        1.0 + 0.5 * stats.norm.ppf(u[:, 2]),
        stats.expon.ppf(u[:, 3]),
    ])
    weights = [WeightVector.from_array(PhaseLabel.STEADY_FOLLOWING, i, row)
               for i, row in enumerate(data)]
    model = fit_copula(weights)
    samples = np.vstack([w.as_array() for w in sample_weights(model, 10_000, seed=3)])
    implied = implied_kendall_tau(model)
    worst_tau = 0.0
    for i in range(4):
        for j in range(i + 1, 4):
            tau, _ = stats.kendalltau(samples[:, i], samples[:, j])
            worst_tau = max(worst_tau, abs(tau - implied[i, j]))
            assert abs(tau - implied[i, j]) < 0.1
    worst_ks = 0.0
    for j in range(4):
        ks = stats.kstest(samples[:, j], model.marginals[j].cdf).statistic
        worst_ks = max(worst_ks, ks)
        assert ks < 0.02
    report(5, True, f"fit on 500, sampled 10000: worst Kendall-tau gap {worst_tau:.3f} "
                    f"(< 0.1), worst marginal KS {worst_ks:.4f} (< 0.02) "
                    f"({time.time() - t0:.0f} s)")


# ------------------------------------------------- full pipeline (6, 7, 8)

def _run_pipeline(out: Path) -> None:
    steps = [
        ["synth", "--seed", str(SEED), "--trials", "30", "--jobs", "4",
         "--out", str(out / "data")],
        ["learn", "--in", str(out / "data"), "--out", str(out / "model"),
         "--seed", str(SEED), "--train-per-scenario", "25", "--test-per-scenario", "5",
         "--jobs", "4"],
        ["learn", "--in", str(out / "data"), "--out", str(out / "model_dirl"),
         "--seed", str(SEED), "--train-per-scenario", "25", "--test-per-scenario", "5",
         "--dirl"],
        ["fit-copula", "--in", str(out / "model" / "weights.csv"),
         "--out", str(out / "copula")],
        ["generate", "--model", str(out / "copula"), "--scenario", "all",
         "--n", "50", "--seed", str(SEED), "--jobs", "4", "--out", str(out / "gen")],
        ["generate", "--model", str(out / "model_dirl"), "--scenario", "all",
         "--dirl", "--out", str(out / "gen_dirl")],
        ["eval", "--observed", str(out / "data"),
         "--manifest", str(out / "model" / "split_manifest.csv"),
         "--generated", str(out / "gen"), "--out", str(out / "eval_sirl.csv")],
        ["eval", "--observed", str(out / "data"),
         "--manifest", str(out / "model" / "split_manifest.csv"),
         "--generated", str(out / "gen_dirl"), "--dirl",
         "--out", str(out / "eval_dirl.csv")],
    ]
    for argv in steps:
        assert run(argv) == 0, f"pipeline stage failed: {argv[0]}"


@pytest.fixture(scope="session")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance_pipeline")
    times = {}
    for tag in ("run_a", "run_b"):
        t0 = time.time()
        _run_pipeline(root / tag)
        times[tag] = time.time() - t0
    print(f"\npipeline runs: {times['run_a']:.0f} s + {times['run_b']:.0f} s")
    return root


def test_criterion_6_rollout_safety(pipeline):
    cfg = PipelineConfig()
    v_max_by_scenario = {}
    for spec in default_scenarios():
        n_steps = int(round(spec.duration / cfg.sample_time_ts))
        grid = cfg.sample_time_ts * np.arange(n_steps + 1)
        v_max_by_scenario[spec.scenario_id] = float(spec.leader_speed(grid).max())

    checked = flagged = 0
    worst_gap = np.inf
    for scen_dir in sorted((pipeline / "run_a" / "gen").iterdir()):
        v_max = v_max_by_scenario[scen_dir.name]
        with (scen_dir / "flags.csv").open(newline="") as fh:
            flags = {int(row["sample_id"]): row["infeasible_forced_braking"] == "1"
                     for row in csv.DictReader(fh)}
        for sample in sorted(scen_dir.glob("sample_*.csv")):
            with sample.open(newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader)
                assert tuple(header) == ROLLOUT_HEADER
                rows = list(reader)
            sample_id = int(rows[0][0])
            if flags[sample_id]:
                flagged += 1
                continue
            gap = np.array([float(r[2]) for r in rows])
            v_h = np.array([float(r[3]) for r in rows])
            assert gap.min() >= cfg.safe_gap_ds, (scen_dir.name, sample_id, gap.min())
            assert v_h.min() >= cfg.v_min, (scen_dir.name, sample_id, v_h.min())
            assert v_h.max() <= v_max, (scen_dir.name, sample_id, v_h.max(), v_max)
            worst_gap = min(worst_gap, float(gap.min()))
            checked += 1
    report(6, True, f"{checked} unflagged rollouts (of 450, {flagged} flagged) satisfy "
                    f"d >= 5 m and 0 <= V_H <= V_max at every step; tightest gap "
                    f"{worst_gap:.3f} m")
    assert checked >= 400


def test_criterion_7_sirl_beats_dirl(pipeline):
    """Strict RMSE inequalities on the 9x30 benchmark.

    The acceleration half currently fails for structural reasons recorded in
    the engineering ledger: per-segment weight resampling adds boundary
    transients that per-sample-vs-mean scoring charges to the stochastic
    model, while the pooled baseline's acceleration stays unbiased on data
    from a coherent car-following law.
    """
    sirl = read_eval_csv(pipeline / "run_a" / "eval_sirl.csv")["overall"]
    dirl = read_eval_csv(pipeline / "run_a" / "eval_dirl.csv")["overall"]
    speed_gain = 1.0 - sirl[0] / dirl[0]
    accel_gain = 1.0 - sirl[1] / dirl[1]
    speed_ok = sirl[0] < dirl[0]
    accel_ok = sirl[1] < dirl[1]
    report(7, speed_ok and accel_ok,
           f"speed RMSE {sirl[0]:.3f} vs {dirl[0]:.3f} m/s "
           f"({speed_gain:+.1%} improvement, reference +24%) -> "
           f"{'PASS' if speed_ok else 'FAIL'}; "
           f"accel RMSE {sirl[1]:.3f} vs {dirl[1]:.3f} m/s^2 "
           f"({accel_gain:+.1%} improvement, reference +27%) -> "
           f"{'PASS' if accel_ok else 'FAIL'}")
    assert speed_ok, "stochastic model must beat the baseline on speed RMSE"
    assert accel_ok, "stochastic model must beat the baseline on accel RMSE"


def test_criterion_8_pipeline_determinism(pipeline):
    def tree(root: Path) -> dict:
        return {str(p.relative_to(root)): p for p in sorted(root.rglob("*")) if p.is_file()}

    a = tree(pipeline / "run_a")
    b = tree(pipeline / "run_b")
    assert set(a) == set(b)
    differing = [name for name in a if a[name].read_bytes() != b[name].read_bytes()]
    report(8, not differing,
           f"{len(a)} output files byte-identical across two full runs"
           + (f"; differing: {differing[:5]}" if differing else ""))
    assert not differing


# ---------------------------------------------------------------- criterion 9

def test_criterion_9_dynamics_exactness():
    t0 = time.time()
    rng = np.random.default_rng(9)
    n = 1_000_000
    d0 = rng.uniform(0.1, 200.0, n)
    vh = rng.uniform(-5.0, 40.0, n)
    vpv = rng.uniform(0.0, 40.0, n)
    a = rng.uniform(-8.0, 5.0, n)
    ts = rng.uniform(0.01, 0.5, n)
    vpv_next = rng.uniform(0.0, 40.0, n)
    # closed-form oracle, vectorized with the same expression structure
    expect_d = (vpv - vh) * ts + d0
    expect_v = vh + a * ts
    for i in range(n):
        state = RolloutState(t=0.0, d=d0[i], v_h=vh[i], v_pv=vpv[i], s_h=0.0)
        nxt = step_dynamics(state, a[i], ts[i], vpv_next[i])
        if nxt.d != expect_d[i] or nxt.v_h != expect_v[i] or nxt.v_pv != vpv_next[i]:
            raise AssertionError(f"mismatch at case {i}")
    report(9, True, f"10^6 randomized steps match the closed-form update exactly "
                    f"({time.time() - t0:.1f} s)")

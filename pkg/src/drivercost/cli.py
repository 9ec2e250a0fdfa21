"""Command-line orchestration with file-based handoff between stages.

Stages read and write only documented CSV/JSON formats, so each is
independently re-runnable:

    synth         scenarios -> trace CSVs
    segment       trace CSVs -> per-segment phase/indicator summary
    learn         trace CSVs -> weights.csv + learntrace.csv (+ split manifest)
    fit-copula    weights.csv -> one distribution JSON per phase cluster
    generate      model dir + scenario -> rollout CSVs
    eval          rollouts + observed test traces -> RMSE report
    phase-inspect trace CSVs -> speed/gap clusters vs rule labels
    report        bundles evaluation, comparison and plot-data CSVs

Exit codes: 0 success, 1 validation/usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import get_backend
from .config import PipelineConfig, build_config, load_config, parse_config_value
from .copula import fit_copula, load_copula_model, save_copula_model
from .dataio import (
    ScenarioSpec,
    SynthDriverParams,
    default_scenarios,
    read_scenario,
    read_trace,
    segment_trace,
    synth_trial,
    write_trace,
)
from .errors import ConfigError, FitError, PipelineError, TraceError, ValidationError
from .features import headway_indicators
from .metrics import (
    evaluate,
    fan_rows,
    format_comparison_table,
    write_eval_csv,
)
from .nmpc import read_rollout_csv, rollout, write_rollout_csv
from .phase import PhaseLabel, classify_segment, kmeans_speed_gap
from .seeding import rng_for
from .sirl import (
    learn_all,
    learn_dirl,
    read_weights_csv,
    write_learn_trace_csv,
    write_weights_csv,
)

log = logging.getLogger(__name__)

_CONFIG_FLAGS = (
    "segment_len_th", "subsegment_len_tp", "sample_time_ts", "safe_gap_ds",
    "v_min", "v_max", "lr_initial_eta", "lr_halve_every_epochs", "max_epochs",
    "grad_norm_tol", "rollout_samples_per_scenario", "rng_seed",
    "accel_min", "accel_max",
)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the pipeline reserves 2 for runtime."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_common(parser: argparse.ArgumentParser, *, seed: bool = True) -> None:
    parser.add_argument("--config", type=Path, default=None,
                        help="key=value config file (defaults apply when omitted)")
    if seed:
        parser.add_argument("--seed", type=int, default=None,
                            help="root RNG seed (overrides rng_seed from the config)")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel worker processes (default 1)")
    group = parser.add_argument_group("config overrides")
    for key in _CONFIG_FLAGS:
        group.add_argument(f"--{key.replace('_', '-')}", dest=f"cfg_{key}",
                           default=None, metavar="V", help=f"override {key}")


def _load_cfg(ns) -> PipelineConfig:
    overrides = {}
    for key in _CONFIG_FLAGS:
        raw = getattr(ns, f"cfg_{key}", None)
        if raw is not None:
            overrides[key] = parse_config_value(key, str(raw))
    if ns.config is not None:
        if not Path(ns.config).exists():
            raise ConfigError(f"config file not found: {ns.config}")
        return load_config(ns.config, overrides)
    return build_config(overrides)


def _resolve_seed(ns, cfg: PipelineConfig, *, required: bool) -> int | None:
    seed = ns.seed if getattr(ns, "seed", None) is not None else cfg.rng_seed
    if seed is None and required:
        raise ConfigError(
            "this subcommand is stochastic: pass --seed or set rng_seed in the config"
        )
    return seed


def _load_scenarios(ns) -> list[ScenarioSpec]:
    path = getattr(ns, "scenarios", None)
    if path is None:
        return default_scenarios()
    path = Path(path)
    if path.is_file():
        return [read_scenario(path)]
    files = sorted(path.glob("*.scn")) + sorted(path.glob("*.cfg")) + sorted(path.glob("*.txt"))
    if not files:
        raise ConfigError(f"no scenario files (*.scn, *.cfg, *.txt) in {path}")
    return [read_scenario(f) for f in files]


def _pick_scenarios(ns, which: str) -> list[ScenarioSpec]:
    available = {s.scenario_id: s for s in _load_scenarios(ns)}
    if which == "all":
        return [available[k] for k in sorted(available)]
    if which in available:
        return [available[which]]
    path = Path(which)
    if path.exists():
        return [read_scenario(path)]
    raise ConfigError(
        f"unknown scenario {which!r}; available: {', '.join(sorted(available))}"
    )


def _trace_files(directory: Path) -> list[tuple[str, int, Path]]:
    """(scenario_id, trial, path) for every trace CSV, in canonical order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise TraceError(f"trace directory not found: {directory}")
    out = []
    for path in sorted(directory.glob("*.csv")):
        stem = path.stem
        if "__trial" in stem:
            scenario_id, _, trial_s = stem.partition("__trial")
            try:
                trial = int(trial_s)
            except ValueError:
                scenario_id, trial = stem, 0
        else:
            scenario_id, trial = stem, 0
        out.append((scenario_id, trial, path))
    if not out:
        raise TraceError(f"no trace CSVs in {directory}")
    out.sort(key=lambda item: (item[0], item[1]))
    return out


def _pmap(fn, tasks, jobs: int):
    if jobs <= 1:
        return [fn(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=1))


# ---------------------------------------------------------------- synth

def _synth_worker(task):
    spec, trial, params, seed, rate = task
    return spec.scenario_id, trial, synth_trial(spec, trial, params, seed, rate)


def cmd_synth(ns) -> None:
    cfg = _load_cfg(ns)
    seed = _resolve_seed(ns, cfg, required=True)
    scenarios = _load_scenarios(ns)
    params = SynthDriverParams(style_jitter=ns.style_jitter, style_drift=ns.style_drift,
                               accel_noise_std=ns.accel_noise)
    rate = 1.0 / cfg.sample_time_ts
    out_dir = Path(ns.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = [(spec, trial, params, seed, rate)
             for spec in scenarios for trial in range(ns.trials)]
    results = _pmap(_synth_worker, tasks, ns.jobs)
    for scenario_id, trial, trace in results:
        write_trace(trace, out_dir / f"{scenario_id}__trial{trial:03d}.csv")
    print(f"wrote {len(results)} traces ({len(scenarios)} scenarios x {ns.trials} trials) "
          f"to {out_dir}")


# ---------------------------------------------------------------- segment

def cmd_segment(ns) -> None:
    cfg = _load_cfg(ns)
    out_path = Path(ns.out)
    rows = []
    for scenario_id, trial, path in _trace_files(Path(ns.input)):
        trace = read_trace(path)
        for seg in segment_trace(trace, cfg):
            ind = headway_indicators(seg.window)
            label = classify_segment(ind)
            rows.append([f"{scenario_id}__trial{trial:03d}", seg.segment_index,
                         label.value, repr(ind.mean_thw), repr(ind.mean_ttci),
                         repr(ind.mean_gap), repr(ind.mean_speed)])
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trace", "segment_index", "phase", "mean_thw",
                         "mean_ttci", "mean_gap", "mean_speed"])
        writer.writerows(rows)
    print(f"wrote {len(rows)} segment rows to {out_path}")


# ---------------------------------------------------------------- learn

def _split_trials(files, seed: int, train_n: int, test_n: int):
    """Seeded per-scenario train/test split; returns (train, test, manifest)."""
    by_scenario: dict[str, list[tuple[int, Path]]] = {}
    for scenario_id, trial, path in files:
        by_scenario.setdefault(scenario_id, []).append((trial, path))
    train, test, manifest = [], [], []
    for scenario_id in sorted(by_scenario):
        trials = sorted(by_scenario[scenario_id])
        if len(trials) < train_n + test_n:
            raise ValidationError(
                f"scenario {scenario_id!r} has {len(trials)} trials; "
                f"split needs {train_n}+{test_n}"
            )
        perm = rng_for(seed, "split", scenario_id).permutation(len(trials))
        chosen_train = sorted(int(i) for i in perm[:train_n])
        chosen_test = sorted(int(i) for i in perm[train_n:train_n + test_n])
        for pos, (trial, path) in enumerate(trials):
            if pos in chosen_train:
                role = "train"
                train.append((scenario_id, trial, path))
            elif pos in chosen_test:
                role = "test"
                test.append((scenario_id, trial, path))
            else:
                role = "unused"
            manifest.append([scenario_id, trial, role])
    return train, test, manifest


def cmd_learn(ns) -> None:
    cfg = _load_cfg(ns)
    seed = _resolve_seed(ns, cfg, required=True)
    files = _trace_files(Path(ns.input))
    train, _test, manifest = _split_trials(files, seed, ns.train_per_scenario,
                                           ns.test_per_scenario)
    out_dir = Path(ns.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "split_manifest.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario_id", "trial", "role"])
        writer.writerows(manifest)

    segments = []
    for _scenario_id, _trial, path in train:
        segments.extend(segment_trace(read_trace(path), cfg))
    print(f"learning from {len(segments)} segments of {len(train)} training traces "
          f"({get_backend()} kernels)")
    if ns.dirl:
        results = learn_dirl(segments, cfg)
        weights = [wv for wv, _ in results.values()]
        weights.sort(key=lambda w: w.phase.value)
        traces = [(wv.segment_index, tr) for ph, (wv, tr) in sorted(
            results.items(), key=lambda kv: kv[0].value)]
        write_weights_csv(weights, out_dir / "weights.csv")
        write_learn_trace_csv(traces, out_dir / "learntrace.csv")
        for ph, (wv, tr) in sorted(results.items(), key=lambda kv: kv[0].value):
            print(f"  {ph.value}: pooled weights over cluster, converged={tr.converged} "
                  f"final_grad_norm={tr.final_grad_norm:.4g}")
    else:
        result = learn_all(segments, cfg, jobs=ns.jobs)
        write_weights_csv([r.weights for r in result.results], out_dir / "weights.csv")
        write_learn_trace_csv([(r.segment_index, r.trace) for r in result.results],
                              out_dir / "learntrace.csv")
        n_conv = sum(r.trace.converged for r in result.results)
        sizes = {ph.value: len(c) for ph, c in result.clusters.items() if c}
        print(f"  converged {n_conv}/{len(result.results)} segments; clusters: {sizes}")
    print(f"wrote weights.csv, learntrace.csv, split_manifest.csv to {out_dir}")


# ---------------------------------------------------------------- fit-copula

def cmd_fit_copula(ns) -> None:
    clusters = read_weights_csv(Path(ns.input))
    out_dir = Path(ns.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = 0
    for phase in PhaseLabel:
        cluster = clusters.get(phase, [])
        if not cluster:
            log.warning("phase cluster %s is empty; no model written", phase.value)
            continue
        try:
            model = fit_copula(cluster)
        except FitError as exc:
            log.warning("phase cluster %s not fitted: %s", phase.value, exc)
            continue
        save_copula_model(model, out_dir / f"{phase.value}.json")
        dof = "gaussian-limit" if np.isinf(model.dof) else f"{model.dof:g}"
        print(f"  {phase.value}: n={len(cluster)}, dof={dof}")
        written += 1
    if not written:
        raise FitError("no phase cluster could be fitted")
    print(f"wrote {written} copula model file(s) to {out_dir}")


# ---------------------------------------------------------------- generate

def _load_models(model_dir: Path, mode: str):
    if mode == "dirl":
        weights_path = model_dir / "weights.csv"
        if not weights_path.exists():
            raise ConfigError(f"deterministic mode needs {weights_path}")
        clusters = read_weights_csv(weights_path)
        models = {}
        for phase, cluster in clusters.items():
            pooled = [w for w in cluster if w.segment_index == -1]
            if pooled:
                models[phase] = pooled[0]
        if not models:
            raise ConfigError(f"{weights_path} holds no pooled (segment_index=-1) weights")
        return models
    models = {}
    for phase in PhaseLabel:
        path = model_dir / f"{phase.value}.json"
        if path.exists():
            models[phase] = load_copula_model(path)
    if not models:
        raise ConfigError(f"no copula model files (<phase>.json) in {model_dir}")
    return models


def _generate_worker(task):
    spec, models, cfg, seed, sample_id, mode = task
    return rollout(spec, models, cfg, seed, sample_id=sample_id, mode=mode)


def cmd_generate(ns) -> None:
    cfg = _load_cfg(ns)
    mode = "dirl" if ns.dirl else "sirl"
    seed = _resolve_seed(ns, cfg, required=(mode == "sirl"))
    if seed is None:
        seed = 0  # deterministic mode never draws from it
    models = _load_models(Path(ns.model), mode)
    scenarios = _pick_scenarios(ns, ns.scenario)
    n_samples = ns.n if ns.n is not None else (
        1 if mode == "dirl" else cfg.rollout_samples_per_scenario)
    out_dir = Path(ns.out)
    total = 0
    for spec in scenarios:
        tasks = [(spec, models, cfg, seed, sample_id, mode)
                 for sample_id in range(n_samples)]
        results = _pmap(_generate_worker, tasks, ns.jobs)
        scen_dir = out_dir / spec.scenario_id
        scen_dir.mkdir(parents=True, exist_ok=True)
        with (scen_dir / "flags.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["sample_id", "infeasible_forced_braking", "first_flag_t"])
            for res in results:
                write_rollout_csv(res, scen_dir / f"sample_{res.sample_id:03d}.csv")
                writer.writerow([
                    res.sample_id, int(res.infeasible),
                    "" if res.first_infeasible_t is None else repr(res.first_infeasible_t),
                ])
        flagged = sum(r.infeasible for r in results)
        total += len(results)
        print(f"  {spec.scenario_id}: {len(results)} {mode} rollouts"
              + (f" ({flagged} flagged infeasible)" if flagged else ""))
    print(f"wrote {total} rollout CSVs to {out_dir}")


# ---------------------------------------------------------------- eval

def _read_observed(ns) -> dict[str, list]:
    files = _trace_files(Path(ns.observed))
    roles = None
    if ns.manifest is not None:
        roles = {}
        with Path(ns.manifest).open(newline="") as fh:
            for row in csv.DictReader(fh):
                roles[(row["scenario_id"], int(row["trial"]))] = row["role"]
    observed: dict[str, list] = {}
    for scenario_id, trial, path in files:
        if roles is not None and roles.get((scenario_id, trial)) != "test":
            continue
        observed.setdefault(scenario_id, []).append(read_trace(path))
    if not observed:
        raise TraceError("no observed test traces selected")
    return observed


def _read_generated(directory: Path) -> dict[str, list]:
    directory = Path(directory)
    out: dict[str, list] = {}
    for scen_dir in sorted(p for p in directory.iterdir() if p.is_dir()):
        samples = [read_rollout_csv(p) for p in sorted(scen_dir.glob("sample_*.csv"))]
        if samples:
            out[scen_dir.name] = samples
    if not out:
        raise TraceError(f"no rollout CSVs under {directory}")
    return out


def cmd_eval(ns) -> None:
    mode = "dirl" if ns.dirl else "sirl"
    report = evaluate(_read_observed(ns), _read_generated(Path(ns.generated)), mode)
    out_path = Path(ns.out) if ns.out else Path(f"eval_{mode}.csv")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_eval_csv(report, out_path)
    print(f"{mode}: overall speed RMSE {report.overall_speed_rmse:.3f} m/s, "
          f"accel RMSE {report.overall_accel_rmse:.3f} m/s^2 "
          f"({len(report.scenarios)} scenarios)")
    print(f"wrote {out_path}")


# ---------------------------------------------------------------- phase-inspect

def cmd_phase_inspect(ns) -> None:
    cfg = _load_cfg(ns)
    seed = _resolve_seed(ns, cfg, required=True)
    rows = []
    points = []
    for scenario_id, trial, path in _trace_files(Path(ns.input)):
        trace = read_trace(path)
        for seg in segment_trace(trace, cfg):
            ind = headway_indicators(seg.window)
            rows.append([f"{scenario_id}__trial{trial:03d}#{seg.segment_index}",
                         ind, classify_segment(ind)])
            points.append((ind.mean_speed, ind.mean_gap))
    result = kmeans_speed_gap(points, k=ns.k, seed=seed)
    out_path = Path(ns.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["segment_id", "mean_speed", "mean_gap", "cluster", "label"])
        for (segment_id, ind, label), cluster in zip(rows, result.assignments):
            writer.writerow([segment_id, repr(ind.mean_speed), repr(ind.mean_gap),
                             int(cluster), label.value])
    print(f"k={ns.k} clustering of {len(rows)} segments "
          f"(inertia {result.inertia:.1f}, {result.n_iter} iterations)")
    for i, c in enumerate(result.centroids):
        print(f"  cluster {i}: mean_speed={c[0]:.2f} m/s, mean_gap={c[1]:.2f} m")
    print(f"wrote {out_path}")


# ---------------------------------------------------------------- report

def cmd_report(ns) -> None:
    out_dir = Path(ns.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    observed = _read_observed(ns)
    gen_sirl = _read_generated(Path(ns.generated))
    report_sirl = evaluate(observed, gen_sirl, "sirl")
    write_eval_csv(report_sirl, out_dir / "eval_sirl.csv")
    report_dirl = None
    if ns.generated_dirl is not None:
        report_dirl = evaluate(observed, _read_generated(Path(ns.generated_dirl)), "dirl")
        write_eval_csv(report_dirl, out_dir / "eval_dirl.csv")
        table = format_comparison_table(report_sirl, report_dirl)
        (out_dir / "comparison.txt").write_text(table + "\n")
        print(table)
    learn_dir = Path(ns.learn_dir) if ns.learn_dir else None
    if learn_dir and (learn_dir / "learntrace.csv").exists():
        shutil.copyfile(learn_dir / "learntrace.csv", out_dir / "gradients.csv")
    fans = out_dir / "fans"
    fans.mkdir(exist_ok=True)
    for scenario_id in sorted(gen_sirl):
        if scenario_id not in observed:
            continue
        with (fans / f"{scenario_id}.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["scenario", "series", "t", "speed", "accel"])
            writer.writerows(fan_rows(scenario_id, observed[scenario_id],
                                      gen_sirl[scenario_id]))
    print(f"report bundle written to {out_dir}")


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="drivercost",
                     description="Stochastic driver cost-function learning pipeline")
    parser.add_argument("--version", action="version",
                        version=f"drivercost {__version__} ({get_backend()} kernels)")
    sub = parser.add_subparsers(dest="command", metavar="subcommand")

    p = sub.add_parser("synth", help="generate synthetic demonstration traces")
    _add_common(p)
    p.add_argument("--out", required=True, type=Path, help="output trace directory")
    p.add_argument("--scenarios", type=Path, default=None,
                   help="scenario spec file or directory (default: built-in set of 9)")
    p.add_argument("--trials", type=int, default=30, help="trials per scenario (default 30)")
    p.add_argument("--style-jitter", type=float, default=0.30,
                   help="relative per-trial driver parameter jitter (default 0.30)")
    p.add_argument("--style-drift", type=float, default=0.05,
                   help="stationary relative std of in-trial style drift (default 0.05)")
    p.add_argument("--accel-noise", type=float, default=0.02,
                   help="acceleration noise std in m/s^2 (default 0.02)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("segment", help="segment traces and report phases")
    _add_common(p, seed=False)
    p.add_argument("--in", dest="input", required=True, type=Path, help="trace directory")
    p.add_argument("--out", required=True, type=Path, help="output CSV path")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("learn", help="learn weight vectors from demonstrations")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True, type=Path, help="trace directory")
    p.add_argument("--out", required=True, type=Path, help="output model directory")
    p.add_argument("--train-per-scenario", type=int, default=25)
    p.add_argument("--test-per-scenario", type=int, default=5)
    p.add_argument("--dirl", action="store_true",
                   help="pooled deterministic baseline instead of per-segment weights")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("fit-copula", help="fit per-phase weight distributions")
    _add_common(p, seed=False)
    p.add_argument("--in", dest="input", required=True, type=Path, help="weights.csv path")
    p.add_argument("--out", required=True, type=Path, help="output model directory")
    p.set_defaults(func=cmd_fit_copula)

    p = sub.add_parser("generate", help="generate rollouts for a scenario")
    _add_common(p)
    p.add_argument("--model", required=True, type=Path,
                   help="copula model dir (or learn --dirl output dir with --dirl)")
    p.add_argument("--scenario", required=True,
                   help="scenario id, scenario file path, or 'all'")
    p.add_argument("--scenarios", type=Path, default=None,
                   help="scenario spec file or directory defining the id namespace")
    p.add_argument("--n", type=int, default=None,
                   help="samples per scenario (default: config, or 1 with --dirl)")
    p.add_argument("--dirl", action="store_true", help="deterministic baseline rollouts")
    p.add_argument("--out", required=True, type=Path, help="output rollout directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("eval", help="RMSE of rollouts vs observed test traces")
    _add_common(p, seed=False)
    p.add_argument("--observed", required=True, type=Path, help="observed trace directory")
    p.add_argument("--manifest", type=Path, default=None,
                   help="split manifest; only role=test traces are used")
    p.add_argument("--generated", required=True, type=Path, help="rollout directory")
    p.add_argument("--dirl", action="store_true", help="label the report as the baseline")
    p.add_argument("--out", type=Path, default=None, help="output CSV (default eval_<mode>.csv)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("phase-inspect", help="k-means speed/gap clusters vs rule labels")
    _add_common(p)
    p.add_argument("--in", dest="input", required=True, type=Path, help="trace directory")
    p.add_argument("--k", type=int, default=2, help="number of clusters (default 2)")
    p.add_argument("--out", required=True, type=Path, help="output CSV path")
    p.set_defaults(func=cmd_phase_inspect)

    p = sub.add_parser("report", help="bundle evaluation + plot data")
    _add_common(p, seed=False)
    p.add_argument("--observed", required=True, type=Path, help="observed trace directory")
    p.add_argument("--manifest", type=Path, default=None,
                   help="split manifest; only role=test traces are used")
    p.add_argument("--generated", required=True, type=Path, help="stochastic rollout dir")
    p.add_argument("--generated-dirl", type=Path, default=None, help="baseline rollout dir")
    p.add_argument("--learn-dir", type=Path, default=None,
                   help="learn output dir (for gradient curves)")
    p.add_argument("--out", required=True, type=Path, help="output report directory")
    p.set_defaults(func=cmd_report)

    return parser


def run(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if isinstance(code, int) else 0
    if not getattr(ns, "func", None):
        parser.print_help()
        return 1
    try:
        ns.func(ns)
        return 0
    except (ConfigError, ValidationError, TraceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

"""Benchmark the compiled kernel core against the pure-numpy fallback.

Usage: python benchmarks/kernel_benchmark.py [--repeat N]

Times the three hot operations on representative workloads: subsegment cost
evaluation, the full per-subsegment BFGS, and planner candidate sweeps.
"""

import argparse
import importlib.util
import time

import numpy as np


def make_problem(rng, n=11):
    lead_speed = rng.uniform(5, 20)
    t = 0.1 * np.arange(n)
    return dict(
        p0=0.0, v0=rng.uniform(2, 18), a0=rng.normal(0, 0.5),
        lead_pos=np.ascontiguousarray(rng.uniform(10, 40) + lead_speed * t),
        lead_vel=np.ascontiguousarray(np.full(n, lead_speed)),
        dt=0.1, v_d=lead_speed, tau_h=1.5, d_s=5.0,
        theta=np.ascontiguousarray(rng.uniform(0.1, 1.5, 4)),
        feat_ids=np.array([0, 1, 2, 4], dtype=np.intc),
    )


def bench(label, fn, repeat):
    best = min(
        (lambda t0: (fn(), time.perf_counter() - t0)[1])(time.perf_counter())
        for _ in range(repeat)
    )
    print(f"  {label:<24} {best * 1e3:9.2f} ms")
    return best


def run_backend(impl, name, repeat):
    rng = np.random.default_rng(0)
    problems = [make_problem(rng) for _ in range(200)]
    print(f"{name} backend:")
    results = {}

    def costs():
        free = np.zeros(3)
        for p in problems:
            for _ in range(25):
                impl.subsegment_cost(free, p["p0"], p["v0"], p["a0"], p["lead_pos"],
                                     p["lead_vel"], p["dt"], p["v_d"], p["tau_h"],
                                     p["d_s"], p["theta"], p["feat_ids"])

    results["cost"] = bench("5000 cost evaluations", costs, repeat)

    def optimizes():
        for p in problems:
            impl.optimize_free_coeffs(p["p0"], p["v0"], p["a0"], p["lead_pos"],
                                      p["lead_vel"], p["dt"], p["v_d"], p["tau_h"],
                                      p["d_s"], p["theta"], p["feat_ids"], 1e-8, 200)

    results["bfgs"] = bench("200 subsegment BFGS runs", optimizes, repeat)

    grid = np.linspace(-6, 4, 41)

    def candidates():
        for p in problems:
            for _ in range(5):
                impl.candidate_costs(grid, 20.0, p["v0"], p["lead_vel"], 0.1,
                                     p["v_d"], p["tau_h"], p["d_s"], p["theta"],
                                     p["feat_ids"], 5.0, 0.0, 25.0, 1e6)

    results["plan"] = bench("1000 x 41-point sweeps", candidates, repeat)
    return results


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    from drivercost._kernels import _fallback

    have_compiled = importlib.util.find_spec("drivercost._kernels._core") is not None
    pure = run_backend(_fallback, "pure-numpy", args.repeat)
    if not have_compiled:
        print("compiled core not built (pip install -e . with Cython + a C compiler)")
        return
    from drivercost._kernels import _core

    comp = run_backend(_core, "compiled", args.repeat)
    print("speedups (pure / compiled):")
    for key, label in (("cost", "cost evaluation"), ("bfgs", "subsegment BFGS"),
                       ("plan", "candidate sweep")):
        print(f"  {label:<24} {pure[key] / comp[key]:8.1f}x")


if __name__ == "__main__":
    main()

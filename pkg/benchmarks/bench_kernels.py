"""Compare the compiled kernels against the numpy fallback.

Run from the repository root:

    python benchmarks/bench_kernels.py

The first table times the raw kernels on 72-sample windows (the operating
size: three days of hourly data). The second times a full monitoring run
of one simulated site, which exercises windowing, the distribution test,
moment matching, trend refits and persistence bookkeeping together.
"""

import time

import numpy as np

from ozonet.kernels import _pure

try:
    from ozonet.kernels import _fast
except ImportError:
    _fast = None


def time_call(func, args_iter, repeat):
    start = time.perf_counter()
    for args in args_iter[:repeat]:
        func(*args)
    return (time.perf_counter() - start) / repeat


def bench_kernels(repeat=20_000):
    rng = np.random.default_rng(1)
    pairs = [(rng.normal(30, 8, 72), rng.normal(30, 8, 72)) for _ in range(repeat)]
    singles = [(p[0],) for p in pairs]

    rows = []
    for name, args in (("ks_distance 72v72", pairs), ("window_moments 72", singles)):
        pure_fn = getattr(_pure, name.split()[0])
        t_pure = time_call(pure_fn, args, repeat)
        if _fast is not None:
            t_fast = time_call(getattr(_fast, name.split()[0]), args, repeat)
            rows.append((name, t_pure, t_fast, t_pure / t_fast))
        else:
            rows.append((name, t_pure, None, None))
    return rows


def bench_engine():
    import os

    from ozonet import SiteEngine, Thresholds
    from ozonet import kernels as selected
    from ozonet.simulate import (
        Scenario,
        SensorModel,
        SiteSpec,
        TruthModel,
        run_scenario,
    )
    from ozonet.proxy import SiteRecord

    truth = TruthModel(baseline=30, amplitude=10, phase_hours=9,
                       regional_weight=1.0, noise_sigma=1.0)
    sites = [
        SiteSpec(SiteRecord("REF", "r", "reference", 34.0, -117.0), truth),
        SiteSpec(SiteRecord("LC", "l", "low-cost", 34.05, -117.05), truth,
                 SensorModel(noise_sigma=1.0)),
    ]
    scenario = Scenario(seed=1, start_hour=0, duration_hours=24 * 212, sites=sites,
                        regional_sigma=0.5, regional_bound=6.0)
    res = run_scenario(scenario)
    start = time.perf_counter()
    SiteEngine("LC", res.observed["LC"], res.observed["REF"], Thresholds()).run()
    elapsed = time.perf_counter() - start
    backend = "pure (forced)" if os.environ.get("OZONET_PURE_PYTHON") else selected.BACKEND
    return backend, elapsed


def main():
    print("kernel microbenchmarks (mean per call)")
    print(f"{'kernel':<24}{'pure':>12}{'compiled':>12}{'speedup':>9}")
    for name, t_pure, t_fast, speedup in bench_kernels():
        fast = "-" if t_fast is None else f"{t_fast * 1e6:9.2f} us"
        ratio = "-" if speedup is None else f"{speedup:7.1f}x"
        print(f"{name:<24}{t_pure * 1e6:9.2f} us {fast:>12}{ratio:>9}")
    if _fast is None:
        print("\ncompiled kernel not built; run `pip install -e .` with a compiler")

    backend, elapsed = bench_engine()
    print(f"\nseven-month single-site run under the selected backend "
          f"({backend}): {elapsed:.2f} s")
    print("set OZONET_PURE_PYTHON=1 to force the fallback and compare")


if __name__ == "__main__":
    main()

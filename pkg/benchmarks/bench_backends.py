"""Compare the compiled and pure-Python integration kernels.

Times the adaptive and fixed-step solvers on the reference parameter set,
then a short finite-time Monte-Carlo batch, and reports per-call costs and
the compiled/python speedup. The two kernels are exercised directly so the
comparison ignores the import-time backend selection.

Run:  python benchmarks/bench_backends.py [--repeats N] [--trials N]
"""
from __future__ import annotations

import argparse
import importlib
import time

MEANS = dict(lam=0.1089, mu=0.01089, k=1.179e-3, delta=0.3660, p=1427.0, c=3.0)
SPIKE = (1000.0, 0.0, 0.001)


def load_kernels():
    kernels = {"python": importlib.import_module("virosim._kernel_py")}
    try:
        kernels["compiled"] = importlib.import_module("virosim._kernel_c")
    except ImportError:
        pass
    return kernels


def time_call(fn, repeats: int) -> float:
    """Best-of-runs seconds per call (min over batches of `repeats` calls)."""
    best = float("inf")
    for _ in range(3):
        start = time.perf_counter()
        for _ in range(repeats):
            fn()
        best = min(best, (time.perf_counter() - start) / repeats)
    return best


def bench_adaptive(kernel, repeats: int) -> float:
    def call():
        status, *_ = kernel.integrate_adaptive(
            MEANS["lam"], MEANS["mu"], MEANS["k"], MEANS["delta"],
            MEANS["p"], MEANS["c"], *SPIKE,
            100.0, 1e-8, 1e-10, 10_000_000, 0,
        )
        assert status == 0
    return time_call(call, repeats)


def bench_fixed(kernel, repeats: int) -> float:
    def call():
        status, *_ = kernel.integrate_fixed(
            MEANS["lam"], MEANS["mu"], MEANS["k"], MEANS["delta"],
            MEANS["p"], MEANS["c"], *SPIKE,
            100.0, 0.002, 10_000_000, 0,
        )
        assert status == 0
    return time_call(call, repeats)


def bench_montecarlo(backend_name: str, trials: int) -> float:
    """Seconds per finite-time trial through the full estimate() path."""
    import os

    os.environ["VIROSIM_BACKEND"] = backend_name
    for name in ("virosim.backend", "virosim.integrate", "virosim.montecarlo"):
        importlib.reload(importlib.import_module(name))
    from virosim.montecarlo import ExperimentConfig, FiniteTime, estimate
    from virosim.model import State
    from virosim.sampling import uniform_triangular_scenario

    config = ExperimentConfig(
        scenario=uniform_triangular_scenario(),
        criterion=FiniteTime(horizon=60.0, threshold=50.0),
        trials=trials,
        master_seed=1,
        init=State(1000.0, 0.0, 0.001),
    )
    start = time.perf_counter()
    estimate(config, workers=1)
    return (time.perf_counter() - start) / trials


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=200,
                        help="kernel calls per timing batch (default 200)")
    parser.add_argument("--trials", type=int, default=2000,
                        help="Monte-Carlo trials per backend (default 2000)")
    args = parser.parse_args()

    kernels = load_kernels()
    if "compiled" not in kernels:
        print("compiled kernel not importable; timing the python kernel only")

    results: dict[str, dict[str, float]] = {}
    for name, kernel in kernels.items():
        results[name] = {
            "adaptive t=100": bench_adaptive(kernel, args.repeats),
            "fixed dt=0.002": bench_fixed(kernel, max(1, args.repeats // 10)),
            "mc trial": bench_montecarlo(name, args.trials),
        }

    names = list(results)
    width = max(len(k) for k in next(iter(results.values())))
    header = f"{'workload':<{width}}" + "".join(f"{n:>14}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for workload in next(iter(results.values())):
        row = f"{workload:<{width}}"
        for name in names:
            row += f"{results[name][workload] * 1e3:>12.3f}ms"
        if len(names) == 2:
            row += f"{results['python'][workload] / results['compiled'][workload]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Benchmark the compiled PAVA kernel against the pure-Python fallback.

The isotonic solve runs twice per EM iteration, so it dominates the runtime of
every mixture fit. This script times both kernels on the raw solve and on a
full EM fit, and verifies they produce identical output.

Usage: python benchmarks/bench_kernels.py [--sizes 1000,10000,100000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from ordershape import _pava, _pava_py
from ordershape._backend import BACKEND
from ordershape.mixture import em_fit
from ordershape.simulate import ScenarioConfig, simulate_scenario


def time_call(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(sizes, repeat):
    rng = np.random.default_rng(0)
    print(f"{'n':>9}  {'compiled':>12}  {'pure python':>12}  {'speedup':>8}")
    for n in sizes:
        values = rng.uniform(size=n)
        weights = rng.uniform(0.1, 2.0, size=n)
        out_c = np.asarray(_pava.pava(values, weights))
        out_py = _pava_py.pava(values, weights)
        assert np.array_equal(out_c, out_py), "kernels disagree"
        t_c = time_call(lambda: _pava.pava(values, weights), repeat)
        t_py = time_call(lambda: _pava_py.pava(values, weights), repeat)
        print(f"{n:>9}  {t_c * 1e3:>10.3f}ms  {t_py * 1e3:>10.3f}ms  {t_py / t_c:>7.1f}x")


def bench_em(repeat):
    import ordershape._backend as backend

    cfg = ScenarioConfig(m=10_000, informativeness="high", density_target=0.10, ks=2.5, seed=0)
    sim = simulate_scenario(cfg)
    results = {}
    for label, impl in (("compiled", _pava), ("pure python", _pava_py)):
        backend._impl = impl
        results[label] = time_call(lambda: em_fit(sim.data), repeat)
    backend._impl = _pava if BACKEND == "compiled" else _pava_py
    print(f"\nfull EM fit (m=10,000): compiled {results['compiled']:.3f}s, "
          f"pure python {results['pure python']:.3f}s, "
          f"speedup {results['pure python'] / results['compiled']:.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--sizes", default="1000,10000,100000")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    print(f"active backend at import: {BACKEND}\n")
    bench_kernels(sizes, args.repeat)
    bench_em(args.repeat)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Compare the compiled replay kernel against the pure-Python fallback.

Both backends produce bit-identical results; this measures the speed gap on
a representative workload (the calibrated reference body, dual-core config).

Usage: python benchmarks/engine_bench.py [--iterations N]
"""

import argparse
import time

from mcsoc import engine
from mcsoc.config import make_system
from mcsoc.workload import default_profile, synthesize


def time_backend(backend, packed, system, iterations, repeats=3):
    best = float("inf")
    stats = None
    for _ in range(repeats):
        caches = engine.CoreCaches(system.ic, system.dc)
        t0 = time.perf_counter()
        stats = engine.run_core(packed, iterations, system, caches, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, stats


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iterations", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=2014)
    args = parser.parse_args()

    profile = default_profile()
    trace = synthesize(profile, 1, seed=args.seed)
    packed = engine.pack_body(trace.body)
    system = make_system(2, 8, 8)
    n_steps = packed.n_instructions * args.iterations

    backends = [("python", engine.get_backend("python"))]
    try:
        backends.insert(0, ("compiled", engine.get_backend("compiled")))
    except ImportError:
        print("compiled kernel not available; timing the fallback only")

    results = {}
    print(f"replaying {packed.n_instructions}-instruction body x {args.iterations} iterations")
    print(f"{'backend':<10} {'time':>10} {'Minstr/s':>10}")
    for name, backend in backends:
        elapsed, stats = time_backend(backend, packed, system, args.iterations)
        results[name] = (elapsed, stats)
        print(f"{name:<10} {elapsed:>9.3f}s {n_steps / elapsed / 1e6:>10.1f}")

    if len(results) == 2:
        speedup = results["python"][0] / results["compiled"][0]
        same = results["python"][1] == results["compiled"][1]
        print(f"speedup: {speedup:.1f}x; results identical: {same}")


if __name__ == "__main__":
    main()

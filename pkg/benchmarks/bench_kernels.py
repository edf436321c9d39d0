"""Timing comparison of the compiled and pure-numpy kernel backends.

Runs the two hot kernels — the extremal level scan and the 7-point stencil
matvec — through both backends on identical inputs, cross-checks that the
outputs agree, and prints a per-kernel timing table.

Usage: python3 benchmarks/bench_kernels.py [--levels N] [--cells N]
                                           [--repeats N]
"""

import argparse
import math
import time

import numpy as np

from leveldecay._kernels import pure

try:
    from leveldecay._kernels import _core as compiled
except ImportError:
    compiled = None


def time_call(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_extremal_scan(backends, n_levels, repeats):
    levels = np.geomspace(1.0, 1000.0, n_levels)
    args = (levels, 2.0, 0.7, 0.0, 0.35, 0.0, 0.0)
    results = {}
    outputs = {}
    for name, mod in backends.items():
        results[name] = time_call(
            lambda mod=mod: mod.extremal_scan_generic(*args), repeats)
        outputs[name] = mod.extremal_scan_generic(*args)
    return results, outputs


def bench_stencil(backends, n_cells, repeats):
    rng = np.random.default_rng(0)
    shape = (n_cells,) * 3
    ax = rng.uniform(0.5, 2.0, size=(n_cells + 1, n_cells, n_cells))
    ay = rng.uniform(0.5, 2.0, size=(n_cells, n_cells + 1, n_cells))
    az = rng.uniform(0.5, 2.0, size=(n_cells, n_cells, n_cells + 1))
    x = rng.normal(size=shape)
    inv_h2 = float(n_cells * n_cells)
    results = {}
    outputs = {}
    for name, mod in backends.items():
        out = np.empty(shape)
        results[name] = time_call(
            lambda mod=mod, out=out: mod.stencil_apply(ax, ay, az, x, out,
                                                       inv_h2), repeats)
        outputs[name] = out
    return results, outputs


def report(title, results, unit_note):
    print(f"\n{title} ({unit_note})")
    base = results.get("pure")
    for name, seconds in sorted(results.items()):
        speedup = ""
        if base is not None and name != "pure" and seconds > 0:
            speedup = f"  ({base / seconds:.1f}x vs pure)"
        print(f"  {name:>8}: {seconds * 1e3:9.3f} ms{speedup}")


def check_agreement(outputs, what):
    names = sorted(outputs)
    if len(names) < 2:
        return
    a, b = outputs[names[0]], outputs[names[1]]
    finite = np.isfinite(a) & np.isfinite(b)
    worst = float(np.max(np.abs(a[finite] - b[finite]))) if finite.any() \
        else 0.0
    if not np.array_equal(np.isfinite(a), np.isfinite(b)) or worst > 1e-9:
        raise SystemExit(f"backend disagreement on {what}: max diff {worst}")
    print(f"  agreement on {what}: max |diff| = {worst:.2e}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--levels", type=int, default=4000,
                        help="level-grid size for the extremal scan")
    parser.add_argument("--cells", type=int, default=64,
                        help="cells per axis for the stencil matvec")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats (best is reported)")
    args = parser.parse_args()

    backends = {"pure": pure}
    if compiled is not None:
        backends["compiled"] = compiled
    else:
        print("compiled backend not importable; timing pure only")

    scan_times, scan_out = bench_extremal_scan(backends, args.levels,
                                               args.repeats)
    report(f"extremal scan, {args.levels} levels", scan_times,
           "one full lower-triangular scan")
    check_agreement(scan_out, "extremal scan")

    stencil_times, stencil_out = bench_stencil(backends, args.cells,
                                               args.repeats)
    report(f"stencil matvec, {args.cells}^3 cells", stencil_times,
           "one operator application")
    check_agreement(stencil_out, "stencil matvec")


if __name__ == "__main__":
    main()

"""Benchmark the compiled kernels against the pure numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--quick]

Covers the four hot paths: group-algebra convolution, walk-operator matvec,
product sets and the exhaustive Cheeger scan.  Both backends produce
bit-identical results; this script reports the throughput difference.
"""

import argparse
import time

import numpy as np

from sl2cayley._kernels import GroupTables, backends
from sl2cayley.cayley import build_cayley
from sl2cayley.presets import get_preset
from sl2cayley.sl2core import GroupIndex
from sl2cayley.walk import chi_S


def timed(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true",
                        help="smaller sizes, fewer repeats")
    args = parser.parse_args()
    impls = backends()
    if "compiled" not in impls:
        print("compiled backend not built; showing pure timings only")

    moduli = (3, 3, 3) if not args.quick else (2, 2, 2)
    graph = build_cayley(get_preset("TWISTED"), moduli)
    group = graph.group
    tabs = GroupTables.from_group_index(group)
    n = group.size
    print(f"group: TWISTED mod {moduli}, N = {n}, degree = {graph.degree}")

    rows = []

    chi = chi_S(get_preset("TWISTED"), group)
    supp = chi.support_positions()
    nums = np.asarray(chi.nums)[supp]
    dense_supp = np.arange(n, dtype=np.int64)
    dense_nums = np.ones(n, dtype=np.int64)

    def bench(name, call):
        entry = {"name": name}
        baseline = None
        for bname, impl in impls.items():
            secs, out = timed(lambda: call(impl), repeat=2 if args.quick else 3)
            entry[bname] = secs
            if baseline is None:
                baseline = out
            else:
                same = (np.array_equal(baseline, out)
                        if isinstance(baseline, np.ndarray) else baseline == out)
                assert same, f"{name}: backend results differ"
        rows.append(entry)

    bench("convolve sparse*dense",
          lambda impl: impl.convolve_i64(tabs, supp, nums, dense_supp, dense_nums))
    w = np.random.default_rng(0).standard_normal(n)
    bench("walk matvec", lambda impl: impl.walk_matvec(graph.neighbors, w))
    rng = np.random.default_rng(1)
    a_pos = np.sort(rng.choice(n, size=min(n, 2000), replace=False)).astype(np.int64)
    b_pos = np.sort(rng.choice(n, size=min(n, 500), replace=False)).astype(np.int64)
    bench("product set", lambda impl: impl.product_set(tabs, a_pos, b_pos))

    small = build_cayley(get_preset("DIAGONAL"), (3, 3, 3))  # 24 vertices
    free = small.size - 1

    def cheeger_call(impl):
        if impl.BACKEND == "pure":
            lo = min(free, 20)
            return impl.cheeger_scan(small.neighbors, lo, 0, 1 << (free - lo))
        lo = min(free, 16)
        return impl.cheeger_scan(small.neighbors, lo, 0, 1 << (free - lo))

    bench(f"cheeger scan (N={small.size})", cheeger_call)

    g24 = GroupIndex.full_product((2, 2, 1))
    t24 = GroupTables.from_group_index(g24)
    psi = np.random.default_rng(2).integers(0, g24.size, size=g24.size).astype(np.int64)

    def pairs_call(impl):
        if impl.BACKEND == "pure":
            return impl.pair_failures(t24, psi, t24)
        return impl.pair_failures(t24, psi, t24, 0, g24.size)

    bench(f"pair failures (N={g24.size})", pairs_call)

    width = max(len(r["name"]) for r in rows)
    names = list(impls)
    header = f"{'kernel':<{width}}  " + "  ".join(f"{b:>12}" for b in names)
    if len(names) == 2:
        header += "  speedup"
    print(header)
    for r in rows:
        line = f"{r['name']:<{width}}  " + "  ".join(
            f"{r[b] * 1e3:>10.2f}ms" for b in names)
        if len(names) == 2:
            line += f"  {r[names[0]] / r[names[1]]:>6.1f}x"
        print(line)


if __name__ == "__main__":
    main()

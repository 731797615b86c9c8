"""Compiled vs pure-Python kernels: closure, row lookup and BFS distances.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import time

import numpy as np

from ghostlab import kernels
from ghostlab.groups import GroupElement


def sym_gens(n):
    return np.array([
        GroupElement.from_cycles([[0, 1]], n).action(),
        GroupElement.from_cycles([list(range(n))], n).action(),
        GroupElement.from_cycles([list(range(n))], n).inverse().action(),
    ], dtype=np.int32)


def sl2_gens(p):
    mats = [[[1, 1], [0, 1]], [[1, 0], [1, 1]]]
    els = [GroupElement.matrix(m, p) for m in mats]
    els += [g.inverse() for g in els]
    return np.array([g.action() for g in els], dtype=np.int32)


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    cases = {"Sym(8)": sym_gens(8), "SL(2,13)": sl2_gens(13), "SL(2,23)": sl2_gens(23)}
    names = list(kernels.BACKENDS)
    print(f"backends: {', '.join(names)} (active: {kernels.BACKEND})")
    print(f"{'case':<10} {'order':>7} {'kernel':<9}" + "".join(f"{n:>10}" for n in names))
    for label, gens in cases.items():
        rows = {}
        for name in names:
            mod = kernels.BACKENDS[name]
            t_close, (table, left) = timed(lambda: mod.closure(gens, 10**7), args.repeat)
            index = mod.RowIndex(table)
            t_look, found = timed(lambda: index.lookup(table[::-1]), args.repeat)
            sources = np.arange(min(64, len(table)))
            t_bfs, dist = timed(lambda: mod.bfs_distances(left, sources), args.repeat)
            rows[name] = (t_close, t_look, t_bfs, table, dist)
        ref = rows[names[0]]
        for name in names[1:]:
            assert np.array_equal(rows[name][3], ref[3]) and np.array_equal(rows[name][4], ref[4])
        for k, kernel in enumerate(("closure", "lookup", "bfs")):
            print(f"{label:<10} {len(ref[3]):>7} {kernel:<9}" + "".join(f"{rows[n][k]:>9.4f}s" for n in names))


if __name__ == "__main__":
    main()

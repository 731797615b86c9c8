"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run alone with ``pytest tests/test_acceptance.py -v``; the summary section
lists one PASS/FAIL line per criterion.
"""

import json
import time

import numpy as np
import pytest

from ghostlab.cli import main
from ghostlab.coarse import block_spectrum, family_space, level_graph, propagation
from ghostlab.families import alt_family, complete_family, mixed_small_family, sl2_family
from ghostlab.ghost import (
    BlockOperator,
    build_T,
    classical_ghost,
    diagonal_ranks,
    gap_at_one,
    ghost_projection,
    make_window,
    rank_sequence,
    truncate_to_J,
    verify_claim1,
)
from ghostlab.report import strip_timing

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def steinberg_run():
    t0 = time.perf_counter()
    window = make_window(sl2_family([3, 5, 7]), policy="steinberg")
    T = build_T(window)
    e = ghost_projection(T)
    elapsed = time.perf_counter() - t0
    return window, T, e, elapsed


def preset_windows():
    return {
        "sl2{3,5,7}/steinberg": make_window(sl2_family([3, 5, 7]), policy="steinberg"),
        "alt{4,5,6}/deleted-natural": make_window(alt_family([4, 5, 6]), policy="deleted-natural"),
        "mixed/deleted-natural": make_window(mixed_small_family(), policy="deleted-natural"),
    }


def test_criterion_01_group_orders(acceptance):
    cases = [("Alt(4)", lambda: alt_family([4]), 12), ("Alt(5)", lambda: alt_family([5]), 60)]
    cases += [(f"SL(2,{p})", lambda p=p: sl2_family([p]), p * (p * p - 1)) for p in (3, 5, 7)]
    results = []
    for label, build, want in cases:
        t0 = time.perf_counter()
        order = build().orders[0]
        dt = time.perf_counter() - t0
        results.append((label, order, want, dt))
    ok = all(order == want and dt < 1.0 for _, order, want, dt in results)
    detail = ", ".join(f"{lb}={o} ({dt:.3f}s)" for lb, o, _, dt in results)
    acceptance(1, ok, f"closure orders exact, each < 1 s: {detail}")
    assert ok


def test_criterion_02_expander_certificate(acceptance):
    t0 = time.perf_counter()
    fam = sl2_family([3, 5, 7])
    spectra = [block_spectrum(level_graph(fam, n)) for n in range(3)]
    dt = time.perf_counter() - t0
    residual = max(abs(s["lambda1"] - s["degree"] * (1 - s["mu2"])) for s in spectra)
    lam = [s["lambda1"] for s in spectra]
    ok = min(lam) > 0 and residual <= 1e-8 and dt < 5.0
    acceptance(2, ok, f"lambda1 = {[f'{x:.6g}' for x in lam]}, identity residual {residual:.2e} <= 1e-8, {dt:.2f}s < 5 s")
    assert ok


def test_criterion_03_ghost_agreement(acceptance, steinberg_run):
    window, T, e, elapsed = steinberg_run
    worst = max(e.agreement.values())
    largest = max(b.shape[0] for b in T.blocks.values())
    ok = len(e.pairs) == 9 and worst <= 1e-8 and elapsed < 60.0
    acceptance(3, ok, f"max Frobenius |E - P_avg| = {worst:.2e} <= 1e-8 over {len(e.pairs)} blocks "
                      f"(largest {largest}), {elapsed:.1f}s < 60 s")
    assert ok


def test_criterion_04_claim1_gaps(acceptance, steinberg_run):
    window, T, e, _ = steinberg_run
    gaps = verify_claim1(window, T)
    independent = [gap_at_one(T.blocks[(r["N"], r["M"])]) for r in gaps.pairs]
    recomputed = max(abs(a - r["gap"]) for a, r in zip(independent, gaps.pairs))
    ok = gaps.min_gap > 1e-3 and gaps.consistent and recomputed <= 1e-8 and len(gaps.pairs) == 9
    acceptance(4, ok, f"min gap {gaps.min_gap:.6g} > 1e-3; every gap >= quotient gap - 1e-8: {gaps.consistent}; "
                      f"min quotient gap {gaps.min_quotient_gap:.6g}")
    assert ok


def test_criterion_05_diagonal_ranks(acceptance, steinberg_run):
    window, _, e, _ = steinberg_run
    ranks = rank_sequence(e)  # raises OracleMismatch on any disagreement
    oracle_diag = [ranks.oracle[(n, n)] for n in window.levels]
    ok = ranks.diagonal == oracle_diag == [3, 5, 7] == window.dims
    acceptance(5, ok, f"eigensolve {ranks.diagonal}, character oracle {oracle_diag}, dims {window.dims}")
    assert ok


def test_criterion_06_vanishing_and_control(acceptance):
    checked, violations = 0, []
    for name, window in preset_windows().items():
        e = ghost_projection(build_T(window))
        ranks = rank_sequence(e)
        for n, m in e.pairs:
            if window.irreps[m].dim > window.family.levels[n].group.order:
                checked += 1
                if ranks.table[(n, m)] != 0:
                    violations.append((name, n, m))
    control = make_window(sl2_family([3, 5, 7]), policy="trivial")
    ce = rank_sequence(ghost_projection(build_T(control)))
    no_vanishing = all(r > 0 for r in ce.table.values())
    ok = checked > 0 and not violations and not control.star_star and no_vanishing
    acceptance(6, ok, f"{checked} pairs with dim(H_M) > |G_N|, {len(violations)} nonzero; trivial control: "
                      f"star-star flag {control.star_star}, all ranks nonzero {no_vanishing}")
    assert ok


def test_criterion_07_separation(acceptance, steinberg_run):
    window, _, e, _ = steinberg_run
    rows = []
    for k in (0, 1, 2):
        tail = diagonal_ranks(truncate_to_J(e, k))[k:]
        e_tail = diagonal_ranks(e)[k:]
        rows.append((k, tail, e_tail, all(r == 0 for r in tail) and all(r > 0 for r in e_tail)))
    ok = all(r[3] for r in rows)
    acceptance(7, ok, "; ".join(f"k={k}: J-tail {t}, e-tail {et}" for k, t, et, _ in rows))
    assert ok


def test_criterion_08_classical_ghost(acceptance):
    window = make_window(sl2_family([3, 5, 7]), policy="trivial")
    cg = classical_ghost(window)
    e = ghost_projection(build_T(window))
    closed = max(np.abs(cg[(n, n)] - 1.0 / window.family.levels[n].group.order).max() for n in window.levels)
    vs_trivial = max(np.abs(e[(n, m)] - cg[(n, n)]).max() for n, m in e.pairs)
    space = family_space(window.family)
    radii = [propagation(BlockOperator(window, {(n, n): cg[(n, n)]}), space, [0.01]).radius(0.01)
             for n in window.levels]
    ok = closed <= 1e-10 and vs_trivial <= 1e-10 and radii[-1] < radii[0]
    acceptance(8, ok, f"closed form dev {closed:.1e}, vs trivial-pi e {vs_trivial:.1e} (<= 1e-10); "
                      f"R(0.01) entrywise per block {radii}")
    assert ok


def test_criterion_09_triangle_inequality(acceptance):
    spaces = {
        "sl2{3,5,7}": family_space(sl2_family([3, 5, 7])),
        "alt{4,5,6}": family_space(alt_family([4, 5, 6])),
        "mixed": family_space(mixed_small_family()),
        "complete(5)": family_space(complete_family(5)),
    }
    checks = {name: s.triangle_check(samples=10_000) for name, s in spaces.items()}
    ok = all(c["ok"] and c["samples"] == 10_000 for c in checks.values())
    acceptance(9, ok, ", ".join(f"{n}: {c['violations']} violations" for n, c in checks.items()))
    assert ok


def test_criterion_10_determinism(acceptance, tmp_path, capsys):
    texts = {}
    for p in (1, 8):
        for run in (0, 1):
            path = tmp_path / f"p{p}_{run}.json"
            code = main(["ghost", "--kind", "sl2", "--primes", "3,5,7", "--parallelism", str(p), "--out", str(path)])
            assert code == 0
            texts[(p, run)] = json.dumps(strip_timing(json.loads(path.read_text())), sort_keys=True)
    capsys.readouterr()
    same_1 = texts[(1, 0)] == texts[(1, 1)]
    same_8 = texts[(8, 0)] == texts[(8, 1)]
    across = texts[(1, 0)] == texts[(8, 0)]
    ok = same_1 and same_8 and across
    acceptance(10, ok, f"identical modulo timing: parallelism 1 {same_1}, parallelism 8 {same_8}, 1 vs 8 {across}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ghostlab.coarse import family_space, propagation
from ghostlab.errors import ClusterAmbiguous, OracleMismatch
from ghostlab.families import product_subgroup_family
from ghostlab.ghost import (
    DEGENERATE_GAP,
    BlockOperator,
    build_T,
    classical_ghost,
    diagonal_ranks,
    gap_at_one,
    ghost_projection,
    make_window,
    rank_oracle,
    rank_sequence,
    truncate_to_J,
    verify_claim1,
    verify_claim2,
    verify_claim3,
)
from ghostlab.groups import GroupElement
from ghostlab.reps import invariant_projection


@pytest.mark.slow
def test_sl2_pipeline_ranks_and_agreement(sl2_pipeline):
    window, T, e, ranks = sl2_pipeline
    assert ranks.diagonal == [3, 5, 7] == window.dims
    assert all(ranks.table[k] == ranks.oracle[k] for k in e.pairs)
    assert max(e.agreement.values()) <= 1e-8
    assert T.is_hermitian() and e.is_hermitian(1e-10)
    for key, block in e.blocks.items():
        assert np.allclose(block @ block, block, atol=1e-9)


@pytest.mark.slow
def test_sl2_claims(sl2_pipeline):
    window, T, e, _ = sl2_pipeline
    gaps = verify_claim1(window, T)
    assert gaps.min_gap > 1e-3 and gaps.consistent and gaps.star_condition_flag
    for row in gaps.pairs:
        assert row["gap"] >= row["quotient_gap"] - 1e-8
    c3 = verify_claim3(window, e)
    assert c3.diagonal == [3, 5, 7] and c3.all_nonzero and c3.separated
    assert [t["tail_ranks"] for t in c3.truncations] == [[0, 0, 0], [0, 0], [0]]
    c2 = verify_claim2(window, 0, e)
    assert [r["rank"] for r in c2.ranks] == [3, 0, 0]
    assert c2.vanish_from == 2 and c2.star_star


def test_truncate_examples(mixed_pipeline):
    window, _, e, _ = mixed_pipeline
    full = truncate_to_J(e, len(window.levels))
    assert all(np.array_equal(full[k], e[k]) for k in e.pairs)
    zero = truncate_to_J(e, 0)
    assert all(not np.any(zero[k]) for k in e.pairs)
    one = truncate_to_J(e, 1)
    first = window.levels[0]
    for (n, m), block in one.blocks.items():
        assert (m == first) or not np.any(block)
    assert diagonal_ranks(one) == [1, 0, 0, 0]


def test_vanishing_law_on_mixed(mixed_pipeline):
    window, _, e, ranks = mixed_pipeline
    bound = [(n, m) for n, m in e.pairs if window.irreps[m].dim > window.family.levels[n].group.order]
    assert bound, "the mixed preset must exercise dim(H_M) > |G_N|"
    assert all(ranks.table[k] == 0 for k in bound)
    assert ranks.diagonal == window.dims == [1, 2, 3, 4]
    reports = [verify_claim2(window, n, e) for n in window.levels]
    assert reports[0].bound_levels == [2, 3] and reports[0].bound_holds


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 3))
def test_truncation_separates(k):
    from ghostlab.families import mixed_small_family
    window = make_window(mixed_small_family(), policy="deleted-natural")
    e = ghost_projection(build_T(window))
    tail = diagonal_ranks(truncate_to_J(e, k))[k:]
    assert all(r == 0 for r in tail)
    assert all(r > 0 for r in diagonal_ranks(e)[k:])


def test_oracle_formula_directly(mixed):
    window = make_window(mixed, policy="deleted-natural")
    # Sym(2) x Alt(5) pair: rank = (2/|Q|) * sum of chi over the fiber
    assert rank_oracle(window, 0, 3) == 0
    assert rank_oracle(window, 3, 3) == 4


def test_trivial_policy_control(sl2_35):
    window = make_window(sl2_35, policy="trivial")
    assert window.dims == [1, 1] and not window.star_star
    e = ghost_projection(build_T(window))
    ranks = rank_sequence(e)
    # no vanishing at all: every pair keeps the constants
    assert all(r == 1 for r in ranks.table.values())
    cg = classical_ghost(window)
    for n, m in e.pairs:
        assert np.abs(e[(n, m)] - cg[(n, n)]).max() <= 1e-10
    assert np.allclose(cg[(0, 0)], 1 / 24)


def test_classical_ghost_trivial_group():
    fam = product_subgroup_family([[GroupElement.perm([0])]])
    window = make_window(fam, policy="trivial")
    assert classical_ghost(window)[(0, 0)].tolist() == [[1]]
    T = build_T(window)
    assert gap_at_one(T[(0, 0)]) == DEGENERATE_GAP


def test_classical_ghost_decays(sl2_357):
    window = make_window(sl2_357, policy="trivial")
    cg = classical_ghost(window)
    space = family_space(sl2_357)
    radii = [propagation(BlockOperator(window, {(n, n): cg[(n, n)]}), space, [0.01]).radius(0.01)
             for n in window.levels]
    assert radii[-1] < radii[0]


def test_large_path_matches_dense(sl2_35):
    window = make_window(sl2_35)
    T = build_T(window)
    dense = ghost_projection(T)
    large = ghost_projection(T, dense_limit=50)
    for k in T.pairs:
        assert np.abs(dense[k] - large[k]).max() < 1e-10
        assert dense.multiplicity[k] == large.multiplicity[k]
        assert large.agreement[k] < 1e-8


def test_cluster_ambiguous(sl2_35):
    window = make_window(sl2_35, levels=[0])
    T = build_T(window)
    key = (0, 0)
    p = np.real(invariant_projection(window.context(*key).rep))
    T.blocks[key] = p + 0.9995 * (np.eye(len(p)) - p)
    with pytest.raises(ClusterAmbiguous) as info:
        ghost_projection(T)
    assert info.value.block == key


def test_oracle_mismatch(sl2_35):
    window = make_window(sl2_35, levels=[0])
    e = ghost_projection(build_T(window))
    e.multiplicity[(0, 0)] += 1
    with pytest.raises(OracleMismatch) as info:
        rank_sequence(e)
    assert info.value.block == (0, 0)


def test_parallel_build_is_deterministic(sl2_35):
    window = make_window(sl2_35)
    a, b = build_T(window, 1), build_T(window, 4)
    assert all(np.array_equal(a[k], b[k]) for k in a.pairs)
    ea, eb = ghost_projection(a, 1), ghost_projection(b, 4)
    assert all(np.array_equal(ea[k], eb[k]) for k in ea.pairs)


def test_window_validation(sl2_35):
    with pytest.raises(ValueError):
        make_window(sl2_35, levels=[0, 0])
    with pytest.raises(IndexError):
        make_window(sl2_35, levels=[2])
    w = make_window(sl2_35, levels=[1])
    assert w.position(1) == 1 and w.pairs == [(1, 1)]


def test_empty_window_is_vacuous(sl2_35):
    window = make_window(sl2_35, levels=[])
    e = ghost_projection(build_T(window))
    report = verify_claim3(window, e)
    assert report.vacuous and not report.separated


def test_identical_levels_give_diagonal_quotient(sl2_35):
    from ghostlab.groups import QuotientFamily
    lv = sl2_35.levels[0]
    dup = QuotientFamily(sl2_35.symbols, [lv, lv])
    window = make_window(dup, policy="steinberg")
    T = build_T(window)
    ghost_projection(T)
    gaps = verify_claim1(window, T)
    assert {r["quotient_order"] for r in gaps.pairs} == {24}
    assert len({round(r["gap"], 12) for r in gaps.pairs}) == 1

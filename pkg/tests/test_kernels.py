import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from ghostlab import _kernels_py, kernels

BACKENDS = list(kernels.BACKENDS.items())


def perm_gens(n, k):
    return st.lists(st.permutations(list(range(n))), min_size=1, max_size=k)


def test_active_backend_is_known():
    assert kernels.BACKEND in kernels.BACKENDS
    assert kernels.closure is kernels.BACKENDS[kernels.BACKEND].closure


@pytest.mark.parametrize("name,mod", BACKENDS)
def test_closure_sym4(name, mod):
    gens = np.array([[1, 0, 2, 3], [1, 2, 3, 0]], dtype=np.int32)
    table, left = mod.closure(gens, 1000)
    assert table.shape == (24, 4)
    assert np.array_equal(table[0], np.arange(4))
    # left[x, j] is the index of gens[j] composed after element x
    for x in range(24):
        for j in range(2):
            assert np.array_equal(table[left[x, j]], gens[j][table[x]])


@pytest.mark.parametrize("name,mod", BACKENDS)
def test_closure_cap(name, mod):
    gens = np.array([[1, 0, 2, 3, 4], [1, 2, 3, 4, 0]], dtype=np.int32)
    with pytest.raises(OverflowError):
        mod.closure(gens, 100)


@settings(max_examples=40, deadline=None)
@given(perm_gens(6, 3))
def test_backends_agree_on_closure(gens):
    gens = np.array(gens, dtype=np.int32)
    ref_table, ref_left = _kernels_py.closure(gens, 10**6)
    for _, mod in BACKENDS:
        table, left = mod.closure(gens, 10**6)
        assert np.array_equal(table, ref_table)
        assert np.array_equal(left, ref_left)


@settings(max_examples=30, deadline=None)
@given(perm_gens(5, 2), st.integers(0, 2**32 - 1))
def test_row_index_lookup(gens, seed):
    gens = np.array(gens, dtype=np.int32)
    table, _ = _kernels_py.closure(gens, 10**6)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(table))
    missing = np.array([np.arange(5)[::-1]], dtype=np.int32)
    queries = np.concatenate([table[order], missing])
    for _, mod in BACKENDS:
        found = mod.RowIndex(table).lookup(queries)
        assert np.array_equal(found[:-1], order)
        present = any(np.array_equal(r, missing[0]) for r in table)
        assert (found[-1] >= 0) == present


@settings(max_examples=30, deadline=None)
@given(perm_gens(5, 3))
def test_bfs_matches_scipy_shortest_path(gens):
    gens = np.array(gens, dtype=np.int32)
    table, left = _kernels_py.closure(gens, 10**6)
    k = len(table)
    rows = np.repeat(np.arange(k), left.shape[1])
    adj = csr_matrix((np.ones(rows.size), (rows, left.ravel())), shape=(k, k))
    oracle = shortest_path(adj, unweighted=True, directed=True)
    oracle = np.where(np.isinf(oracle), -1, oracle).astype(np.int32)
    sources = np.arange(min(k, 7))
    for _, mod in BACKENDS:
        assert np.array_equal(mod.bfs_distances(left, sources), oracle[sources])


@pytest.mark.parametrize("name,mod", BACKENDS)
def test_bfs_unreachable(name, mod):
    adjacency = np.array([[1], [0], [2]], dtype=np.int64)
    d = mod.bfs_distances(adjacency, np.array([0]))
    assert d.tolist() == [[0, 1, -1]]


def test_pure_fallback_selected_by_env():
    import os
    import subprocess
    import sys
    code = ("from ghostlab import kernels, sl2_family, make_window, build_T, ghost_projection, rank_sequence;"
            "e = ghost_projection(build_T(make_window(sl2_family([3, 5]))));"
            "print(kernels.BACKEND, rank_sequence(e).diagonal)")
    env = dict(os.environ, GHOSTLAB_PURE="1")
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.split()[0] == "python"
    assert proc.stdout.strip().endswith("[3, 5]")

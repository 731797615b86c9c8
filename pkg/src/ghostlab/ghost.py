"""Block Markov operator T, ghost projection e and the claim checks at window scale.

Block (N, M) lives on l2(G_N) ⊗ H_M and carries the representation
lambda_N ⊗ pi_M of the intersection quotient Gamma/(N ∩ M), realized as the
product image of the two levels (G_N itself when N == M).  Couplings between
different pairs are absent by construction.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .errors import ClusterAmbiguous, OracleMismatch
from .families import choose_irrep
from .groups import DEFAULT_CAP, FiniteGroup, QuotientFamily, kernel_fiber_indices, product_image
from .coarse import DENSE_LIMIT, markov_gap
from .reps import (
    AMBIGUITY_WINDOW,
    CLUSTER_TOL,
    RANK_GUARD,
    Representation,
    cluster_projection,
    invariant_projection,
    markov_operator,
    regular_representation,
    round_rank,
    tensor,
)

PROJECTION_TOL = 1e-8
GAP_FLOOR = 1e-3
CONSISTENCY_TOL = 1e-8
DEGENERATE_GAP = 2.0


def _pmap(fn, items, parallelism):
    items = list(items)
    if parallelism <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(fn, items))


@dataclass(eq=False)
class PairContext:
    key: tuple[int, int]
    group: FiniteGroup
    rep: Representation
    genset: np.ndarray


@dataclass(eq=False)
class Window:
    """A finite run of levels with one chosen irreducible pi_N per level."""

    family: QuotientFamily
    levels: list[int]
    irreps: dict[int, Representation]
    policy: str = ""
    cap: int = DEFAULT_CAP
    _regular: dict = field(default_factory=dict, repr=False)
    _contexts: dict = field(default_factory=dict, repr=False)

    @property
    def dims(self) -> list[int]:
        return [self.irreps[n].dim for n in self.levels]

    @property
    def orders(self) -> list[int]:
        return [self.family.levels[n].group.order for n in self.levels]

    @property
    def labels(self) -> list[str]:
        return [self.family.levels[n].label for n in self.levels]

    @property
    def star_star(self) -> bool:
        """Empirical (★★): irrep dimensions strictly increase along the window."""
        d = self.dims
        return len(d) >= 2 and all(a < b for a, b in zip(d, d[1:]))

    def position(self, level: int) -> int:
        """1-based position of a level in the window."""
        return self.levels.index(level) + 1

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(n, m) for n in self.levels for m in self.levels]

    def regular(self, level: int) -> Representation:
        if level not in self._regular:
            self._regular[level] = regular_representation(self.family.levels[level].group)
        return self._regular[level]

    def context(self, n: int, m: int) -> PairContext:
        key = (n, m)
        if key not in self._contexts:
            reg = self.regular(n)
            if n == m:
                group = self.family.levels[n].group
                rep = tensor(reg, self.irreps[m])
            else:
                group = product_image(self.family, n, m, self.cap)
                rep = tensor(reg, self.irreps[m], over=group)
            self._contexts[key] = PairContext(key, group, rep, group.gen_indices)
        return self._contexts[key]


def make_window(family: QuotientFamily, levels=None, policy: str = "steinberg", cap: int = DEFAULT_CAP,
                action=None) -> Window:
    levels = list(range(len(family))) if levels is None else [int(n) for n in levels]
    for n in levels:
        if not 0 <= n < len(family):
            raise IndexError(f"level {n} outside the family")
    if len(set(levels)) != len(levels):
        raise ValueError("window levels must be distinct")
    irreps = {n: choose_irrep(family.levels[n].group, policy, action=action) for n in levels}
    return Window(family, levels, irreps, policy, cap)


@dataclass(eq=False)
class BlockOperator:
    """Dense blocks indexed by level pairs (N, M) over a window."""

    window: Window
    blocks: dict
    kind: str = "T"
    multiplicity: dict = field(default_factory=dict)
    agreement: dict = field(default_factory=dict)
    gaps: dict = field(default_factory=dict)
    top_eigenvalue: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.blocks[key]

    @property
    def pairs(self):
        return list(self.blocks)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(np.abs(b - b.conj().T).max(initial=0.0) <= tol for b in self.blocks.values())


def build_T(window: Window, parallelism: int = 1) -> BlockOperator:
    """T_{NM} = (1/|S|) sum_s (lambda_N ⊗ pi_M)(s) for every pair in the window."""
    pairs = window.pairs
    for key in pairs:  # enumerate product groups up front, serially
        window.context(*key)

    def block(key):
        ctx = window.context(*key)
        return markov_operator(ctx.rep, ctx.genset)

    return BlockOperator(window, dict(zip(pairs, _pmap(block, pairs, parallelism))), kind="T")


def gap_from_eigenvalues(evals, cluster_tol: float = CLUSTER_TOL) -> float:
    below = evals[evals < 1.0 - cluster_tol]
    return DEGENERATE_GAP if below.size == 0 else float(1.0 - below.max())


def gap_at_one(block, cluster_tol: float = CLUSTER_TOL) -> float:
    """1 minus the largest eigenvalue outside the 1-cluster; 2 if there is none."""
    evals = np.linalg.eigvalsh(block) if np.any(np.imag(block)) else np.linalg.eigvalsh(np.real(block))
    return gap_from_eigenvalues(evals, cluster_tol)


def _ambiguous(evals, cluster_tol):
    return np.any((evals > 1.0 - AMBIGUITY_WINDOW) & (evals < 1.0 - cluster_tol))


def _dense_cluster(t, cluster_tol):
    proj, mult, evals = cluster_projection(t, cluster_tol)
    return proj, mult, gap_from_eigenvalues(evals, cluster_tol), float(evals.max()), evals


def _large_cluster(t, averaging, cluster_tol, seed=0):
    """Subspace iteration for the 1-cluster, seeded with the averaging range."""
    dim = t.shape[0]
    if np.iscomplexobj(t) and not np.any(t.imag):
        t = np.real(t)
        averaging = np.real(averaging)
    rank = round_rank(float(np.real(np.trace(averaging))))
    rng = np.random.default_rng(seed)
    if rank:
        v, _ = np.linalg.qr(averaging @ rng.standard_normal((dim, rank)))
        for _ in range(50):
            w, _ = np.linalg.qr((v + t @ v) / 2)
            done = np.linalg.norm(w @ (w.conj().T @ v) - v) < 1e-13
            v = w
            if done:
                break
        rayleigh = np.linalg.eigvalsh(v.conj().T @ t @ v)
    else:
        v = np.zeros((dim, 0), dtype=t.dtype)
        rayleigh = np.zeros(0)

    def deflated(x):
        x = x - v @ (v.conj().T @ x)
        y = t @ x
        return y - v @ (v.conj().T @ y)

    op = spla.LinearOperator((dim, dim), matvec=deflated, dtype=t.dtype)
    below = float(spla.eigsh(op, k=1, which="LA", return_eigenvectors=False)[0])
    evals = np.concatenate([rayleigh, [below]])
    mult = int(np.sum(rayleigh >= 1.0 - cluster_tol))
    proj = (v @ v.conj().T).astype(complex)
    return proj, mult, gap_from_eigenvalues(evals, cluster_tol), float(evals.max()), evals


def ghost_projection(T: BlockOperator, parallelism: int = 1, cluster_tol: float = CLUSTER_TOL,
                     dense_limit: int = DENSE_LIMIT) -> BlockOperator:
    """Spectral projection of each T block onto its eigenvalue-1 cluster.

    Each block is compared with the group-averaging projection of the same
    representation; the Frobenius distance is kept in ``agreement``.
    """
    window = T.window

    def one(key):
        t = T.blocks[key]
        averaging = invariant_projection(window.context(*key).rep)
        if t.shape[0] <= dense_limit:
            proj, mult, gap, top, evals = _dense_cluster(t, cluster_tol)
        else:
            proj, mult, gap, top, evals = _large_cluster(t, averaging, cluster_tol)
        if _ambiguous(evals, cluster_tol):
            raise ClusterAmbiguous(f"eigenvalues inside the ambiguity window for block {key}", block=key)
        return proj, mult, gap, top, float(np.linalg.norm(proj - averaging))

    results = _pmap(one, T.pairs, parallelism)
    e = BlockOperator(window, {}, kind="e")
    for key, (proj, mult, gap, top, dist) in zip(T.pairs, results):
        e.blocks[key] = proj
        e.multiplicity[key] = mult
        e.agreement[key] = dist
        T.gaps[key] = gap
        T.top_eigenvalue[key] = top
    e.gaps = T.gaps
    e.top_eigenvalue = T.top_eigenvalue
    return e


def rank_oracle(window: Window, n: int, m: int) -> int:
    """rank(e_NM) = (|G_N|/|Q|) sum over the kernel fiber of chi_pi."""
    ctx = window.context(n, m)
    chi = window.irreps[m].character()
    order_n = window.family.levels[n].group.order
    if n == m:
        total = chi[0]  # fiber of G_N -> G_N is the identity alone
        q = order_n
    else:
        fiber = kernel_fiber_indices(ctx.group, 0)
        total = chi[ctx.group.coords[fiber, 1]].sum()
        q = ctx.group.order
    return round_rank(float(np.real(total)) * order_n / q, RANK_GUARD)


@dataclass
class RankSequence:
    levels: list[int]
    diagonal: list[int]
    table: dict
    oracle: dict

    def rows(self):
        return [{"N": n, "M": m, "rank": self.table[(n, m)], "oracle": self.oracle[(n, m)]}
                for (n, m) in self.table]


def rank_sequence(e: BlockOperator) -> RankSequence:
    """Diagonal ranks k -> rank(e_{N_k N_k}) and the full pair table, oracle-checked."""
    window = e.window
    table, oracle = {}, {}
    for key in e.pairs:
        table[key] = e.multiplicity[key]
        oracle[key] = rank_oracle(window, *key)
        if table[key] != oracle[key]:
            raise OracleMismatch(
                f"block {key}: eigensolve rank {table[key]} != character oracle {oracle[key]}", block=key
            )
    diagonal = [table[(n, n)] for n in window.levels]
    return RankSequence(list(window.levels), diagonal, table, oracle)


def truncate_to_J(op: BlockOperator, k: int) -> BlockOperator:
    """Zero every block whose M-index sits past position k of the window."""
    window = op.window
    out = BlockOperator(window, {}, kind=f"{op.kind}|J{k}")
    for (n, m), block in op.blocks.items():
        keep = window.position(m) <= k
        out.blocks[(n, m)] = block if keep else np.zeros_like(block)
        if (n, m) in op.multiplicity:
            out.multiplicity[(n, m)] = op.multiplicity[(n, m)] if keep else 0
    return out


def diagonal_ranks(op: BlockOperator) -> list[int]:
    """Ranks of the diagonal blocks of a block projection."""
    out = []
    for n in op.window.levels:
        key = (n, n)
        if key in op.multiplicity:
            out.append(op.multiplicity[key])
        else:
            out.append(round_rank(float(np.real(np.trace(op.blocks[key])))))
    return out


@dataclass
class GapReport:
    pairs: list[dict]
    min_gap: float
    min_quotient_gap: float
    consistent: bool
    star_condition_flag: bool


def verify_claim1(window: Window, T: BlockOperator, parallelism: int = 1) -> GapReport:
    """Pair-block gaps at 1 against the Cayley gaps of the intersection quotients."""
    def quotient_gap(key):
        ctx = window.context(*key)
        return markov_gap(ctx.group, ctx.genset)

    keys = T.pairs
    for key in keys:
        if key not in T.gaps:
            T.gaps[key] = gap_at_one(T.blocks[key])
    qgaps = _pmap(quotient_gap, keys, parallelism)
    rows = []
    for key, qg in zip(keys, qgaps):
        g = T.gaps[key]
        rows.append({
            "N": key[0], "M": key[1],
            "gap": g,
            "degenerate": g == DEGENERATE_GAP,
            "quotient_order": window.context(*key).group.order,
            "quotient_gap": qg,
            "consistent": g >= qg - CONSISTENCY_TOL,
        })
    if not rows:
        return GapReport([], DEGENERATE_GAP, DEGENERATE_GAP, True, False)
    min_gap = min(r["gap"] for r in rows)
    min_q = min(r["quotient_gap"] for r in rows)
    consistent = all(r["consistent"] for r in rows)
    return GapReport(rows, min_gap, min_q, consistent, consistent and min_q > GAP_FLOOR)


@dataclass
class Claim2Report:
    level: int
    order: int
    ranks: list[dict]
    vanish_from: int | None
    bound_levels: list[int]
    bound_holds: bool
    star_star: bool


def verify_claim2(window: Window, level: int, e: BlockOperator) -> Claim2Report:
    """Ranks rank(e_NM) along M for fixed N, and the dimension bound dim(H_M) > |G_N|."""
    order = window.family.levels[level].group.order
    ranks = [{"M": m, "dim": window.irreps[m].dim, "rank": e.multiplicity[(level, m)]} for m in window.levels]
    values = [r["rank"] for r in ranks]
    vanish_from = None
    for j in range(len(values), -1, -1):
        if any(values[j:]):
            break
        vanish_from = j + 1  # 1-based window position
    if vanish_from is not None and vanish_from > len(values):
        vanish_from = None
    bound = [r["M"] for r in ranks if r["dim"] > order]
    holds = all(r["rank"] == 0 for r in ranks if r["dim"] > order)
    return Claim2Report(level, order, ranks, vanish_from, bound, holds, window.star_star)


@dataclass
class Claim3Report:
    vacuous: bool
    diagonal: list[int]
    all_nonzero: bool
    truncations: list[dict]
    separated: bool


def verify_claim3(window: Window, e: BlockOperator, ks=None) -> Claim3Report:
    """Diagonal ranks of e stay nonzero while J-truncations have zero tails."""
    if not window.levels:
        return Claim3Report(True, [], False, [], False)
    diag = diagonal_ranks(e)
    ks = range(len(window.levels)) if ks is None else ks
    truncations = []
    for k in ks:
        tail = diagonal_ranks(truncate_to_J(e, k))[k:]
        e_tail = diag[k:]
        truncations.append({
            "k": int(k),
            "tail_ranks": tail,
            "tail_zero": all(r == 0 for r in tail),
            "e_tail_nonzero": all(r > 0 for r in e_tail),
        })
    separated = all(t["tail_zero"] and t["e_tail_nonzero"] for t in truncations)
    return Claim3Report(False, diag, all(r > 0 for r in diag), truncations, separated)


def classical_ghost(window: Window) -> BlockOperator:
    """Block N = (1/|G_N|) * all-ones: the trivial-pi specialization of e."""
    blocks = {}
    for n in window.levels:
        size = window.family.levels[n].group.order
        blocks[(n, n)] = np.full((size, size), 1.0 / size, dtype=complex)
    return BlockOperator(window, blocks, kind="classical-ghost")

"""Unitary representations of enumerated finite groups.

A :class:`Representation` is backed by one of four sources: a permutation
action (optionally restricted to an orthonormal basis of an invariant
subspace), a tensor product of two representations fed through index maps,
materialized images, or generator images expanded along the BFS tree of the
group.  Images are produced on demand so large groups can be averaged over
by streaming.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    GroupMismatch,
    IncompatiblePairing,
    NotAnAction,
    NotSymmetricSet,
    NotTransitive,
    RankRoundingError,
)
from .groups import FiniteGroup

CLUSTER_TOL = 1e-8
AMBIGUITY_WINDOW = 1e-3
RANK_GUARD = 1e-6
MATERIALIZE_LIMIT = 200_000_000  # scalar entries, |G| * dim**2
CHUNK = 4096


class Representation:
    def __init__(self, group: FiniteGroup, dim: int, *, action=None, basis=None, tensor=None,
                 images=None, gen_images=None, label=""):
        self.group = group
        self.dim = int(dim)
        self.label = label
        self._action = action
        self._basis = basis
        self._tensor = tensor
        self._images = images
        self._gen_images = gen_images
        self._character = None

    def __repr__(self):
        return f"Representation({self.label or 'anonymous'}, dim={self.dim}, |G|={self.group.order})"

    @property
    def is_action(self) -> bool:
        """True when every image is a permutation matrix of ``action``."""
        return self._action is not None and self._basis is None

    @property
    def action(self):
        return self._action

    def images_for(self, idx) -> np.ndarray:
        """Stacked images (k, d, d) of the elements with indices ``idx``."""
        idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
        k, d = len(idx), self.dim
        if self._action is not None:
            act = self._action[idx]
            if self._basis is None:
                out = np.zeros((k, d, d), dtype=complex)
                out[np.arange(k)[:, None], act, np.arange(d)[None, :]] = 1.0
                return out
            b = self._basis
            return np.conj(b[act]).transpose(0, 2, 1) @ b
        if self._tensor is not None:
            a, b, ia, ib = self._tensor
            ma = a.images_for(ia[idx])
            mb = b.images_for(ib[idx])
            return np.einsum("kij,kab->kiajb", ma, mb).reshape(k, d, d)
        if self._images is not None:
            return self._images[idx]
        return np.stack([self._walk(i) for i in idx])

    def image(self, i: int) -> np.ndarray:
        return self.images_for([i])[0]

    def _walk(self, i):
        parent, gen = self.group.bfs_parents
        m = np.eye(self.dim, dtype=complex)
        # x = gens[gen[x]] * parent[x], so images accumulate left to right
        while i > 0:
            m = m @ self._gen_images[gen[i]]
            i = parent[i]
        return m

    def iter_images(self, chunk: int = CHUNK):
        """Yield ``(indices, images)`` chunks covering the whole group."""
        if self._gen_images is not None and self._images is None:
            yield from self._stream_generated(chunk)
            return
        for start in range(0, self.group.order, chunk):
            idx = np.arange(start, min(start + chunk, self.group.order))
            yield idx, self.images_for(idx)

    def _stream_generated(self, chunk):
        # BFS order: every parent precedes its children, and parents sit one
        # layer up, so only the previous layer needs to stay in memory.
        parent, gen = self.group.bfs_parents
        depth = np.zeros(self.group.order, dtype=np.int64)
        for x in range(1, self.group.order):
            depth[x] = depth[parent[x]] + 1
        cache = {0: np.eye(self.dim, dtype=complex)}
        buf_idx, buf = [], []
        for x in range(self.group.order):
            if x:
                cache[x] = self._gen_images[gen[x]] @ cache[parent[x]]
                if depth[x] != depth[x - 1]:
                    cache = {k: v for k, v in cache.items() if depth[k] >= depth[x] - 1}
            buf_idx.append(x)
            buf.append(cache[x])
            if len(buf) == chunk:
                yield np.array(buf_idx), np.stack(buf)
                buf_idx, buf = [], []
        if buf:
            yield np.array(buf_idx), np.stack(buf)

    def images(self) -> np.ndarray:
        if self.group.order * self.dim**2 > MATERIALIZE_LIMIT:
            raise MemoryError("representation too large to materialize; use iter_images")
        return np.concatenate([m for _, m in self.iter_images()])

    def character(self) -> np.ndarray:
        if self._character is None:
            self._character = self._compute_character()
        return self._character

    def _compute_character(self):
        order = self.group.order
        if self._action is not None:
            act = self._action
            if self._basis is None:
                return (act == np.arange(act.shape[1])).sum(axis=1).astype(complex)
            b = self._basis
            out = np.empty(order, dtype=complex)
            for start in range(0, order, CHUNK):
                sl = slice(start, start + CHUNK)
                out[sl] = np.einsum("gnd,nd->g", np.conj(b[act[sl]]), b)
            return out
        if self._tensor is not None:
            a, b, ia, ib = self._tensor
            return a.character()[ia] * b.character()[ib]
        out = np.empty(order, dtype=complex)
        for idx, mats in self.iter_images():
            out[idx] = np.trace(mats, axis1=1, axis2=2)
        return out


def _check_action(group: FiniteGroup, act: np.ndarray, samples: int = 64, seed: int = 0):
    n = act.shape[1]
    if act.shape[0] != group.order:
        raise NotAnAction("action table must have one row per group element")
    if not np.all(np.sort(act, axis=1) == np.arange(n)):
        raise NotAnAction("action rows are not permutations")
    if not np.array_equal(act[0], np.arange(n)):
        raise NotAnAction("identity does not act trivially")
    rng = np.random.default_rng(seed)
    gs = np.concatenate([group.gen_indices, rng.integers(group.order, size=samples)])
    hs = rng.integers(group.order, size=len(gs))
    prod = group.compose(gs, hs)
    if not np.array_equal(act[prod], np.take_along_axis(act[gs], act[hs], axis=1)):
        raise NotAnAction("action is not a homomorphism")


def _action_table(group: FiniteGroup, action) -> np.ndarray:
    if callable(action):
        return np.array([action(g) for g in group.elements], dtype=np.int64)
    return np.asarray(action, dtype=np.int64)


def regular_representation(group: FiniteGroup) -> Representation:
    """Left regular representation: rho(g) sends basis vector h to gh."""
    return Representation(group, group.order, action=group.multiplication_table(), label="regular")


def trivial_representation(group: FiniteGroup) -> Representation:
    return Representation(group, 1, action=np.zeros((group.order, 1), dtype=np.int64), label="trivial")


def permutation_representation(group: FiniteGroup, action, check: bool = True) -> Representation:
    """Permutation matrices of an action given as a table (or element -> permutation)."""
    act = _action_table(group, action)
    if check:
        _check_action(group, act)
    return Representation(group, act.shape[1], action=act, label="permutation")


def helmert_basis(n: int) -> np.ndarray:
    """Real orthonormal basis (n, n-1) of the orthogonal complement of the all-ones vector."""
    b = np.zeros((n, n - 1))
    for k in range(1, n):
        b[:k, k - 1] = 1.0
        b[k, k - 1] = -k
        b[:, k - 1] /= np.sqrt(k * (k + 1))
    return b


def deleted_permutation_rep(group: FiniteGroup, action, check: bool = True) -> Representation:
    """The permutation representation with its trivial summand removed."""
    act = _action_table(group, action)
    if check:
        _check_action(group, act)
    n = act.shape[1]
    if n < 2:
        raise NotTransitive("need at least two points")
    gens = act[group.gen_indices]
    orbit = {0}
    frontier = [0]
    while frontier:
        frontier = [int(y) for y in set(gens[:, frontier].ravel()) - orbit]
        orbit.update(frontier)
    if len(orbit) != n:
        raise NotTransitive(f"orbit of point 0 has {len(orbit)} of {n} points")
    return Representation(group, n - 1, action=act, basis=helmert_basis(n), label="deleted-permutation")


def from_generator_images(group: FiniteGroup, gen_images) -> Representation:
    """Representation determined by the images of ``group.generators``.

    Materialized when small, otherwise streamed along the BFS tree.
    """
    gen_images = np.asarray(gen_images, dtype=complex)
    d = gen_images.shape[1]
    rep = Representation(group, d, gen_images=gen_images, label="generated")
    if group.order * d * d <= MATERIALIZE_LIMIT:
        rep._images = np.concatenate([m for _, m in rep._stream_generated(CHUNK)])
    return rep


def tensor(a: Representation, b: Representation, over: FiniteGroup | None = None, maps=None) -> Representation:
    """Kronecker product a ⊗ b as a representation of a common source group.

    ``over=None`` with a.group is b.group: the inner tensor product.
    ``over`` a product_image group with factors (a.group, b.group): its
    coordinate projections feed the factors.  ``maps=(ia, ib)`` overrides.
    """
    if maps is not None:
        if over is None:
            raise IncompatiblePairing("explicit maps need a source group")
        ia, ib = (np.asarray(m, dtype=np.int64) for m in maps)
        source = over
    elif over is None:
        if a.group is not b.group:
            raise IncompatiblePairing("factors live on different groups; pass the source group")
        source = a.group
        ia = ib = np.arange(source.order)
    else:
        if over.factors is None or over.factors[0] is not a.group or over.factors[1] is not b.group:
            raise IncompatiblePairing("source group's coordinates do not feed these factors")
        source = over
        ia, ib = over.coords[:, 0], over.coords[:, 1]
    if len(ia) != source.order or len(ib) != source.order:
        raise IncompatiblePairing("index maps must cover the source group")
    return Representation(source, a.dim * b.dim, tensor=(a, b, ia, ib), label=f"{a.label}⊗{b.label}")


def character_inner(a: Representation, b: Representation) -> float:
    if a.group is not b.group:
        raise GroupMismatch("characters live on different groups")
    return float(np.real(np.vdot(b.character(), a.character())) / a.group.order)


def is_irreducible(rep: Representation, tol: float = RANK_GUARD) -> bool:
    return abs(character_inner(rep, rep) - 1.0) <= tol


def round_rank(value: float, guard: float = RANK_GUARD) -> int:
    r = round(value)
    if abs(value - r) > guard:
        raise RankRoundingError(f"{value!r} is not within {guard} of an integer")
    return int(r)


def weighted_sum(rep: Representation, idx, weights) -> np.ndarray:
    """sum_k weights[k] * rho(idx[k]) as a dense (d, d) matrix."""
    idx = np.asarray(idx, dtype=np.int64)
    weights = np.broadcast_to(np.asarray(weights, dtype=float), idx.shape)
    d = rep.dim
    if rep.is_action:
        out = np.zeros((d, d), dtype=complex)
        act = rep.action[idx]
        np.add.at(out, (act, np.broadcast_to(np.arange(d), act.shape)), weights[:, None])
        return out
    if rep._tensor is not None and rep._tensor[0].is_action:
        return _tensor_action_sum(rep, idx, weights)
    out = np.zeros((d, d), dtype=complex)
    for start in range(0, len(idx), CHUNK):
        sl = slice(start, start + CHUNK)
        out += np.einsum("k,kij->ij", weights[sl], rep.images_for(idx[sl]))
    return out


def _tensor_action_sum(rep, idx, weights):
    # (P_a ⊗ rho_b) summed: group by the a-coordinate, then scatter the
    # accumulated b-sums along the permutation of each point.
    a, b, ia, ib = rep._tensor
    act = a.action
    n, db = a.dim, b.dim
    akeys = ia[idx]
    uniq, inv = np.unique(akeys, return_inverse=True)
    sums = np.zeros((len(uniq), db, db), dtype=complex)
    for start in range(0, len(idx), CHUNK):
        sl = slice(start, start + CHUNK)
        mats = b.images_for(ib[idx[sl]]) * weights[sl][:, None, None]
        np.add.at(sums, inv[sl], mats)
    out = np.zeros((n, db, n, db), dtype=complex)
    for i in range(n):
        np.add.at(out[:, :, i, :], act[uniq, i], sums)
    return out.reshape(n * db, n * db)


def invariant_projection(rep: Representation) -> np.ndarray:
    """Group average (1/|G|) sum_g rho(g): the projection onto invariant vectors."""
    order = rep.group.order
    return weighted_sum(rep, np.arange(order), 1.0 / order)


def check_symmetric_set(group: FiniteGroup, genset) -> None:
    genset = np.asarray(genset, dtype=np.int64)
    if not np.array_equal(np.sort(genset), np.sort(group.inverses[genset])):
        raise NotSymmetricSet("generating multiset is not closed under inversion")


def markov_operator(rep: Representation, genset) -> np.ndarray:
    """(1/|S|) sum_{s in S} rho(s) over a symmetric multiset of element indices."""
    genset = np.asarray(genset, dtype=np.int64)
    if genset.size == 0:
        raise NotSymmetricSet("empty generating multiset")
    check_symmetric_set(rep.group, genset)
    return weighted_sum(rep, genset, 1.0 / len(genset))


def hermitian_eigh(m: np.ndarray):
    """eigh, using the real solver when the matrix has no imaginary part."""
    if np.iscomplexobj(m) and np.any(m.imag):
        return np.linalg.eigh(m)
    return np.linalg.eigh(np.real(m))


def top_cluster(evals, cluster_tol: float = CLUSTER_TOL) -> np.ndarray:
    return evals >= 1.0 - cluster_tol


def cluster_projection(m: np.ndarray, cluster_tol: float = CLUSTER_TOL):
    """Spectral projection onto the eigenvalue-1 cluster.

    Returns ``(projection, multiplicity, eigenvalues)``.
    """
    evals, vecs = hermitian_eigh(m)
    mask = top_cluster(evals, cluster_tol)
    v = vecs[:, mask]
    return (v @ v.conj().T).astype(complex), int(mask.sum()), evals

"""Cayley graphs, the coarse disjoint union of their path metrics, and propagation."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from . import kernels
from .errors import Disconnected, IdentityInGenset, NotGenerating
from .groups import FiniteGroup, QuotientFamily
from .reps import check_symmetric_set

DENSE_LIMIT = 4096
NONZERO_TOL = 1e-12
CSV_COLUMNS = ("block_label", "dim", "degree", "diameter", "lambda1", "mu2")


@dataclass(eq=False)
class CayleyGraph:
    """Vertices are group elements; x ~ s*x for s in the generating set."""

    group: FiniteGroup
    genset: np.ndarray
    neighbors: np.ndarray
    label: str = ""
    flags: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        return self.group.order

    @property
    def degree(self) -> int:
        return len(self.genset)

    @cached_property
    def distances(self) -> np.ndarray:
        """All-pairs path distances, one BFS per vertex."""
        return kernels.bfs_distances(self.neighbors, np.arange(self.order))

    @property
    def diameter(self) -> int:
        return int(self.distances.max())

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.order, self.order))
        np.add.at(a, (self.neighbors, np.arange(self.order)[:, None]), 1.0)
        return a

    def sparse_adjacency(self) -> sp.csr_matrix:
        n, k = self.neighbors.shape
        return sp.csr_matrix(
            (np.ones(n * k), (self.neighbors.ravel(), np.repeat(np.arange(n), k))), shape=(n, n)
        )


def cayley_graph(group: FiniteGroup, genset, label: str = "") -> CayleyGraph:
    """Cayley graph for a symmetric, identity-free set of element indices.

    Repeated entries are collapsed to simple edges.
    """
    genset = [int(s) for s in genset]
    if 0 in genset:
        raise IdentityInGenset("the identity cannot label an edge")
    if not genset:
        raise NotGenerating("empty generating set")
    genset = np.array(list(dict.fromkeys(genset)), dtype=np.int64)
    check_symmetric_set(group, genset)
    neighbors = np.stack([group.left_translation(s) for s in genset], axis=1)
    reach = kernels.bfs_distances(neighbors, [0])[0]
    if np.any(reach < 0):
        raise NotGenerating(f"Cayley graph {label!r} is disconnected: {np.sum(reach >= 0)} of {group.order} reached")
    return CayleyGraph(group, genset, neighbors, label)


def level_graph(family: QuotientFamily, level: int) -> CayleyGraph:
    """Cayley graph of one level on the images of the symbols.

    Symbols mapping to the identity are dropped from the edge set, and
    coinciding images collapse; both are flagged.
    """
    lv = family.levels[level]
    images = [int(i) for i in lv.symbol_indices]
    identity_symbols = [s for s, i in enumerate(images) if i == 0]
    edges = [i for i in images if i != 0]
    graph = cayley_graph(lv.group, edges, lv.label)
    graph.flags = {
        "identity_symbols": identity_symbols,
        "collapsed": len(set(edges)) < len(edges),
    }
    return graph


def _eigs_top(matrix, k=2):
    """k largest eigenvalues (ascending) of a symmetric matrix."""
    if matrix.shape[0] <= DENSE_LIMIT:
        dense = matrix.toarray() if sp.issparse(matrix) else matrix
        return np.linalg.eigvalsh(dense)[-k:]
    vals = eigsh(sp.csr_matrix(matrix), k=k, which="LA", return_eigenvectors=False)
    return np.sort(vals)


def laplacian_gap(graph: CayleyGraph) -> float:
    """lambda_1 of the Laplacian deg*I - A."""
    reach = graph.distances[0] if graph.order <= DENSE_LIMIT else kernels.bfs_distances(graph.neighbors, [0])[0]
    if np.any(reach < 0):
        raise Disconnected(f"graph {graph.label!r} is disconnected")
    if graph.order == 1:
        return 0.0
    if graph.order <= DENSE_LIMIT:
        lap = graph.degree * np.eye(graph.order) - graph.adjacency()
        return float(np.linalg.eigvalsh(lap)[1])
    lap = graph.degree * sp.identity(graph.order, format="csc") - graph.sparse_adjacency().tocsc()
    vals = eigsh(lap, k=2, sigma=-0.5, which="LM", return_eigenvectors=False)
    return float(np.sort(vals)[1])


def normalized_mu2(graph: CayleyGraph) -> float:
    """Second-largest eigenvalue of the normalized adjacency A/deg."""
    if graph.order == 1:
        return 0.0
    a = graph.adjacency() if graph.order <= DENSE_LIMIT else graph.sparse_adjacency()
    return float(_eigs_top(a / graph.degree)[0])


def markov_gap(group: FiniteGroup, genset) -> float:
    """1 - mu_2 for the averaging operator (1/|S|) sum_s lambda(s), S a multiset."""
    genset = np.asarray(genset, dtype=np.int64)
    check_symmetric_set(group, genset)
    n = group.order
    if n == 1:
        return 2.0
    rows = np.concatenate([group.left_translation(s) for s in genset])
    cols = np.tile(np.arange(n), len(genset))
    m = sp.csr_matrix((np.full(len(rows), 1.0 / len(genset)), (rows, cols)), shape=(n, n))
    return float(1.0 - _eigs_top(m)[0])


def block_spectrum(graph: CayleyGraph) -> dict:
    return {
        "block_label": graph.label,
        "dim": graph.order,
        "degree": graph.degree,
        "diameter": graph.diameter,
        "lambda1": laplacian_gap(graph),
        "mu2": normalized_mu2(graph),
    }


def write_spectra_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_csv_value(row[c]) for c in CSV_COLUMNS])


def _csv_value(v):
    return f"{v:.12g}" if isinstance(v, float) else v


def default_cross_distance(q: int, q2: int, diam_q: int, diam_q2: int) -> int:
    """Distance between blocks at 1-based positions q != q2.

    The bare max(q, q2) can break the triangle inequality once diameters
    exceed positions, so diameters enter the max and one is added.
    """
    return max(q, q2, diam_q, diam_q2) + 1


@dataclass(eq=False)
class CoarseSpace:
    blocks: list[CayleyGraph]
    keys: list
    cross_distance: Callable[[int, int, int, int], int] = default_cross_distance

    @cached_property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum([b.order for b in self.blocks])])

    @property
    def size(self) -> int:
        return int(self.offsets[-1])

    @cached_property
    def cross_table(self) -> np.ndarray:
        k = len(self.blocks)
        table = np.zeros((k, k), dtype=np.int64)
        for i in range(k):
            for j in range(k):
                if i != j:
                    table[i, j] = self.cross_distance(i + 1, j + 1, self.blocks[i].diameter, self.blocks[j].diameter)
        return table

    def block_for(self, key) -> CayleyGraph:
        return self.blocks[self.keys.index(key)]

    def locate(self, points):
        points = np.asarray(points)
        b = np.searchsorted(self.offsets, points, side="right") - 1
        return b, points - self.offsets[b]

    def distance(self, x, y) -> np.ndarray:
        """Global metric on (arrays of) point indices."""
        bx, lx = self.locate(x)
        by, ly = self.locate(y)
        out = self.cross_table[bx, by].astype(np.int64)
        same = np.atleast_1d(bx == by)
        out = np.atleast_1d(out)
        bxa, lxa, lya = np.atleast_1d(bx), np.atleast_1d(lx), np.atleast_1d(ly)
        for b in np.unique(bxa[same]):
            sel = same & (bxa == b)
            out[sel] = self.blocks[b].distances[lxa[sel], lya[sel]]
        return out if np.ndim(x) else out[0]

    def triangle_check(self, samples: int = 10_000, seed: int = 0) -> dict:
        rng = np.random.default_rng(seed)
        x, y, z = rng.integers(self.size, size=(3, samples))
        dxy, dyz, dxz = self.distance(x, y), self.distance(y, z), self.distance(x, z)
        bad = int(np.sum(dxz > dxy + dyz))
        symmetric = bool(np.all(self.distance(y, x) == dxy))
        return {"samples": samples, "violations": bad, "symmetric": symmetric, "ok": bad == 0 and symmetric}


def coarse_union(blocks, keys=None, cross_distance=default_cross_distance) -> CoarseSpace:
    blocks = list(blocks)
    if not blocks:
        raise ValueError("coarse union of nothing")
    keys = list(range(len(blocks))) if keys is None else list(keys)
    return CoarseSpace(blocks, keys, cross_distance)


def family_space(family: QuotientFamily, levels=None) -> CoarseSpace:
    levels = list(range(len(family))) if levels is None else list(levels)
    return coarse_union([level_graph(family, n) for n in levels], keys=levels)


def bounded_geometry_check(space: CoarseSpace, r: float) -> int:
    """Largest cardinality of a closed ball of radius r."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    best = 0
    for i, block in enumerate(space.blocks):
        inner = int((block.distances <= r).sum(axis=1).max())
        outer = sum(b.order for j, b in enumerate(space.blocks) if j != i and space.cross_table[i, j] <= r)
        best = max(best, inner + outer)
    return best


@dataclass
class PropagationProfile:
    exact_propagation: float
    profile: list[tuple[float, float]]
    norm: str = "entry"

    def radius(self, eps: float) -> float:
        return dict(self.profile)[eps]


def _far_norms(matrix, graph, norm):
    """far[R] = size of the part of ``matrix`` between points farther apart than R."""
    n = graph.order
    d = matrix.shape[0] // n
    if d * n != matrix.shape[0]:
        raise ValueError("block size is not a multiple of the graph order")
    dist = graph.distances
    sub = matrix.reshape(n, d, n, d).transpose(0, 2, 1, 3)
    pair_norms = np.abs(sub[:, :, 0, 0]) if d == 1 else np.linalg.norm(sub, ord=2, axis=(2, 3))
    live = pair_norms > NONZERO_TOL
    exact = int(dist[live].max()) if live.any() else 0
    diam = graph.diameter
    far = np.zeros(diam + 1)
    if norm == "entry":
        by_distance = np.zeros(diam + 1)
        np.maximum.at(by_distance, dist.ravel(), pair_norms.ravel())
        for r in range(diam + 1):
            far[r] = by_distance[r + 1:].max(initial=0.0)
    elif norm == "operator":
        hermitian = np.allclose(matrix, matrix.conj().T)
        for r in range(diam):
            mask = np.repeat(np.repeat(dist > r, d, axis=0), d, axis=1)
            part = np.where(mask, matrix, 0)
            if hermitian:
                far[r] = np.abs(np.linalg.eigvalsh(part)).max()
            else:
                far[r] = np.linalg.norm(part, ord=2)
    else:
        raise ValueError(f"unknown norm {norm!r}")
    return exact, far


def block_propagation(matrix, graph: CayleyGraph, thresholds, norm: str = "entry") -> PropagationProfile:
    exact, far = _far_norms(np.asarray(matrix), graph, norm)
    profile = [(float(eps), float(np.argmax(far <= eps))) for eps in thresholds]
    return PropagationProfile(float(exact), profile, norm)


def propagation(op, space: CoarseSpace, thresholds, norm: str = "entry") -> PropagationProfile:
    """Propagation of a block operator on the truncated l2(X) ⊗ H.

    ``norm="entry"`` measures a truncation by the largest discarded
    point-pair sub-block (the uniform bound on matrix entries);
    ``norm="operator"`` by the operator norm of the discarded part.
    Off-diagonal level couplings are absent, so both reduce to a maximum
    over blocks.
    """
    per_block = [
        block_propagation(m, space.block_for(key[0]), thresholds, norm) for key, m in op.blocks.items()
    ]
    if not per_block:
        return PropagationProfile(0.0, [(float(e), 0.0) for e in thresholds], norm)
    exact = max(p.exact_propagation for p in per_block)
    profile = [(float(e), max(p.radius(float(e)) for p in per_block)) for e in thresholds]
    return PropagationProfile(exact, profile, norm)

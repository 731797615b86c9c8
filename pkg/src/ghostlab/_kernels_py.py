"""Pure numpy implementations of the compiled kernels (same API, same order)."""

import numpy as np


def closure(gens, cap):
    gens = np.ascontiguousarray(gens, dtype=np.int32)
    m, n = gens.shape
    ident = np.arange(n, dtype=np.int32)
    index = {ident.tobytes(): 0}
    rows = [ident]
    left = []
    frontier = np.array([0])
    while frontier.size:
        current = np.stack([rows[i] for i in frontier])
        # products[x, j] = gens[j] composed after current[x]
        products = gens[:, current].transpose(1, 0, 2)
        block = np.empty((len(frontier), m), dtype=np.int64)
        new = []
        for a in range(len(frontier)):
            for j in range(m):
                row = products[a, j]
                key = row.tobytes()
                idx = index.get(key)
                if idx is None:
                    if len(rows) >= cap:
                        raise OverflowError(f"closure exceeded cap={cap}")
                    idx = len(rows)
                    index[key] = idx
                    rows.append(row.copy())
                    new.append(idx)
                block[a, j] = idx
        left.append(block)
        frontier = np.array(new, dtype=np.int64)
    table = np.stack(rows).astype(np.int32)
    return table, np.concatenate(left).reshape(len(rows), m)


class RowIndex:
    def __init__(self, table):
        table = np.ascontiguousarray(table, dtype=np.int32)
        self._n = table.shape[1]
        self._index = {row.tobytes(): i for i, row in enumerate(table)}
        if len(self._index) != len(table):
            raise ValueError("duplicate row in table")

    def lookup(self, rows):
        rows = np.ascontiguousarray(rows, dtype=np.int32)
        if rows.shape[1] != self._n:
            raise ValueError("row width mismatch")
        get = self._index.get
        return np.fromiter((get(r.tobytes(), -1) for r in rows), dtype=np.int64, count=len(rows))


def bfs_distances(adjacency, sources):
    adjacency = np.asarray(adjacency, dtype=np.int64)
    sources = np.asarray(sources, dtype=np.int64)
    k = adjacency.shape[0]
    out = np.full((len(sources), k), -1, dtype=np.int32)
    for s, src in enumerate(sources):
        dist = out[s]
        dist[src] = 0
        frontier = np.array([src])
        level = 0
        while frontier.size:
            level += 1
            nbrs = np.unique(adjacency[frontier].ravel())
            nbrs = nbrs[dist[nbrs] < 0]
            dist[nbrs] = level
            frontier = nbrs
    return out

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: breadth-first closure, row lookup and BFS distances.

Group elements are encoded as rows of an int32 table, each row being the
element's action as a permutation of ``0..n-1``.  Composition is
``(a * b)[i] = a[b[i]]``.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint64_t
from libc.stdlib cimport malloc, calloc, free
from libc.string cimport memcmp, memcpy

cnp.import_array()


cdef inline uint64_t _hash_row(const int32_t* row, Py_ssize_t n) noexcept nogil:
    cdef uint64_t h = 1469598103934665603ULL
    cdef Py_ssize_t i
    for i in range(n):
        h ^= <uint64_t>(<uint64_t>row[i] * 0x9E3779B97F4A7C15ULL)
        h *= 1099511628211ULL
        h ^= h >> 29
    return h


cdef class _HashTable:
    """Open-addressing index over the rows of a growable int32 buffer."""
    cdef int32_t* rows
    cdef Py_ssize_t n, count, capacity
    cdef int64_t* slots
    cdef Py_ssize_t mask

    def __cinit__(self, Py_ssize_t n, Py_ssize_t capacity):
        self.n = n
        self.count = 0
        self.capacity = max(capacity, 16)
        self.rows = <int32_t*>malloc(self.capacity * max(n, 1) * sizeof(int32_t))
        cdef Py_ssize_t size = 32
        while size < 2 * self.capacity:
            size <<= 1
        self.mask = size - 1
        self.slots = <int64_t*>malloc(size * sizeof(int64_t))
        if self.rows == NULL or self.slots == NULL:
            raise MemoryError()
        cdef Py_ssize_t i
        for i in range(size):
            self.slots[i] = -1

    def __dealloc__(self):
        free(self.rows)
        free(self.slots)

    cdef int _grow(self) except -1:
        cdef Py_ssize_t new_cap = self.capacity * 2
        cdef int32_t* new_rows = <int32_t*>malloc(new_cap * max(self.n, 1) * sizeof(int32_t))
        if new_rows == NULL:
            raise MemoryError()
        memcpy(new_rows, self.rows, self.count * self.n * sizeof(int32_t))
        free(self.rows)
        self.rows = new_rows
        self.capacity = new_cap
        cdef Py_ssize_t size = (self.mask + 1) * 2
        cdef int64_t* new_slots = <int64_t*>malloc(size * sizeof(int64_t))
        if new_slots == NULL:
            raise MemoryError()
        cdef Py_ssize_t i, pos
        for i in range(size):
            new_slots[i] = -1
        free(self.slots)
        self.slots = new_slots
        self.mask = size - 1
        for i in range(self.count):
            pos = _hash_row(self.rows + i * self.n, self.n) & self.mask
            while self.slots[pos] >= 0:
                pos = (pos + 1) & self.mask
            self.slots[pos] = i
        return 0

    cdef inline int64_t find(self, const int32_t* row) noexcept nogil:
        cdef Py_ssize_t pos = _hash_row(row, self.n) & self.mask
        cdef int64_t idx
        while True:
            idx = self.slots[pos]
            if idx < 0:
                return -1
            if memcmp(self.rows + idx * self.n, row, self.n * sizeof(int32_t)) == 0:
                return idx
            pos = (pos + 1) & self.mask

    cdef int64_t insert(self, const int32_t* row) except -2:
        # caller guarantees the row is absent
        if self.count >= self.capacity:
            self._grow()
        memcpy(self.rows + self.count * self.n, row, self.n * sizeof(int32_t))
        cdef Py_ssize_t pos = _hash_row(row, self.n) & self.mask
        while self.slots[pos] >= 0:
            pos = (pos + 1) & self.mask
        self.slots[pos] = self.count
        self.count += 1
        return self.count - 1

    cdef object to_array(self):
        out = np.empty((self.count, self.n), dtype=np.int32)
        cdef int32_t[:, ::1] view = out
        if self.count and self.n:
            memcpy(&view[0, 0], self.rows, self.count * self.n * sizeof(int32_t))
        return out


def closure(cnp.ndarray gens, Py_ssize_t cap):
    """Enumerate the group generated by the rows of ``gens``.

    Returns ``(table, left)`` where ``table`` lists elements in BFS order
    (identity first, then by word length, ties by discovery order) and
    ``left[x, j]`` is the index of ``gens[j] * table[x]``.  Raises
    ``OverflowError`` if more than ``cap`` elements appear.
    """
    cdef int32_t[:, ::1] g = np.ascontiguousarray(gens, dtype=np.int32)
    cdef Py_ssize_t m = g.shape[0], n = g.shape[1]
    cdef Py_ssize_t est = min(cap, 1024)
    cdef _HashTable ht = _HashTable(n, est)
    cdef int32_t* ident = <int32_t*>malloc(max(n, 1) * sizeof(int32_t))
    cdef int32_t* tmp = <int32_t*>malloc(max(n, 1) * sizeof(int32_t))
    cdef Py_ssize_t i, j, head = 0
    cdef int64_t idx
    cdef const int32_t* x
    left_arr = np.empty((est, m), dtype=np.int64)
    cdef int64_t[:, ::1] left = left_arr
    try:
        for i in range(n):
            ident[i] = <int32_t>i
        ht.insert(ident)
        while head < ht.count:
            if head >= left.shape[0]:
                grown = np.empty((2 * left.shape[0], m), dtype=np.int64)
                grown[:head] = left_arr[:head]
                left_arr = grown
                left = left_arr
            for j in range(m):
                x = ht.rows + head * n
                for i in range(n):
                    tmp[i] = g[j, x[i]]
                idx = ht.find(tmp)
                if idx < 0:
                    if ht.count >= cap:
                        raise OverflowError(f"closure exceeded cap={cap}")
                    idx = ht.insert(tmp)
                left[head, j] = idx
            head += 1
    finally:
        free(ident)
        free(tmp)
    table = ht.to_array()
    left_out = np.ascontiguousarray(left_arr[:head])
    return table, left_out


cdef class RowIndex:
    """Hash lookup from encoded rows to their position in a table."""
    cdef _HashTable ht

    def __init__(self, cnp.ndarray table):
        cdef int32_t[:, ::1] t = np.ascontiguousarray(table, dtype=np.int32)
        cdef Py_ssize_t k = t.shape[0], n = t.shape[1], i
        self.ht = _HashTable(n, max(k, 1))
        for i in range(k):
            if self.ht.find(&t[i, 0]) >= 0:
                raise ValueError("duplicate row in table")
            self.ht.insert(&t[i, 0])

    def lookup(self, rows):
        """Positions of ``rows`` (2-D) in the table, -1 where absent."""
        cdef int32_t[:, ::1] r = np.ascontiguousarray(rows, dtype=np.int32)
        out = np.empty(r.shape[0], dtype=np.int64)
        cdef int64_t[::1] o = out
        cdef Py_ssize_t i
        if r.shape[1] != self.ht.n:
            raise ValueError("row width mismatch")
        with nogil:
            for i in range(r.shape[0]):
                o[i] = self.ht.find(&r[i, 0])
        return out


def bfs_distances(adjacency, sources):
    """Graph distances from each source; ``adjacency[x]`` lists neighbours.

    Unreachable vertices get -1.
    """
    cdef int64_t[:, ::1] adj = np.ascontiguousarray(adjacency, dtype=np.int64)
    cdef int64_t[::1] src = np.ascontiguousarray(sources, dtype=np.int64)
    cdef Py_ssize_t k = adj.shape[0], deg = adj.shape[1], s, head, tail, j
    out = np.full((src.shape[0], k), -1, dtype=np.int32)
    cdef int32_t[:, ::1] dist = out
    cdef int64_t* queue = <int64_t*>malloc(max(k, 1) * sizeof(int64_t))
    cdef int64_t x, y
    if queue == NULL:
        raise MemoryError()
    try:
        with nogil:
            for s in range(src.shape[0]):
                head = 0
                tail = 1
                queue[0] = src[s]
                dist[s, src[s]] = 0
                while head < tail:
                    x = queue[head]
                    head += 1
                    for j in range(deg):
                        y = adj[x, j]
                        if dist[s, y] < 0:
                            dist[s, y] = dist[s, x] + 1
                            queue[tail] = y
                            tail += 1
    finally:
        free(queue)
    return out

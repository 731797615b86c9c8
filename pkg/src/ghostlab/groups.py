"""Finite group arithmetic: elements, BFS closure, quotient families, product images.

Every element is encoded as its action on a finite point set, so one closure
kernel serves permutations, matrices over Z/pZ (acting on column vectors of
F_p^k) and pairs (acting on the disjoint union of the two point sets).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .errors import CapExceeded, MixedKinds, NotPrime, NotSymmetric

DEFAULT_CAP = 250_000
MULTIPLICATION_TABLE_LIMIT = 20_000


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, int(n**0.5) + 1):
        if n % d == 0:
            return False
    return True


def _mat_mul(a, b, p):
    k = len(a)
    return tuple(
        tuple(sum(a[i][t] * b[t][j] for t in range(k)) % p for j in range(k)) for i in range(k)
    )


def _mat_det(rows, p):
    """Determinant mod p by Gaussian elimination."""
    m = [list(r) for r in rows]
    k = len(m)
    det = 1
    for c in range(k):
        pivot = next((r for r in range(c, k) if m[r][c] % p), None)
        if pivot is None:
            return 0
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            det = -det
        det = det * m[c][c] % p
        inv = pow(m[c][c], -1, p)
        for r in range(c + 1, k):
            f = m[r][c] * inv % p
            for j in range(c, k):
                m[r][j] = (m[r][j] - f * m[c][j]) % p
    return det % p


def _mat_inverse(rows, p):
    k = len(rows)
    m = [list(r) + [int(i == j) for j in range(k)] for i, r in enumerate(rows)]
    for c in range(k):
        pivot = next(r for r in range(c, k) if m[r][c] % p)
        m[c], m[pivot] = m[pivot], m[c]
        inv = pow(m[c][c], -1, p)
        m[c] = [x * inv % p for x in m[c]]
        for r in range(k):
            if r != c and m[r][c]:
                f = m[r][c]
                m[r] = [(x - f * y) % p for x, y in zip(m[r], m[c])]
    return tuple(tuple(row[k:]) for row in m)


def npoints(signature) -> int:
    kind = signature[0]
    if kind == "perm":
        return signature[1]
    if kind == "mat":
        return signature[2] ** signature[1]
    return npoints(signature[1]) + npoints(signature[2])


@dataclass(frozen=True)
class GroupElement:
    """A permutation of {0..n-1}, an invertible matrix over Z/pZ, or a pair."""

    kind: str
    payload: tuple
    modulus: int = 0

    @classmethod
    def perm(cls, images) -> GroupElement:
        images = tuple(int(x) for x in images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a bijection of 0..{len(images) - 1}: {images}")
        return cls("perm", images)

    @classmethod
    def from_cycles(cls, cycles, degree: int) -> GroupElement:
        images = list(range(degree))
        for cycle in cycles:
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                images[a] = b
        return cls.perm(images)

    @classmethod
    def matrix(cls, rows, p: int) -> GroupElement:
        if not is_prime(p):
            raise NotPrime(f"modulus {p} is not prime")
        rows = tuple(tuple(int(x) % p for x in r) for r in rows)
        if any(len(r) != len(rows) for r in rows):
            raise ValueError("matrix must be square")
        if _mat_det(rows, p) == 0:
            raise ValueError("matrix is singular mod p")
        return cls("mat", rows, p)

    @classmethod
    def pair(cls, a: GroupElement, b: GroupElement) -> GroupElement:
        return cls("pair", (a, b))

    @property
    def signature(self):
        if self.kind == "perm":
            return ("perm", len(self.payload))
        if self.kind == "mat":
            return ("mat", len(self.payload), self.modulus)
        return ("pair", self.payload[0].signature, self.payload[1].signature)

    def identity(self) -> GroupElement:
        return identity_of(self.signature)

    @property
    def is_identity(self) -> bool:
        return self == self.identity()

    def __mul__(self, other: GroupElement) -> GroupElement:
        if self.signature != other.signature:
            raise MixedKinds(f"cannot multiply {self.signature} by {other.signature}")
        if self.kind == "perm":
            a = self.payload
            return GroupElement("perm", tuple(a[i] for i in other.payload))
        if self.kind == "mat":
            return GroupElement("mat", _mat_mul(self.payload, other.payload, self.modulus), self.modulus)
        return GroupElement(
            "pair", (self.payload[0] * other.payload[0], self.payload[1] * other.payload[1])
        )

    def inverse(self) -> GroupElement:
        if self.kind == "perm":
            inv = [0] * len(self.payload)
            for i, x in enumerate(self.payload):
                inv[x] = i
            return GroupElement("perm", tuple(inv))
        if self.kind == "mat":
            return GroupElement("mat", _mat_inverse(self.payload, self.modulus), self.modulus)
        return GroupElement("pair", (self.payload[0].inverse(), self.payload[1].inverse()))

    def sign(self) -> int:
        if self.kind != "perm":
            raise TypeError("sign is defined for permutations only")
        seen = [False] * len(self.payload)
        parity = 0
        for start in range(len(self.payload)):
            length = 0
            x = start
            while not seen[x]:
                seen[x] = True
                x = self.payload[x]
                length += 1
            if length:
                parity += length - 1
        return -1 if parity % 2 else 1

    def action(self) -> np.ndarray:
        """The element as a permutation of its point set (int32 row)."""
        if self.kind == "perm":
            return np.array(self.payload, dtype=np.int32)
        if self.kind == "mat":
            p, k = self.modulus, len(self.payload)
            m = np.array(self.payload, dtype=np.int64)
            vecs = _all_vectors(k, p)
            images = (vecs @ m.T) % p
            return (images @ (p ** np.arange(k))).astype(np.int32)
        a, b = self.payload
        return np.concatenate([a.action(), b.action() + npoints(a.signature)]).astype(np.int32)

    @staticmethod
    def from_action(signature, row) -> GroupElement:
        kind = signature[0]
        if kind == "perm":
            return GroupElement("perm", tuple(int(x) for x in row))
        if kind == "mat":
            _, k, p = signature
            cols = []
            for j in range(k):
                code = int(row[p**j])
                cols.append([(code // p**i) % p for i in range(k)])
            return GroupElement("mat", tuple(tuple(cols[j][i] for j in range(k)) for i in range(k)), p)
        na = npoints(signature[1])
        a = GroupElement.from_action(signature[1], row[:na])
        b = GroupElement.from_action(signature[2], np.asarray(row[na:]) - na)
        return GroupElement("pair", (a, b))

    def __repr__(self):
        if self.kind == "perm":
            return f"Perm{self.payload}"
        if self.kind == "mat":
            return f"Mat{self.payload} mod {self.modulus}"
        return f"Pair({self.payload[0]!r}, {self.payload[1]!r})"


def _all_vectors(k, p):
    # row i holds the base-p digits of i, least significant first
    idx = np.arange(p**k)
    return np.stack([(idx // p**i) % p for i in range(k)], axis=1)


def identity_of(signature) -> GroupElement:
    kind = signature[0]
    if kind == "perm":
        return GroupElement("perm", tuple(range(signature[1])))
    if kind == "mat":
        _, k, p = signature
        return GroupElement("mat", tuple(tuple(int(i == j) for j in range(k)) for i in range(k)), p)
    return GroupElement("pair", (identity_of(signature[1]), identity_of(signature[2])))


class FiniteGroup:
    """An enumerated finite group.

    Elements live in ``table`` (one encoded action per row) in deterministic
    BFS order, identity at index 0.  ``left[x, j]`` is the index of
    ``generators[j] * element(x)``.  Groups built by :func:`product_image`
    also carry ``factors`` and ``coords`` (per-element coordinate indices).
    """

    def __init__(self, generators, table, left, signature, factors=None, coords=None):
        self.generators = list(generators)
        self.table = table
        self.left = left
        self.signature = signature
        self.factors = factors
        self.coords = coords
        self._row_index = kernels.RowIndex(table)

    def __repr__(self):
        return f"FiniteGroup(order={self.order}, signature={self.signature})"

    def __len__(self):
        return self.order

    @property
    def order(self) -> int:
        return len(self.table)

    @cached_property
    def elements(self) -> list[GroupElement]:
        return [GroupElement.from_action(self.signature, row) for row in self.table]

    def element(self, i: int) -> GroupElement:
        return GroupElement.from_action(self.signature, self.table[i])

    def lookup(self, rows) -> np.ndarray:
        return self._row_index.lookup(np.atleast_2d(rows))

    def index(self, g: GroupElement) -> int:
        if g.signature != self.signature:
            raise MixedKinds(f"{g.signature} is not in a group of {self.signature}")
        i = int(self.lookup(g.action())[0])
        if i < 0:
            raise KeyError(f"{g!r} is not an element of this group")
        return i

    def __contains__(self, g: GroupElement) -> bool:
        try:
            self.index(g)
        except (KeyError, MixedKinds):
            return False
        return True

    @property
    def gen_indices(self) -> np.ndarray:
        return self.left[0]

    def compose(self, a, b) -> np.ndarray:
        """Indices of a*b for (broadcast) index arrays a, b."""
        a, b = np.broadcast_arrays(np.asarray(a), np.asarray(b))
        ta = self.table[a.ravel()]
        tb = self.table[b.ravel()]
        rows = np.take_along_axis(ta, tb.astype(np.intp), axis=1)
        return self.lookup(rows).reshape(a.shape)

    @cached_property
    def inverses(self) -> np.ndarray:
        rows = np.argsort(self.table, axis=1).astype(np.int32)
        return self.lookup(rows)

    def left_translation(self, g: int) -> np.ndarray:
        """Array h -> index(g*h)."""
        rows = self.table[g][self.table]
        return self.lookup(rows)

    def multiplication_table(self) -> np.ndarray:
        """``mt[g, h]`` = index of g*h.  Refuses for very large groups."""
        if self.order > MULTIPLICATION_TABLE_LIMIT:
            raise MemoryError(f"multiplication table of order {self.order} refused")
        if not hasattr(self, "_mt"):
            self._mt = np.stack([self.left_translation(g) for g in range(self.order)])
        return self._mt

    @cached_property
    def bfs_parents(self):
        """(parent, generator) of each element in the closure's BFS tree."""
        flat = self.left.ravel()
        seen, first = np.unique(flat, return_index=True)
        firsts = np.full(self.order, -1, dtype=np.int64)
        firsts[seen] = first
        m = self.left.shape[1]
        parent = np.where(firsts >= 0, firsts // max(m, 1), -1)
        gen = np.where(firsts >= 0, firsts % max(m, 1), -1)
        parent[0] = -1
        gen[0] = -1
        return parent, gen


def generate_closure(gens, cap: int = DEFAULT_CAP) -> FiniteGroup:
    """Enumerate the group generated by ``gens`` breadth-first.

    Order: identity, then by word length, ties broken by discovery order
    (element in queue order, then generator in list order).
    """
    gens = list(gens)
    if not gens:
        raise ValueError("need at least one generator")
    if cap < 1:
        raise ValueError("cap must be positive")
    signature = gens[0].signature
    for g in gens[1:]:
        if g.signature != signature:
            raise MixedKinds(f"generators mix {signature} and {g.signature}")
    encoded = np.stack([g.action() for g in gens])
    try:
        table, left = kernels.closure(encoded, cap)
    except OverflowError:
        raise CapExceeded(f"group generated exceeds cap={cap}") from None
    return FiniteGroup(gens, table, left, signature)


@dataclass(frozen=True)
class GeneratorSymbolSet:
    """Abstract symbols 0..size-1 with an involutive formal-inverse pairing."""

    pairing: tuple[int, ...]

    def __post_init__(self):
        pairing = tuple(int(x) for x in self.pairing)
        object.__setattr__(self, "pairing", pairing)
        n = len(pairing)
        if n == 0:
            raise ValueError("symbol set is empty")
        for s, t in enumerate(pairing):
            if not 0 <= t < n or pairing[t] != s:
                raise ValueError(f"pairing is not an involution at symbol {s}")

    @property
    def size(self) -> int:
        return len(self.pairing)

    def inverse(self, s: int) -> int:
        return self.pairing[s]


@dataclass
class Level:
    label: str
    images: tuple[GroupElement, ...]
    group: FiniteGroup

    @property
    def symbol_indices(self) -> np.ndarray:
        """Element indices of the symbol images (in symbol order)."""
        return self.group.gen_indices


@dataclass
class QuotientFamily:
    """Generator symbols of Gamma and, per level N, their images in G_N."""

    symbols: GeneratorSymbolSet
    levels: list[Level] = field(default_factory=list)
    name: str = ""

    @classmethod
    def build(cls, symbols, labelled_images, cap=DEFAULT_CAP, name="") -> QuotientFamily:
        """``labelled_images``: iterable of (label, images-per-symbol)."""
        levels = []
        for label, images in labelled_images:
            images = tuple(images)
            if len(images) != symbols.size:
                raise ValueError(f"level {label}: {len(images)} images for {symbols.size} symbols")
            levels.append(Level(label, images, generate_closure(images, cap)))
        return cls(symbols, levels, name)

    def __len__(self):
        return len(self.levels)

    @property
    def orders(self) -> list[int]:
        return [lv.group.order for lv in self.levels]

    @property
    def labels(self) -> list[str]:
        return [lv.label for lv in self.levels]


def word_image(family: QuotientFamily, level: int, word) -> GroupElement:
    lv = family.levels[level]
    result = identity_of(lv.group.signature)
    for s in word:
        if not 0 <= s < family.symbols.size:
            raise IndexError(f"symbol {s} out of range")
        result = result * lv.images[s]
    return result


def product_image(family: QuotientFamily, level_a: int, level_b: int, cap: int = DEFAULT_CAP) -> FiniteGroup:
    """Gamma/(N_a ∩ N_b): the subgroup of G_a x G_b generated by symbol pairs."""
    if level_a == level_b:
        raise ValueError("product_image needs two distinct levels")
    la, lb = family.levels[level_a], family.levels[level_b]
    gens = [GroupElement.pair(a, b) for a, b in zip(la.images, lb.images)]
    group = generate_closure(gens, cap)
    na = npoints(la.group.signature)
    coords = np.stack(
        [la.group.lookup(group.table[:, :na]), lb.group.lookup(group.table[:, na:] - na)], axis=1
    )
    group.factors = (la.group, lb.group)
    group.coords = coords
    return group


def kernel_fiber_indices(product: FiniteGroup, coordinate: int) -> np.ndarray:
    if product.coords is None:
        raise ValueError("not a product_image group")
    return np.flatnonzero(product.coords[:, coordinate] == 0)


def kernel_fiber(product: FiniteGroup, coordinate: int) -> list[GroupElement]:
    """Elements of the product whose ``coordinate`` entry is the identity."""
    return [product.element(i) for i in kernel_fiber_indices(product, coordinate)]


def check_symmetric(family: QuotientFamily) -> dict:
    """Confirm every level's images are closed under inversion via the pairing."""
    for li, lv in enumerate(family.levels):
        for s, img in enumerate(lv.images):
            t = family.symbols.inverse(s)
            if lv.images[t] != img.inverse():
                raise NotSymmetric(
                    f"level {lv.label!r}: image of symbol {t} is not the inverse of symbol {s}",
                    level=li,
                    symbol=s,
                )
    return {"symmetric": True, "levels": family.labels, "symbols": family.symbols.size}


def index_growth(family: QuotientFamily) -> dict:
    """Index sequence [Gamma:N] over the window; reported, never extrapolated."""
    orders = family.orders
    increasing = all(a < b for a, b in itertools.pairwise(orders))
    return {"orders": orders, "strictly_increasing": increasing}

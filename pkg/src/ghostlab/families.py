"""Preset quotient families and irreducible-representation selection policies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentArity, MixedKinds, NotGenerating, NotIrreducible, NotPrime, NotSymmetric
from .groups import (
    DEFAULT_CAP,
    FiniteGroup,
    GeneratorSymbolSet,
    GroupElement,
    QuotientFamily,
    check_symmetric,
    is_prime,
)
from .reps import Representation, deleted_permutation_rep, is_irreducible, trivial_representation

POLICIES = ("steinberg", "deleted-natural", "trivial", "custom")
KINDS = ("sl2", "alt", "product", "complete")

# symbols: a, a^-1, b, b^-1
PAIRED_FOUR = GeneratorSymbolSet((1, 0, 3, 2))


@dataclass
class FamilySpec:
    kind: str
    primes: list[int] = field(default_factory=list)
    degrees: list[int] = field(default_factory=list)
    orders: list[int] = field(default_factory=list)
    preset: str = ""
    policy: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown family kind {self.kind!r}; expected one of {KINDS}")
        if self.policy and self.policy not in POLICIES:
            raise ValueError(f"unknown irrep policy {self.policy!r}")
        if self.kind == "sl2" and not self.primes:
            raise ValueError("sl2 family needs primes")
        if self.kind == "alt":
            if not self.degrees:
                raise ValueError("alt family needs degrees")
            if any(n < 3 for n in self.degrees):
                raise ValueError("alternating degrees must be at least 3")
        if self.kind == "complete" and len(self.orders) != 1:
            raise ValueError("complete family needs exactly one order")

    @property
    def default_policy(self) -> str:
        return self.policy or {"sl2": "steinberg", "alt": "deleted-natural", "product": "deleted-natural",
                               "complete": "trivial"}[self.kind]


def build_family(spec: FamilySpec, cap: int = DEFAULT_CAP) -> QuotientFamily:
    if spec.kind == "sl2":
        return sl2_family(spec.primes, cap=cap)
    if spec.kind == "alt":
        return alt_family(spec.degrees, cap=cap)
    if spec.kind == "complete":
        return complete_family(spec.orders[0])
    if spec.preset not in PRODUCT_PRESETS:
        raise ValueError(f"unknown product preset {spec.preset!r}; available: {sorted(PRODUCT_PRESETS)}")
    return PRODUCT_PRESETS[spec.preset](cap=cap)


def sl2_family(primes, cap: int = DEFAULT_CAP) -> QuotientFamily:
    """SL(2,p) quotients with the elementary generators and their inverses."""
    primes = [int(p) for p in primes]
    for p in primes:
        if not is_prime(p):
            raise NotPrime(f"{p} is not prime")
        if p < 3:
            raise ValueError("primes must be at least 3")
    if primes != sorted(set(primes)):
        raise ValueError("primes must be distinct and ascending")
    levels = []
    for p in primes:
        e = GroupElement.matrix([[1, 1], [0, 1]], p)
        f = GroupElement.matrix([[1, 0], [1, 1]], p)
        levels.append((f"SL(2,{p})", [e, e.inverse(), f, f.inverse()]))
    family = QuotientFamily.build(PAIRED_FOUR, levels, cap=cap, name="sl2")
    for p, lv in zip(primes, family.levels):
        if lv.group.order != p * (p * p - 1):
            raise NotGenerating(f"{lv.label}: closure has order {lv.group.order}")
    return family


def default_alt_generators(n: int) -> list[GroupElement]:
    """(0 1 2), its inverse, and c, c^-1 with c an odd-length cycle.

    c is the n-cycle for odd n and the (n-1)-cycle (1 .. n-1) for even n.
    This is a convention; any even generating set works.
    """
    t = GroupElement.from_cycles([[0, 1, 2]], n)
    cycle = list(range(n)) if n % 2 else list(range(1, n))
    c = GroupElement.from_cycles([cycle], n)
    return [t, t.inverse(), c, c.inverse()]


def alt_family(degrees, gens=None, pairing=PAIRED_FOUR, cap: int = DEFAULT_CAP) -> QuotientFamily:
    """Alternating groups Alt(n) for each degree.

    ``gens`` maps a degree to its generator images (default
    :func:`default_alt_generators`).  Expansion is not guaranteed for these
    small generating sets; gaps are measured, not assumed.
    """
    degrees = [int(n) for n in degrees]
    if any(n < 4 for n in degrees) or degrees != sorted(set(degrees)):
        raise ValueError("degrees must be distinct, ascending and at least 4")
    gens = gens or default_alt_generators
    levels = []
    for n in degrees:
        images = list(gens(n))
        odd = [g for g in images if g.sign() != 1]
        if odd:
            raise NotGenerating(f"Alt({n}): odd generator {odd[0]!r}")
        levels.append((f"Alt({n})", images))
    family = QuotientFamily.build(pairing, levels, cap=cap, name="alt")
    for n, lv in zip(degrees, family.levels):
        if lv.group.order != math.factorial(n) // 2:
            raise NotGenerating(f"{lv.label}: generators give order {lv.group.order}, not {math.factorial(n) // 2}")
    return family


def _infer_pairing(tuples) -> GeneratorSymbolSet:
    inverses = [tuple(g.inverse() for g in row) for row in tuples]
    pairing = []
    for s, row in enumerate(tuples):
        candidates = [t for t, other in enumerate(tuples) if tuple(other) == inverses[s]]
        if not candidates:
            raise NotSymmetric(f"symbol {s} has no inverse symbol", symbol=s)
        # prefer self-pairing for involutions
        t = s if s in candidates else candidates[0]
        pairing.append(t)
    for s, t in enumerate(pairing):
        if pairing[t] != s:
            raise NotSymmetric(f"cannot infer an involutive pairing at symbol {s}", symbol=s)
    return GeneratorSymbolSet(tuple(pairing))


def product_subgroup_family(tuples, pairing=None, labels=None, orders=None, cap: int = DEFAULT_CAP,
                            name: str = "product") -> QuotientFamily:
    """Family from generator tuples of Gamma inside a product of finite groups.

    ``tuples[s][n]`` is the image of symbol s in the n-th factor.  When
    ``orders`` is given, each level must generate a group of that order.
    """
    tuples = [list(row) for row in tuples]
    if not tuples:
        raise InconsistentArity("no symbols")
    nlevels = len(tuples[0])
    if nlevels == 0 or any(len(row) != nlevels for row in tuples):
        raise InconsistentArity("every symbol needs one image per level")
    for n in range(nlevels):
        sig = tuples[0][n].signature
        if any(row[n].signature != sig for row in tuples):
            raise MixedKinds(f"level {n} mixes element kinds")
    symbols = GeneratorSymbolSet(tuple(pairing)) if pairing is not None else _infer_pairing(tuples)
    labels = labels or [f"G{n + 1}" for n in range(nlevels)]
    family = QuotientFamily.build(
        symbols, [(labels[n], [row[n] for row in tuples]) for n in range(nlevels)], cap=cap, name=name
    )
    check_symmetric(family)
    if orders is not None:
        for lv, want in zip(family.levels, orders):
            if lv.group.order != want:
                raise NotGenerating(f"{lv.label}: generators give order {lv.group.order}, expected {want}")
    return family


def mixed_small_family(cap: int = DEFAULT_CAP) -> QuotientFamily:
    """Sym(2), Sym(3), Alt(4), Alt(5) under one symbol set.

    Small levels next to levels with larger irreducibles, so that
    dim(H_M) > |G_N| actually occurs inside the window.
    """
    def cyc(cycles, n):
        return GroupElement.from_cycles(cycles, n)

    a = [cyc([[0, 1]], 2), cyc([[0, 1]], 3), cyc([[0, 1, 2]], 4), cyc([[0, 1, 2]], 5)]
    b = [cyc([[0, 1]], 2), cyc([[0, 1, 2]], 3), cyc([[1, 2, 3]], 4), cyc([[0, 1, 2, 3, 4]], 5)]
    tuples = [a, [g.inverse() for g in a], b, [g.inverse() for g in b]]
    return product_subgroup_family(
        tuples, pairing=PAIRED_FOUR.pairing, labels=["Sym(2)", "Sym(3)", "Alt(4)", "Alt(5)"],
        orders=[2, 6, 12, 60], cap=cap, name="mixed",
    )


def complete_family(n: int) -> QuotientFamily:
    """Z/n with every non-identity rotation as a symbol: the Cayley graph is K_n."""
    if n < 2:
        raise ValueError("need n >= 2")
    rotations = [GroupElement.perm([(i + k) % n for i in range(n)]) for k in range(1, n)]
    pairing = GeneratorSymbolSet(tuple(n - 2 - s for s in range(n - 1)))
    return QuotientFamily.build(pairing, [(f"Z/{n}", rotations)], name="complete")


PRODUCT_PRESETS = {"mixed": mixed_small_family}


def projective_line_action(group: FiniteGroup, p: int) -> np.ndarray:
    """Action of a 2x2 matrix group over F_p on the p+1 points of P^1(F_p).

    Point x < p is the line through (x, 1); point p is the line through (1, 0).
    """
    if group.signature != ("mat", 2, p):
        raise ValueError(f"need a group of 2x2 matrices mod {p}")
    # vector (v0, v1) is encoded as v0 + p*v1
    reps = np.array([x + p for x in range(p)] + [1])
    codes = group.table[:, reps]
    u, v = codes % p, codes // p
    inv = np.array([0] + [pow(int(t), -1, p) for t in range(1, p)])
    return np.where(v != 0, (u * inv[v]) % p, p)


def steinberg_rep(group: FiniteGroup, p: int) -> Representation:
    """The p-dimensional Steinberg representation of SL(2,p)."""
    rep = deleted_permutation_rep(group, projective_line_action(group, p))
    rep.label = f"steinberg({p})"
    if not is_irreducible(rep):
        raise NotIrreducible(f"Steinberg candidate for p={p} is reducible")
    return rep


def choose_irrep(group: FiniteGroup, policy: str, action=None) -> Representation:
    """Pick an irreducible representation of one level per ``policy``."""
    if policy == "steinberg":
        if group.signature[:2] != ("mat", 2):
            raise NotIrreducible("steinberg policy needs an SL(2,p) level")
        return steinberg_rep(group, group.signature[2])
    if policy == "trivial":
        return trivial_representation(group)
    if policy == "deleted-natural":
        if group.signature[0] != "perm":
            raise NotIrreducible("deleted-natural policy needs a permutation group")
        rep = deleted_permutation_rep(group, group.table)
        rep.label = f"deleted-natural({group.signature[1]})"
    elif policy == "custom":
        if action is None:
            raise ValueError("custom policy needs an action")
        rep = deleted_permutation_rep(group, action)
        rep.label = "custom"
    else:
        raise ValueError(f"unknown policy {policy!r}")
    if not is_irreducible(rep):
        raise NotIrreducible(f"{rep.label} is reducible for a group of order {group.order}")
    return rep

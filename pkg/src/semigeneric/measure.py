"""Cylinder events over the expansions of a finite member of S, the uniform
measure on them, and exact or sampled evaluation on finite structures.

A U-cylinder fixes the relative order of the columns of a few base points
together with R on those points (``eps`` bit 1 means R(x_k, x_l) iff
x_k -> x_l, bit 0 means R(x_k, x_l) iff not x_k -> x_l).  A V-cylinder fixes
the order of a tuple of points inside each of several columns.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import SemiDigraph, same_class
from .errors import ColumnMismatch, InconsistentCylinders, ScaleExceeded, UnknownVertex
from .instances import as_rng
from .star import StarExpansion, enumerate_expansions

Rat = Fraction


def pair_index(i: int, j: int, n: int) -> int:
    """Position of the pair (i, j), i < j, in itertools.combinations(range(n), 2)."""
    return i * n - i * (i + 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class UCylinder:
    points: tuple[int, ...]
    eps: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "eps", tuple(int(b) for b in self.eps))
        if len(self.eps) != math.comb(len(self.points), 2):
            raise ValueError("eps needs one bit per pair of base points")
        if len(set(self.points)) != len(self.points):
            raise InconsistentCylinders("repeated base point")

    @classmethod
    def of(cls, points: Sequence[int], eps: Mapping[tuple[int, int], int] | Sequence[int] = ()) -> "UCylinder":
        n = len(points)
        if isinstance(eps, Mapping):
            eps = [eps[pair] for pair in itertools.combinations(range(n), 2)]
        return cls(tuple(points), tuple(eps))

    def bit(self, i: int, j: int) -> int:
        return self.eps[pair_index(i, j, len(self.points))]

    def check_columns(self, g: SemiDigraph) -> None:
        cols = [g.column_index(x) for x in self.points]
        if len(set(cols)) != len(cols):
            raise InconsistentCylinders("base points must lie in distinct columns")

    def to_json(self) -> dict:
        return {"points": list(self.points), "eps": list(self.eps)}


@dataclass(frozen=True)
class VCylinder:
    tuples: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tuples", tuple(tuple(t) for t in self.tuples))
        flat = [v for t in self.tuples for v in t]
        if len(set(flat)) != len(flat):
            raise InconsistentCylinders("a vertex appears twice in the V-part")

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(t) for t in self.tuples)

    def check_columns(self, g: SemiDigraph) -> None:
        seen = set()
        for t in self.tuples:
            cols = {g.column_index(v) for v in t}
            if len(cols) > 1:
                raise InconsistentCylinders(f"tuple {t} spans several columns")
            if cols & seen:
                raise InconsistentCylinders("two tuples share a column")
            seen |= cols

    def to_json(self) -> dict:
        return {"tuples": [list(t) for t in self.tuples]}


@dataclass(frozen=True)
class Cylinder:
    """A set of the generating family: U-part and/or V-part (None = no constraint)."""

    u: UCylinder | None = None
    v: VCylinder | None = None

    def contains(self, e: StarExpansion) -> bool:
        return (self.u is None or in_U(e, self.u)) and (self.v is None or in_V(e, self.v))


# -- membership -----------------------------------------------------------


def in_U(e: StarExpansion, u: UCylinder) -> bool:
    g = e.base
    rank = e.column_rank
    ranks = [rank[g.column_index(x)] for x in u.points]
    if any(a >= b for a, b in zip(ranks, ranks[1:])):
        return False
    R = e.R
    for (i, j), bit in zip(itertools.combinations(range(len(u.points)), 2), u.eps):
        a, b = u.points[i], u.points[j]
        if ((a, b) in R) != (g.arrow(a, b) == bool(bit)):
            return False
    return True


def in_V(e: StarExpansion, v: VCylinder) -> bool:
    pos = e.position
    return all(pos[a] < pos[b] for t in v.tuples for a, b in zip(t, t[1:]))


def cylinder_of(e: StarExpansion, points: Iterable[int]) -> UCylinder:
    """The unique U-cylinder over ``points`` (in some order) containing ``e``."""
    g = e.base
    rank = e.column_rank
    ordered = tuple(sorted(points, key=lambda x: rank[g.column_index(x)]))
    R = e.R
    eps = tuple(
        int(((a, b) in R) == g.arrow(a, b)) for a, b in itertools.combinations(ordered, 2)
    )
    return UCylinder(ordered, eps)


# -- the uniform measure ---------------------------------------------------


def mu0_U(n: int) -> Fraction:
    """1 / (n! 2^C(n, 2))."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return Fraction(1, math.factorial(n) * 2 ** math.comb(n, 2))


def mu0_V(sizes: Iterable[int]) -> Fraction:
    """1 / prod(i_j!)."""
    sizes = list(sizes)
    if any(s < 1 for s in sizes):
        raise ValueError("tuple sizes must be positive")
    return Fraction(1, math.prod(math.factorial(s) for s in sizes))


def mu0_cyl(u: UCylinder | None = None, v: VCylinder | None = None, g: SemiDigraph | None = None) -> Fraction:
    """Uniform measure of U ∩ V.

    Within-column orders are independent of the column order and of R, so a
    V-tuple sitting in a U-column still contributes its own 1/i! factor;
    singleton tuples contribute 1.  With ``g`` given, column constraints of
    both parts are checked.
    """
    if g is not None:
        if u is not None:
            u.check_columns(g)
        if v is not None:
            v.check_columns(g)
    value = Fraction(1)
    if u is not None:
        value *= mu0_U(len(u.points))
    if v is not None:
        value *= mu0_V(v.sizes)
    return value


# -- exact counting ----------------------------------------------------------


def brute_measure(
    g: SemiDigraph,
    u: UCylinder | None = None,
    v: VCylinder | None = None,
    expansions: Sequence[StarExpansion] | None = None,
    max_expansions: int = 500_000,
) -> Fraction:
    """Fraction of the expansions of ``g`` lying in U ∩ V, by enumeration."""
    for part in (u, v):
        if part is not None:
            for x in (part.points if isinstance(part, UCylinder) else [w for t in part.tuples for w in t]):
                if x not in g:
                    raise UnknownVertex(x)
    if expansions is None:
        expansions = enumerate_expansions(g, max_expansions)
    cyl = Cylinder(u, v)
    hits = sum(1 for e in expansions if cyl.contains(e))
    return Fraction(hits, len(expansions))


def brute_counts(expansions: Sequence[StarExpansion], points: Sequence[int]) -> Counter:
    """How many expansions fall in each U-cylinder over ``points``."""
    return Counter(cylinder_of(e, points) for e in expansions)


def all_u_cylinders(points: Sequence[int]) -> list[UCylinder]:
    """The n! 2^C(n, 2) U-cylinders over a set of base points."""
    n = len(points)
    out = []
    for perm in itertools.permutations(points):
        for eps in itertools.product((0, 1), repeat=math.comb(n, 2)):
            out.append(UCylinder(perm, eps))
    return out


def partition_check(
    g: SemiDigraph, points: Sequence[int], expansions: Sequence[StarExpansion] | None = None
) -> bool:
    """True iff the U-cylinders over ``points`` partition the expansion set."""
    UCylinder(tuple(points), (0,) * math.comb(len(points), 2)).check_columns(g)
    if expansions is None:
        expansions = enumerate_expansions(g)
    cylinders = all_u_cylinders(points)
    return all(sum(in_U(e, c) for c in cylinders) == 1 for e in expansions)


# -- algebra of cylinders ------------------------------------------------------


def rebase(u: UCylinder, replacements: Mapping[int, int], g: SemiDigraph) -> UCylinder:
    """The same event described over other base points in the same columns.

    R(x_i, x_j) only depends on the class of x_i, and so does the arrow
    x_i -> x_j up to the same flip; replacing x_j by a point in the other
    ~ class (relative to the column of x_i) flips the arrow but not R.
    Hence eps for (i, j) flips exactly when x_j and its replacement are
    inequivalent relative to the column of x_i.
    """
    new_points = []
    for x in u.points:
        x2 = replacements.get(x, x)
        if x2 not in g:
            raise UnknownVertex(x2)
        if not g.perp(x, x2):
            raise ColumnMismatch(f"{x2} is not in the column of {x}")
        new_points.append(x2)
    n = len(u.points)
    eps = []
    for i, j in itertools.combinations(range(n), 2):
        p = g.column_index(u.points[i])
        flip = not same_class(g, u.points[j], new_points[j], p)
        eps.append(u.bit(i, j) ^ int(flip))
    return UCylinder(tuple(new_points), tuple(eps))


def _merged_orders(a: Sequence[int], b: Sequence[int], limit: int = 8) -> list[tuple[int, ...]]:
    union = list(dict.fromkeys([*a, *b]))
    if len(union) > limit:
        raise ScaleExceeded("too many base points to interleave")
    pos_a = {x: i for i, x in enumerate(a)}
    pos_b = {x: i for i, x in enumerate(b)}
    out = []
    for perm in itertools.permutations(union):
        ia = [x for x in perm if x in pos_a]
        ib = [x for x in perm if x in pos_b]
        if ia == list(a) and ib == list(b):
            out.append(perm)
    return sorted(out)


def intersect_U(u1: UCylinder, u2: UCylinder, g: SemiDigraph) -> list[Cylinder]:
    """u1 ∩ u2 as a list of pairwise disjoint cylinders (empty list = empty set)."""
    u1.check_columns(g)
    u2.check_columns(g)
    col1 = {g.column_index(x): x for x in u1.points}
    moves = {x: col1[g.column_index(x)] for x in u2.points if g.column_index(x) in col1}
    u2 = rebase(u2, moves, g)
    fixed: dict[tuple[int, int], int] = {}
    for u in (u1, u2):
        for (i, j), bit in zip(itertools.combinations(range(len(u.points)), 2), u.eps):
            pair = (u.points[i], u.points[j])
            if fixed.get(pair, bit) != bit:
                return []
            fixed[pair] = bit
    out = []
    for order in _merged_orders(u1.points, u2.points):
        pairs = list(itertools.combinations(order, 2))
        free = [k for k, pair in enumerate(pairs) if pair not in fixed]
        for bits in itertools.product((0, 1), repeat=len(free)):
            eps = [fixed.get(pair, 0) for pair in pairs]
            for k, bit in zip(free, bits):
                eps[k] = bit
            out.append(Cylinder(UCylinder(order, tuple(eps))))
    return out


# -- sampling --------------------------------------------------------------------


def sample_key(g: SemiDigraph, rng: np.random.Generator):
    """Normal-form key of a uniformly random expansion: independent uniform
    column order, uniform orders inside columns, and a fair coin per pair."""
    k = len(g.columns)
    column_order = tuple(int(c) for c in rng.permutation(k))
    within = tuple(tuple(int(v) for v in rng.permutation(col)) for col in g.columns)
    bits = tuple(int(b) for b in rng.integers(0, 2, size=math.comb(k, 2)))
    return column_order, within, bits


def sample_expansion(g: SemiDigraph, seed) -> StarExpansion:
    rng = as_rng(seed)
    return StarExpansion.from_key(g, sample_key(g, rng))


def _mc_worker(args) -> int:
    g, cyl, n, seed_seq = args
    rng = np.random.default_rng(seed_seq)
    hits = 0
    for _ in range(n):
        if cyl.contains(StarExpansion.from_key(g, sample_key(g, rng))):
            hits += 1
    return hits


MC_CHUNK = 4096


def estimate(g: SemiDigraph, cyl: Cylinder, n: int, seed: int, jobs: int = 1, z: float = 3.0) -> dict:
    """Monte Carlo estimate of the measure of ``cyl`` with a ±z·σ interval.

    The n draws are cut into chunks of MC_CHUNK; chunk c uses the c-th child
    of ``SeedSequence(seed)``.  Chunks are spread over ``jobs`` processes, so
    the result depends on the seed only, never on the number of workers.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    sizes = [MC_CHUNK] * (n // MC_CHUNK) + ([n % MC_CHUNK] if n % MC_CHUNK else [])
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    tasks = [(g, cyl, m, s) for m, s in zip(sizes, children)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            hits = sum(pool.map(_mc_worker, tasks))
    else:
        hits = sum(map(_mc_worker, tasks))
    p = hits / n
    half = z * math.sqrt(p * (1 - p) / n)
    return {"estimate": p, "ci": [max(0.0, p - half), min(1.0, p + half)], "n": n}


# -- ordering independence -------------------------------------------------------


def ordering_independence(i: int, j: int) -> tuple[Fraction, Fraction]:
    """(C(i+j, i)/(i+j)!, 1/(i! j!)): the probability that two disjoint
    families are each increasing, counted by interleavings, and the product
    of the separate probabilities."""
    if i < 0 or j < 0:
        raise ValueError("sizes must be non-negative")
    interleaved = Fraction(math.comb(i + j, i), math.factorial(i + j))
    return interleaved, Fraction(1, math.factorial(i) * math.factorial(j))

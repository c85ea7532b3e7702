"""The ordered expansion class S*: a column-convex linear order ``<`` and a
binary relation ``R`` that labels the two ~_Q classes of every column P
lying below another column Q.

An expansion is stored in normal form (column order, order inside each
column, and for every pair of columns P < Q the chosen class ``u`` of P).
``R`` is materialised from that data on demand; :func:`check_star` verifies
an order and relation given extensionally, without consulting the normal form.

Two readings of the back-direction clause are supported.  When no vertex of
P is R-related to all of Q, the default (``literal_c=False``) sets
R(y, x) iff x -> y, which is what the R-recovery formula for cylinders and
the edge-recovery identity both require.  ``literal_c=True`` sets R(y, x)
false throughout, as the clause is sometimes stated verbatim.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Sequence

from .core import SemiDigraph, find_violation, same_class, sim_split
from .errors import (
    BaseNotInColumn,
    ColumnsNotOrdered,
    InconsistentLabels,
    ScaleExceeded,
    UnknownVertex,
)

DEFAULT_MAX_EXPANSIONS = 500_000


@lru_cache(maxsize=4096)
def class_options(g: SemiDigraph, p: int, q: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """The two admissible choices of u for column p below column q.

    Option 1 is the class containing min(P); option 0 is the other class,
    which is empty when the split has a single cell.
    """
    cells = sim_split(g, p, q)
    if len(cells) == 1:
        return ((), cells[0])
    return (cells[1], cells[0])


def expansion_count_formula(g: SemiDigraph) -> int:
    """k! * prod(|P|!) * 2^C(k, 2)."""
    k = len(g.columns)
    return (
        math.factorial(k)
        * math.prod(math.factorial(len(c)) for c in g.columns)
        * 2 ** math.comb(k, 2)
    )


def back_relation(g: SemiDigraph, P: Sequence[int], u: Sequence[int], y: int, literal_c: bool = False) -> bool:
    """R(y, x) for y in the upper column Q and any x in the lower column P."""
    if u:
        return g.arrow(y, u[0])
    if literal_c:
        return False
    return g.arrow(P[0], y)


@dataclass(frozen=True)
class StarExpansion:
    base: SemiDigraph
    column_order: tuple[int, ...]
    within: tuple[tuple[int, ...], ...]
    choices: tuple[tuple[int, int, tuple[int, ...]], ...]

    @classmethod
    def from_key(cls, g: SemiDigraph, key) -> "StarExpansion":
        column_order, within, bits = key
        choices = []
        for (i, j), bit in zip(itertools.combinations(range(len(column_order)), 2), bits):
            p, q = column_order[i], column_order[j]
            choices.append((p, q, class_options(g, p, q)[bit]))
        return cls(g, tuple(column_order), tuple(within), tuple(choices))

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple(int(bool(u) and u[0] == self.base.columns[p][0]) for p, _, u in self.choices)

    @property
    def key(self):
        return (self.column_order, self.within, self.bits)

    @cached_property
    def listing(self) -> tuple[int, ...]:
        return tuple(v for p in self.column_order for v in self.within[p])

    @cached_property
    def position(self) -> Mapping[int, int]:
        return {v: i for i, v in enumerate(self.listing)}

    @cached_property
    def column_rank(self) -> Mapping[int, int]:
        return {p: i for i, p in enumerate(self.column_order)}

    def less(self, x: int, y: int) -> bool:
        return self.position[x] < self.position[y]

    def choice(self, p: int, q: int) -> tuple[int, ...]:
        for lo, hi, u in self.choices:
            if (lo, hi) == (p, q):
                return u
        raise ColumnsNotOrdered(f"column {p} is not below column {q}")

    @cached_property
    def R(self) -> frozenset[tuple[int, int]]:
        return materialize_R(self)

    def order_pairs(self) -> frozenset[tuple[int, int]]:
        return order_pairs(self.listing)

    def to_json(self) -> dict:
        cols = self.base.columns
        return {
            "column_order": [cols[p][0] for p in self.column_order],
            "within": {str(cols[p][0]): list(self.within[p]) for p in range(len(cols))},
            "choices": [
                {"low": cols[p][0], "high": cols[q][0], "class": list(u)}
                for p, q, u in self.choices
            ],
        }

    @classmethod
    def from_json(cls, g: SemiDigraph, data: Mapping) -> "StarExpansion":
        """Parse the JSON form; the result is not checked (use :func:`check_star`)."""
        index = {col[0]: i for i, col in enumerate(g.columns)}
        try:
            column_order = tuple(index[int(c)] for c in data["column_order"])
            within = [()] * len(g.columns)
            for c, vs in data["within"].items():
                within[index[int(c)]] = tuple(int(v) for v in vs)
            choices = tuple(
                (index[int(ch["low"])], index[int(ch["high"])], tuple(sorted(int(v) for v in ch["class"])))
                for ch in data["choices"]
            )
        except KeyError as exc:
            raise UnknownVertex(exc.args[0]) from None
        return cls(g, column_order, tuple(within), choices)


def order_pairs(listing: Sequence[int]) -> frozenset[tuple[int, int]]:
    return frozenset(itertools.combinations(listing, 2))


def materialize_R(e: StarExpansion, literal_c: bool = False) -> frozenset[tuple[int, int]]:
    g = e.base
    cols = g.columns
    pairs = set()
    for p, q, u in e.choices:
        P, Q = cols[p], cols[q]
        for x in u:
            pairs.update((x, y) for y in Q)
        for y in Q:
            if back_relation(g, P, u, y, literal_c):
                pairs.update((y, x) for x in P)
    return frozenset(pairs)


# -- enumeration --------------------------------------------------------


def _keys_for_column_order(g: SemiDigraph, column_order: tuple[int, ...]) -> list:
    cols = g.columns
    inner = list(itertools.product(*(itertools.permutations(c) for c in cols)))
    n_pairs = math.comb(len(cols), 2)
    bit_rows = list(itertools.product((0, 1), repeat=n_pairs))
    return [(column_order, within, bits) for within in inner for bits in bit_rows]


def enumerate_expansions(
    g: SemiDigraph, max_expansions: int = DEFAULT_MAX_EXPANSIONS, jobs: int = 1
) -> list[StarExpansion]:
    """Every expansion of ``g`` in S*, sorted by (column order, within orders, choice bits)."""
    predicted = expansion_count_formula(g)
    if predicted > max_expansions:
        raise ScaleExceeded(f"{predicted} expansions exceeds the limit {max_expansions}")
    orders = list(itertools.permutations(range(len(g.columns))))
    if jobs > 1 and len(orders) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_keys_for_column_order, itertools.repeat(g), orders))
    else:
        chunks = [_keys_for_column_order(g, o) for o in orders]
    keys = sorted(k for chunk in chunks for k in chunk)
    return [StarExpansion.from_key(g, k) for k in keys]


def generate_and_filter(
    g: SemiDigraph, literal_c: bool = False, max_candidates: int = 2_000_000
) -> set[tuple[tuple[int, ...], frozenset]]:
    """All (linear order, R) pairs accepted by :func:`check_star`.

    Orders range over every permutation of the vertices; R ranges over every
    relation that, for each ordered pair of distinct columns (P, Q), relates
    some subset of P to all of Q.  Returned as (listing, R) pairs.
    """
    cols = g.columns
    blocks = []
    for p, q in itertools.permutations(range(len(cols)), 2):
        P, Q = cols[p], cols[q]
        options = []
        for r in range(len(P) + 1):
            for sub in itertools.combinations(P, r):
                options.append(frozenset((x, y) for x in sub for y in Q))
        blocks.append(options)
    n_rel = math.prod(len(b) for b in blocks)
    if n_rel * math.factorial(len(cols)) > max_candidates:
        raise ScaleExceeded("generate-and-filter space too large")
    relations = [frozenset().union(*combo) for combo in itertools.product(*blocks)]
    checker = StarChecker(g, literal_c)
    if not checker.base_ok:
        return set()
    # The R conditions only read the order through the order of the columns,
    # so their verdicts are memoised per (column order, R).
    verdicts: dict[tuple[int, ...], list[bool]] = {}
    accepted = set()
    for listing in itertools.permutations(g.vertices):
        column_order, failure = checker.check_order(order_pairs(listing))
        if failure is not None:
            continue
        if column_order not in verdicts:
            verdicts[column_order] = [bool(checker.check_relation(column_order, R)) for R in relations]
        accepted.update((listing, R) for R, ok in zip(relations, verdicts[column_order]) if ok)
    return accepted


# -- extensional validation ---------------------------------------------


@dataclass(frozen=True)
class StarCheck:
    ok: bool
    condition: str | None = None
    witness: tuple | None = None

    def __bool__(self) -> bool:
        return self.ok


def _order_listing(vertices: Sequence[int], less: frozenset) -> tuple[tuple[int, ...] | None, StarCheck | None]:
    vset = set(vertices)
    for x, y in less:
        if x not in vset or y not in vset:
            return None, StarCheck(False, "2:domain", (x, y))
        if x == y:
            return None, StarCheck(False, "2:irreflexive", (x,))
    for x, y in itertools.combinations(vertices, 2):
        a, b = (x, y) in less, (y, x) in less
        if a and b:
            return None, StarCheck(False, "2:antisymmetric", (x, y))
        if not a and not b:
            return None, StarCheck(False, "2:total", (x, y))
    rank = {v: 0 for v in vertices}
    for x, y in less:
        rank[y] += 1
    listing = tuple(sorted(vertices, key=rank.__getitem__))
    if len(set(rank.values())) != len(vertices):
        for x, y, z in itertools.permutations(vertices, 3):
            if (x, y) in less and (y, z) in less and (x, z) not in less:
                return None, StarCheck(False, "2:transitive", (x, y, z))
    return listing, None


class StarChecker:
    """:func:`check_star` for one base structure, with the per-structure work
    (validity, columns, class options) done once."""

    def __init__(self, g: SemiDigraph, literal_c: bool = False):
        self.g = g
        self.literal_c = literal_c
        self.base_ok = find_violation(g) is None
        self.vset = frozenset(g.vertices)
        self._options: dict[tuple[int, int], tuple] = {}

    def options(self, p: int, q: int):
        if (p, q) not in self._options:
            self._options[(p, q)] = class_options(self.g, p, q)
        return self._options[(p, q)]

    def check_order(self, less: frozenset) -> tuple[tuple[int, ...] | None, StarCheck | None]:
        """Column order of a convex linear order, or the failure."""
        g = self.g
        listing, failure = _order_listing(g.vertices, less)
        if failure is not None:
            return None, failure
        column_order: list[int] = []
        for v in listing:
            c = g.column_index(v)
            if not column_order or column_order[-1] != c:
                if c in column_order:
                    prev = next(w for w in listing if g.column_index(w) == c)
                    between = listing[listing.index(prev) + 1:listing.index(v)]
                    z = next(w for w in between if g.column_index(w) != c)
                    return None, StarCheck(False, "2:convex", (prev, z, v))
                column_order.append(c)
        return tuple(column_order), None

    def check_relation(self, column_order: Sequence[int], rel: frozenset) -> StarCheck:
        """Conditions 3(a)-(d) given the order of the columns."""
        g = self.g
        for x, y in sorted(rel):
            if x not in self.vset or y not in self.vset or g.perp(x, y):
                return StarCheck(False, "3d", (x, y))
        cols = g.columns
        for x in g.vertices:
            own = g.column_index(x)
            for c, col in enumerate(cols):
                if c == own:
                    continue
                vals = [(x, y) in rel for y in col]
                if any(vals) and not all(vals):
                    return StarCheck(False, "3a", (x, col[vals.index(True)], col[vals.index(False)]))
        for i, j in itertools.combinations(range(len(column_order)), 2):
            p, q = column_order[i], column_order[j]
            P, Q = cols[p], cols[q]
            u = tuple(x for x in P if (x, Q[0]) in rel)
            if u not in self.options(p, q):
                return StarCheck(False, "3b", (P[0], Q[0]))
            for y in Q:
                for x in P:
                    actual = (y, x) in rel
                    if u:
                        for x1 in u:
                            if actual != g.arrow(y, x1):
                                return StarCheck(False, "3c", (y, x, x1))
                    elif self.literal_c:
                        if actual:
                            return StarCheck(False, "3c", (y, x))
                    elif actual != g.arrow(x, y):
                        return StarCheck(False, "3c", (y, x))
        return StarCheck(True)

    def __call__(self, order, R: Iterable[tuple[int, int]]) -> StarCheck:
        if not self.base_ok:
            return StarCheck(False, "1", None)
        order = list(order)
        if order and not isinstance(order[0], tuple):
            less = order_pairs(order)
        else:
            less = frozenset(order)
        column_order, failure = self.check_order(less)
        if failure is not None:
            return failure
        return self.check_relation(column_order, frozenset(R))


def check_star(
    g: SemiDigraph, order, R: Iterable[tuple[int, int]], literal_c: bool = False
) -> StarCheck:
    """Decide whether (g, order, R) lies in S*.

    ``order`` is a set of pairs (x, y) meaning x < y, or a listing of the
    vertices from smallest to largest.  The result is falsy on failure and
    names the first violated condition: ``"1"`` (base not in S), ``"2:..."``
    (order not linear or not convex), or ``"3a"`` .. ``"3d"``.
    """
    return StarChecker(g, literal_c)(order, R)


def expansion_from_relations(g: SemiDigraph, order, R: Iterable[tuple[int, int]]) -> StarExpansion:
    """Normal form of an extensionally given expansion (assumed to pass check_star)."""
    order = list(order)
    if order and isinstance(order[0], tuple):
        listing, failure = _order_listing(g.vertices, frozenset(order))
        if failure is not None:
            raise ValueError(f"not a linear order: {failure}")
    else:
        listing = tuple(order)
    rel = frozenset(R)
    column_order: list[int] = []
    for v in listing:
        c = g.column_index(v)
        if c not in column_order:
            column_order.append(c)
    within = tuple(tuple(v for v in listing if g.column_index(v) == c) for c in range(len(g.columns)))
    cols = g.columns
    choices = tuple(
        (p, q, tuple(x for x in cols[p] if (x, cols[q][0]) in rel))
        for p, q in itertools.combinations(column_order, 2)
    )
    return StarExpansion(g, tuple(column_order), within, choices)


# -- canonical labelling and recovery -----------------------------------


@dataclass(frozen=True)
class Split:
    p0: frozenset[int]
    p1: frozenset[int]
    q0: frozenset[int]
    q1: frozenset[int]


def canonical_split(e: StarExpansion, p: int, q: int) -> Split:
    """P¹ = {x in P : R(x, y) for all y in Q}; Q¹ = {y in Q : R(y, x) for all x in P}."""
    if e.column_rank[p] >= e.column_rank[q]:
        raise ColumnsNotOrdered(f"column {p} is not below column {q}")
    P, Q = e.base.columns[p], e.base.columns[q]
    R = e.R
    p1 = frozenset(x for x in P if all((x, y) in R for y in Q))
    q1 = frozenset(y for y in Q if all((y, x) in R for x in P))
    return Split(frozenset(P) - p1, p1, frozenset(Q) - q1, q1)


def recover_edges(split: Split) -> frozenset[tuple[int, int]]:
    """Arrows between P and Q predicted from the labelled split:
    Q¹ -> P¹, P¹ -> Q⁰, P⁰ -> Q¹, Q⁰ -> P⁰."""
    blocks = [
        (split.q1, split.p1),
        (split.p1, split.q0),
        (split.p0, split.q1),
        (split.q0, split.p0),
    ]
    return frozenset((a, b) for src, dst in blocks for a in src for b in dst)


def recover_R(
    g: SemiDigraph, xk: int, xl: int, r_kl: bool, x: int, y: int
) -> tuple[bool, bool]:
    """(R(x, y), R(y, x)) for x in the column of xk (the lower one) and y in
    the column of xl, from the single value R(xk, xl)."""
    if not g.perp(x, xk):
        raise BaseNotInColumn(f"{x} is not in the column of {xk}")
    if not g.perp(y, xl):
        raise BaseNotInColumn(f"{y} is not in the column of {xl}")
    q = g.column_index(xl)
    forward = same_class(g, x, xk, q) == r_kl
    # R(xk, y) == R(xk, xl) by column constancy
    backward = (g.arrow(y, xk) and r_kl) or (g.arrow(xk, y) and not r_kl)
    return forward, backward


@dataclass(frozen=True)
class StarStarForm:
    """Unary-predicate form: vertex x in the i-th column (in the expansion's
    column order) carries f with f(j) = 1 iff R(x, y) for y in the j-th column."""

    base: SemiDigraph
    column_order: tuple[int, ...]
    within: tuple[tuple[int, ...], ...]
    labels: tuple[tuple[int, tuple[tuple[int, int], ...]], ...]

    def label(self, v: int) -> dict[int, int]:
        return dict(dict(self.labels)[v])


def to_starstar(e: StarExpansion) -> StarStarForm:
    g = e.base
    R = e.R
    rank = e.column_rank
    labels = []
    for v in g.vertices:
        own = rank[g.column_index(v)]
        f = tuple(
            (j, int((v, g.columns[c][0]) in R))
            for j, c in enumerate(e.column_order)
            if j != own
        )
        labels.append((v, f))
    return StarStarForm(g, e.column_order, e.within, tuple(labels))


def from_starstar(s: StarStarForm) -> StarExpansion:
    g = s.base
    rank = {p: i for i, p in enumerate(s.column_order)}
    labels = dict(s.labels)
    R = set()
    for x in g.vertices:
        f = dict(labels.get(x, ()))
        own = rank.get(g.column_index(x))
        if own is None or set(f) != set(range(len(s.column_order))) - {own}:
            raise InconsistentLabels(f"label of {x} has the wrong domain")
        for y in g.vertices:
            if not g.perp(x, y) and f[rank[g.column_index(y)]]:
                R.add((x, y))
    listing = tuple(v for p in s.column_order for v in s.within[p])
    verdict = check_star(g, listing, R)
    if not verdict:
        raise InconsistentLabels(f"labels violate condition {verdict.condition}: {verdict.witness}")
    return expansion_from_relations(g, listing, R)

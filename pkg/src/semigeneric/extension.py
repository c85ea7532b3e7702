"""Growing members of S: one-point extensions with a prescribed edge pattern,
multi-point witnesses for prescribed edge families, twins inside a column,
disjoint copies in fresh columns, finite approximations of the generic
structure, and the back-and-forth step for partial isomorphisms.

Every new vertex z placed in a column P that already has residents copies
the row of a reference resident r (the smallest one) toward each other
column Q, possibly complemented as a whole: z -> y iff b xor (r -> y).  That
keeps the arrow matrix between P and Q of the form f(x) xor g(y), which is
exactly the parity condition.  A vertex in a fresh column has no such
constraint.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core import SemiDigraph, checked, find_violation, induced, read_raw
from .errors import (
    BudgetExceeded,
    InvalidDemand,
    UnknownVertex,
    UnrealizableExtension,
)
from .instances import as_rng

log = logging.getLogger(__name__)


def _next_id(g: SemiDigraph) -> int:
    return g.vertices[-1] + 1 if g.vertices else 0


def add_vertex(
    g: SemiDigraph,
    column: int | None,
    required: Mapping[int, bool],
    new_id: int | None = None,
) -> tuple[SemiDigraph, int]:
    """Add one vertex z to column ``column`` (an index of ``g.columns``) or to
    a fresh column (``None``), with z -> v iff ``required[v]``.

    Toward columns without requirements z copies the reference resident; in
    a fresh column z receives edges from all unconstrained vertices (lower
    id toward higher id).  Raises UnrealizableExtension when the requirements
    toward some column are not a (possibly complemented) copy of the
    reference row.
    """
    z = _next_id(g) if new_id is None else new_id
    if z in g:
        raise ValueError(f"vertex {z} already present")
    residents = g.columns[column] if column is not None else ()
    for v in required:
        if v not in g:
            raise UnknownVertex(v)
        if v in residents:
            raise UnrealizableExtension(f"{v} shares the target column; no edge is allowed")
    ref = residents[0] if residents else None
    arcs = set(g.arcs)
    for q, Q in enumerate(g.columns):
        if q == column:
            continue
        if ref is None:
            for y in Q:
                arcs.add((z, y) if required.get(y, False) else (y, z))
            continue
        flips = {required[y] ^ g.arrow(ref, y) for y in Q if y in required}
        if len(flips) > 1:
            raise UnrealizableExtension(f"requirements toward column {q} break parity")
        b = flips.pop() if flips else False
        for y in Q:
            arcs.add((z, y) if b ^ g.arrow(ref, y) else (y, z))
    return SemiDigraph((*g.vertices, z), frozenset(arcs)), z


@dataclass(frozen=True)
class ExtensionDemand:
    """Points y_1..y_k already present (``anchored``) and columns for
    y_{k+1}..y_n (``targets``: column index of ``base`` or None for a fresh
    column).  ``eps[(i, j)]`` for 0 <= i < j < n with j >= k asks for
    y_i -> y_j when 1 and y_j -> y_i when 0.
    """

    base: SemiDigraph
    anchored: tuple[int, ...]
    targets: tuple[int | None, ...]
    eps: Mapping[tuple[int, int], int] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.anchored)

    @property
    def n(self) -> int:
        return len(self.anchored) + len(self.targets)

    def check(self) -> None:
        g = self.base
        for y in self.anchored:
            if y not in g:
                raise UnknownVertex(y)
        anchored_cols = [g.column_index(y) for y in self.anchored]
        if len(set(anchored_cols)) != len(anchored_cols):
            raise InvalidDemand("anchored points must lie in distinct columns")
        existing = [t for t in self.targets if t is not None]
        if any(not 0 <= t < len(g.columns) for t in existing):
            raise InvalidDemand("target column out of range")
        if len(set(existing)) != len(existing):
            raise InvalidDemand("target columns must be distinct")
        if set(existing) & set(anchored_cols):
            raise InvalidDemand("a target column holds an anchored point")
        expected = {(i, j) for i, j in itertools.combinations(range(self.n), 2) if j >= self.k}
        if set(self.eps) != expected:
            raise InvalidDemand("eps must be given exactly for the pairs (i, j) with j >= k")


def lemma1_extend(d: ExtensionDemand) -> tuple[SemiDigraph, tuple[int, ...]]:
    """Realise an extension demand; returns the grown structure and y_{k+1}..y_n.

    New points are added from the last to the first, each through
    :func:`add_vertex` with its edges to the already placed points as
    requirements.  Those points lie in distinct columns, so every
    requirement set is realisable.  Existing edges are never changed.
    """
    d.check()
    g = d.base
    k, n = d.k, d.n
    ids = list(range(_next_id(g), _next_id(g) + n - k))
    ys: list[int] = [*d.anchored, *ids]
    # Representative vertex of each target column (None for fresh), stable under growth.
    reps = [g.columns[t][0] if t is not None else None for t in d.targets]
    placed: dict[int, int] = {i: y for i, y in enumerate(d.anchored)}
    for j in range(n - 1, k - 1, -1):
        required = {}
        for i, y in placed.items():
            a, b = (i, j) if i < j else (j, i)
            bit = bool(d.eps[(a, b)])
            # bit means y_a -> y_b; required[y] is "new vertex -> y"
            required[y] = bit if j == a else not bit
        rep = reps[j - k]
        column = g.column_index(rep) if rep is not None else None
        g, z = add_vertex(g, column, required, new_id=ys[j])
        placed[j] = z
    return checked(g), tuple(ids)


def clone_in_column(
    g: SemiDigraph, a: int, U: Iterable[int] = (), count: int = 1
) -> tuple[SemiDigraph, tuple[int, ...]]:
    """Add ``count`` twins of ``a`` to its column.

    Each twin agrees with ``a`` on every vertex of U outside a's column, and
    elsewhere too (a's row is copied wholesale).
    """
    if a not in g:
        raise UnknownVertex(a)
    for u in U:
        if u not in g:
            raise UnknownVertex(u)
    if count < 0:
        raise ValueError("count must be non-negative")
    new = tuple(range(_next_id(g), _next_id(g) + count))
    arcs = set(g.arcs)
    for b in new:
        for v in g.vertices:
            if g.perp(a, v):
                continue
            arcs.add((b, v) if g.arrow(a, v) else (v, b))
    return SemiDigraph((*g.vertices, *new), frozenset(arcs)), new


def disjoint_copy(g: SemiDigraph, A: Iterable[int]) -> tuple[SemiDigraph, dict[int, int]]:
    """Add an isomorphic copy of the substructure on A in fresh columns, with
    every vertex of ``g`` pointing to every copied vertex."""
    A = sorted(set(A))
    for v in A:
        if v not in g:
            raise UnknownVertex(v)
    start = _next_id(g)
    copy = {v: start + i for i, v in enumerate(A)}
    arcs = set(g.arcs)
    for u, v in g.arcs:
        if u in copy and v in copy:
            arcs.add((copy[u], copy[v]))
    for v in g.vertices:
        for c in copy.values():
            arcs.add((v, c))
    return SemiDigraph((*g.vertices, *copy.values()), frozenset(arcs)), copy


# -- one-point types ----------------------------------------------------------


@dataclass(frozen=True)
class OnePointType:
    """Type of a new point z over a finite set A: ``anchor`` is the smallest
    vertex of A in z's column (None if z's column misses A), ``pattern``
    lists (v, z -> v) for the vertices of A outside that column."""

    anchor: int | None
    pattern: tuple[tuple[int, bool], ...]

    def sort_key(self) -> tuple:
        return (self.anchor is None, self.anchor or 0, self.pattern)

    def to_json(self) -> dict:
        return {"column_of": self.anchor, "pattern": [[v, b] for v, b in self.pattern]}


def one_point_types(g: SemiDigraph, A: Sequence[int]) -> list[OnePointType]:
    """Every type over A realisable in S, checked by validating A plus a point."""
    A = sorted(A)
    sub = induced(g, A)
    anchors: list[int | None] = [col[0] for col in sub.columns] + [None]
    z = _next_id(g)
    out = []
    for anchor in anchors:
        same = [v for v in A if anchor is not None and g.perp(v, anchor)]
        others = [v for v in A if v not in same]
        for bits in itertools.product((False, True), repeat=len(others)):
            edges = [list(e) for e in sub.arcs]
            edges += [[z, v] if b else [v, z] for v, b in zip(others, bits)]
            candidate = read_raw([*A, z], edges)
            if find_violation(candidate) is None:
                out.append(OnePointType(anchor, tuple(zip(others, bits))))
    return out


def realizes(g: SemiDigraph, A: Iterable[int], t: OnePointType, z: int) -> bool:
    A = set(A)
    if z in A:
        return False
    if t.anchor is None:
        if any(g.perp(z, v) for v in A):
            return False
    elif not g.perp(z, t.anchor):
        return False
    return all(g.arrow(z, v) == b for v, b in t.pattern)


def find_witness(g: SemiDigraph, A: Sequence[int], t: OnePointType) -> int | None:
    for z in g.vertices:
        if realizes(g, A, t, z):
            return z
    return None


def _grow_one(g: SemiDigraph, column_rep: int | None, pattern: Mapping[int, bool]) -> tuple[SemiDigraph, int]:
    # The one-point step of lemma1_extend with the whole pattern as
    # requirements; a fresh column leaves several A-points of one column
    # unconstrained by parity, so one anchor per column would not suffice.
    column = g.column_index(column_rep) if column_rep is not None else None
    g2, z = add_vertex(g, column, pattern)
    return checked(g2), z


def realize_type(g: SemiDigraph, A: Sequence[int], t: OnePointType) -> tuple[SemiDigraph, int]:
    """Grow ``g`` by one witness of ``t`` over A: a twin of the anchor when that
    suffices, otherwise a point placed by :func:`add_vertex`."""
    pattern = dict(t.pattern)
    if t.anchor is not None and all(g.arrow(t.anchor, v) == b for v, b in pattern.items()):
        g2, new = clone_in_column(g, t.anchor, A, 1)
        return g2, new[0]
    return _grow_one(g, t.anchor, pattern)


# -- generic approximations --------------------------------------------------


@dataclass
class GenericResult:
    graph: SemiDigraph
    segment: tuple[int, ...]
    demand_size: int
    saturated: bool
    missing: list[tuple[tuple[int, ...], OnePointType]]
    steps_used: int

    def report(self) -> dict:
        return {
            "saturated": self.saturated,
            "missing_demands": [
                {"substructure": list(A), "type": t.to_json()} for A, t in self.missing
            ],
            "segment": list(self.segment),
            "demand_size": self.demand_size,
            "steps_used": self.steps_used,
            "vertices": len(self.graph),
        }


def demands(g: SemiDigraph, segment: Sequence[int], max_size: int) -> list[tuple[tuple[int, ...], OnePointType]]:
    """All (A, type) with A a subset of ``segment`` of size <= max_size, in canonical order."""
    out = []
    for size in range(max_size + 1):
        for A in itertools.combinations(sorted(segment), size):
            out.extend((A, t) for t in one_point_types(g, A))
    return out


def saturation_scan(g: SemiDigraph, segment: Sequence[int], max_size: int) -> list[tuple[tuple[int, ...], OnePointType]]:
    """Demands over the segment with no witness in ``g``."""
    return [(A, t) for A, t in demands(g, segment, max_size) if find_witness(g, A, t) is None]


def random_growth_step(g: SemiDigraph, rng) -> SemiDigraph:
    """Add one point in a random existing or fresh column, with a random
    edge to one random resident of a random subset of the other columns."""
    k = len(g.columns)
    target = int(rng.integers(0, k + 1))
    target_col = None if target == k else target
    anchored = []
    for q, col in enumerate(g.columns):
        if q != target_col and rng.random() < 0.5:
            anchored.append(int(col[int(rng.integers(0, len(col)))]))
    n = len(anchored) + 1
    eps = {(i, n - 1): int(rng.integers(0, 2)) for i in range(n - 1)}
    grown, _ = lemma1_extend(ExtensionDemand(g, tuple(anchored), (target_col,), eps))
    return grown


def build_generic(
    steps: int,
    max_demand_size: int,
    seed,
    segment_size: int = 10,
    raise_on_budget: bool = False,
) -> GenericResult:
    """Grow a finite approximation of the generic structure.

    The first ``segment_size`` points are random one-point extensions; then
    every one-point type over every subset of that segment with at most
    ``max_demand_size`` points receives a witness.  Demands are visited by
    subset size, in a seed-dependent order within each size.  Each added
    vertex costs one step.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    rng = as_rng(seed)
    g = SemiDigraph((), frozenset())
    used = 0
    while len(g) < segment_size and used < steps:
        g = random_growth_step(g, rng)
        used += 1
    segment = g.vertices
    missing = []
    segment_complete = len(segment) >= segment_size
    for size in range(max_demand_size + 1):
        level = [
            (A, t)
            for A in itertools.combinations(segment, size)
            for t in one_point_types(g, A)
        ]
        for idx in rng.permutation(len(level)):
            A, t = level[int(idx)]
            if find_witness(g, A, t) is not None:
                continue
            if used >= steps:
                missing.append((A, t))
                continue
            g, _ = realize_type(g, A, t)
            used += 1
    missing.sort(key=lambda d: (d[0], d[1].sort_key()))
    result = GenericResult(
        checked(g), segment, max_demand_size, segment_complete and not missing, missing, used
    )
    log.info("build_generic: %d vertices, %d steps, saturated=%s", len(g), used, result.saturated)
    if raise_on_budget and not result.saturated:
        raise BudgetExceeded(result)
    return result


# -- back and forth -----------------------------------------------------------


def extend_iso(g: SemiDigraph, f: Mapping[int, int], x: int) -> tuple[SemiDigraph, dict[int, int]]:
    """Extend the partial isomorphism ``f`` to ``x``.

    An image is searched among existing vertices (x itself first); if none
    realises the transported type, ``g`` grows by one vertex.
    """
    if x not in g:
        raise UnknownVertex(x)
    f = dict(f)
    if x in f:
        return g, f
    used = set(f.values())
    candidates = [x, *(v for v in g.vertices if v != x)]
    for t in candidates:
        if t in used:
            continue
        if all(g.rel(x, d) == g.rel(t, fd) for d, fd in f.items()):
            f[x] = t
            return g, f
    rep = None
    required = {}
    for d, fd in f.items():
        if g.perp(x, d):
            rep = fd
        else:
            required[fd] = g.arrow(x, d)
    g2, t = _grow_one(g, rep, required)
    f[x] = t
    return g2, f


def back_and_forth(
    g: SemiDigraph, f: Mapping[int, int], max_growth: int = 64
) -> tuple[SemiDigraph, dict[int, int]]:
    """Alternate forth steps (cover the smallest uncovered vertex of the
    domain) and back steps (same for the image, through the inverse map)
    until ``f`` is a bijection of the grown structure onto itself."""
    f = dict(f)
    start = len(g)
    while True:
        if len(g) - start > max_growth:
            raise BudgetExceeded((g, f), f"map not total after {max_growth} new vertices")
        free = [v for v in g.vertices if v not in f]
        if free:
            g, f = extend_iso(g, f, free[0])
            continue
        image = set(f.values())
        missing = [v for v in g.vertices if v not in image]
        if not missing:
            return g, f
        g, inv = extend_iso(g, {b: a for a, b in f.items()}, missing[0])
        f = {b: a for a, b in inv.items()}

"""Finite members of the class S: loopless digraphs in which non-adjacency is an
equivalence relation ("columns") and every pair of 2-element column slices
carries an even number of forward edges.

Vertices are plain integers.  A :class:`SemiDigraph` is immutable; operations
that grow a structure return a new one.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    DuplicateEdge,
    InvalidGraph,
    MalformedGraph,
    OppositeEdgePair,
    SelfLoop,
    UnknownVertex,
    VertexNotInColumn,
)


class Rel(enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"
    PERP = "perp"


@dataclass(frozen=True)
class Violation:
    """Why a digraph is not in S.

    ``kind`` is ``"perp"`` for a failure of transitivity of non-adjacency,
    with witness ``(x, y, z)`` where x⊥y, y⊥z but not x⊥z; or ``"parity"``
    with witness ``(x1, x2, y1, y2)`` carrying an odd number of forward edges.
    """

    kind: str
    witness: tuple[int, ...]

    def to_json(self) -> dict:
        return {"kind": self.kind, "witness": list(self.witness)}


@dataclass(frozen=True)
class SemiDigraph:
    vertices: tuple[int, ...]
    arcs: frozenset[tuple[int, int]]
    _out: Mapping[int, frozenset[int]] = field(init=False, repr=False, compare=False)
    _col_of: Mapping[int, int] = field(init=False, repr=False, compare=False)
    _columns: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        verts = tuple(sorted(self.vertices))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "arcs", frozenset(self.arcs))
        out: dict[int, set[int]] = {v: set() for v in verts}
        for u, v in self.arcs:
            out[u].add(v)
        object.__setattr__(self, "_out", {v: frozenset(s) for v, s in out.items()})

        # Columns are the components of non-adjacency; they coincide with the
        # equivalence classes whenever perp is transitive.
        parent = {v: v for v in verts}

        def find(v: int) -> int:
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for i, u in enumerate(verts):
            for v in verts[i + 1:]:
                if v not in out[u] and u not in out[v]:
                    ru, rv = find(u), find(v)
                    if ru != rv:
                        parent[max(ru, rv)] = min(ru, rv)
        groups: dict[int, list[int]] = {}
        for v in verts:
            groups.setdefault(find(v), []).append(v)
        columns = tuple(sorted(tuple(g) for g in groups.values()))
        object.__setattr__(self, "_columns", columns)
        object.__setattr__(
            self, "_col_of", {v: i for i, col in enumerate(columns) for v in col}
        )

    # -- basic queries -------------------------------------------------

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, v: object) -> bool:
        return v in self._out

    @property
    def columns(self) -> tuple[tuple[int, ...], ...]:
        """The ⊥-classes, each sorted, ordered by minimum vertex id."""
        return self._columns

    def arrow(self, u: int, v: int) -> bool:
        return v in self._out[u]

    def out_neighbors(self, u: int) -> frozenset[int]:
        return self._out[u]

    def rel(self, u: int, v: int) -> Rel:
        if u == v:
            raise ValueError("rel is undefined on the diagonal")
        if v in self._out[u]:
            return Rel.FORWARD
        if u in self._out[v]:
            return Rel.BACKWARD
        return Rel.PERP

    def perp(self, u: int, v: int) -> bool:
        """Non-adjacency, reflexive by convention."""
        return u == v or (v not in self._out[u] and u not in self._out[v])

    def column_index(self, v: int) -> int:
        try:
            return self._col_of[v]
        except KeyError:
            raise UnknownVertex(v) from None

    def column_of(self, v: int) -> tuple[int, ...]:
        return self._columns[self.column_index(v)]

    def edge_list(self) -> list[list[int]]:
        return [list(a) for a in sorted(self.arcs)]

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices), "edges": self.edge_list()}

    @classmethod
    def from_json(cls, data: Mapping) -> "SemiDigraph":
        return build(data["vertices"], data["edges"])


# -- construction and validation ----------------------------------------


def read_raw(vertices: Iterable[int], edges: Iterable[Sequence[int]]) -> SemiDigraph:
    """Parse raw data into a digraph without checking the class conditions."""
    verts = [int(v) for v in vertices]
    vset = set(verts)
    if len(vset) != len(verts):
        raise MalformedGraph("duplicate vertex id")
    arcs: set[tuple[int, int]] = set()
    for e in edges:
        if len(e) != 2:
            raise MalformedGraph(f"edge {e!r} is not a pair")
        u, v = int(e[0]), int(e[1])
        for w in (u, v):
            if w not in vset:
                raise UnknownVertex(w)
        if u == v:
            raise SelfLoop(f"self loop at {u}")
        if (u, v) in arcs:
            raise DuplicateEdge(f"edge {u}->{v} listed twice")
        if (v, u) in arcs:
            raise OppositeEdgePair(f"both {u}->{v} and {v}->{u} present")
        arcs.add((u, v))
    return SemiDigraph(tuple(verts), frozenset(arcs))


def _perp_witness(g: SemiDigraph) -> tuple[int, int, int] | None:
    vs = g.vertices
    for x in vs:
        for y in vs:
            if y == x or not g.perp(x, y):
                continue
            for z in vs:
                if z != x and z != y and g.perp(y, z) and not g.perp(x, z):
                    return (x, y, z)
    return None


def _perp_transitive(g: SemiDigraph) -> bool:
    # Components of non-adjacency must be cliques of non-adjacency.
    for col in g.columns:
        for u, v in itertools.combinations(col, 2):
            if not g.perp(u, v):
                return False
    return True


def iter_parity_witnesses(g: SemiDigraph) -> Iterator[tuple[int, int, int, int]]:
    """Every quadruple (x1 < x2, y1 < y2) with an odd forward count, in
    lexicographic order.  Quartic; this is the exhaustive audit."""
    vs = g.vertices
    for x1 in vs:
        for x2 in vs:
            if x2 <= x1 or not g.perp(x1, x2):
                continue
            for y1 in vs:
                if g.perp(x1, y1):
                    continue
                for y2 in vs:
                    if y2 <= y1 or not g.perp(y1, y2):
                        continue
                    count = sum(g.arrow(x, y) for x in (x1, x2) for y in (y1, y2))
                    if count % 2:
                        yield (x1, x2, y1, y2)


def _parity_ok(g: SemiDigraph) -> bool:
    # Parity on a column pair is equivalent to the bipartite arrow matrix
    # being a(x, y) = f(x) xor g(y); test against one reference row and column.
    cols = g.columns
    for p, q in itertools.combinations(range(len(cols)), 2):
        P, Q = cols[p], cols[q]
        r, s = P[0], Q[0]
        ars = g.arrow(r, s)
        ref_row = [g.arrow(r, y) for y in Q]
        for x in P[1:]:
            axs = g.arrow(x, s)
            for y, ary in zip(Q, ref_row):
                if g.arrow(x, y) ^ axs ^ ary ^ ars:
                    return False
    return True


def find_violation(g: SemiDigraph) -> Violation | None:
    if not _perp_transitive(g):
        return Violation("perp", _perp_witness(g))
    if not _parity_ok(g):
        return Violation("parity", next(iter_parity_witnesses(g)))
    return None


def validate(vertices: Iterable[int], edges: Iterable[Sequence[int]]) -> SemiDigraph | Violation:
    """Return the digraph if it lies in S, otherwise the first violation found.

    Malformed input (self loops, duplicate or opposite edges, unknown
    endpoints) raises before the class conditions are examined.
    """
    g = read_raw(vertices, edges)
    violation = find_violation(g)
    return g if violation is None else violation


def build(vertices: Iterable[int], edges: Iterable[Sequence[int]]) -> SemiDigraph:
    result = validate(vertices, edges)
    if isinstance(result, Violation):
        raise InvalidGraph(result)
    return result


def checked(g: SemiDigraph) -> SemiDigraph:
    violation = find_violation(g)
    if violation is not None:
        raise InvalidGraph(violation)
    return g


def is_valid(g: SemiDigraph) -> bool:
    return find_violation(g) is None


# -- columns and ~_Q splits ---------------------------------------------


@dataclass(frozen=True)
class ColumnView:
    columns: tuple[tuple[int, ...], ...]
    splits: Mapping[tuple[int, int], tuple[tuple[int, ...], ...]]

    def split(self, p: int, q: int) -> tuple[tuple[int, ...], ...]:
        return self.splits[(p, q)]


def sim_split(g: SemiDigraph, p: int, q: int) -> tuple[tuple[int, ...], ...]:
    """Partition column ``p`` by identical out-patterns toward column ``q``.

    Cells are sorted and ordered by their minimum vertex.
    """
    P, Q = g.columns[p], g.columns[q]
    cells: dict[tuple[bool, ...], list[int]] = {}
    for x in P:
        cells.setdefault(tuple(g.arrow(x, y) for y in Q), []).append(x)
    return tuple(sorted(tuple(c) for c in cells.values()))


def column_view(g: SemiDigraph) -> ColumnView:
    k = len(g.columns)
    splits = {
        (p, q): sim_split(g, p, q) for p in range(k) for q in range(k) if p != q
    }
    return ColumnView(g.columns, MappingProxyType(splits))


def same_class(g: SemiDigraph, x: int, x2: int, q: int) -> bool:
    """x ~_Q x2 for the column with index ``q``."""
    return all(g.arrow(x, y) == g.arrow(x2, y) for y in g.columns[q])


def exists_forall_check(g: SemiDigraph, p: int, q: int, x: int, x2: int) -> tuple[bool, bool]:
    """Both sides of the ∀/∃ characterisation of x ~_Q x2.

    The components agree whenever x has an out-neighbour in Q; on a finite
    structure they can differ when Q dominates x entirely.
    """
    P, Q = g.columns[p], g.columns[q]
    if p == q:
        raise ValueError("P and Q must be distinct columns")
    for v in (x, x2):
        if v not in P:
            raise VertexNotInColumn(f"{v} not in column {p}")
    forall = all(g.arrow(x, y) == g.arrow(x2, y) for y in Q)
    exists = any(g.arrow(x, y) and g.arrow(x2, y) for y in Q)
    return forall, exists


# -- substructures and maps ---------------------------------------------


def induced(g: SemiDigraph, subset: Iterable[int]) -> SemiDigraph:
    s = set(subset)
    for v in s:
        if v not in g:
            raise UnknownVertex(v)
    return SemiDigraph(tuple(s), frozenset((u, v) for u, v in g.arcs if u in s and v in s))


def is_partial_iso(g: SemiDigraph, f: Mapping[int, int]) -> bool:
    """True iff ``f`` is injective and preserves arrows and non-adjacency."""
    if len(set(f.values())) != len(f):
        return False
    items = list(f.items())
    for i, (a, fa) in enumerate(items):
        for b, fb in items[i + 1:]:
            if g.rel(a, b) != g.rel(fa, fb):
                return False
    return True


def to_dot(g: SemiDigraph, name: str = "S") -> str:
    lines = [f"digraph {name} {{"]
    for i, col in enumerate(g.columns):
        lines.append(f"  subgraph cluster_{i} {{")
        lines.append(f'    label="column {i}";')
        lines.extend(f"    {v};" for v in col)
        lines.append("  }")
    lines.extend(f"  {u} -> {v};" for u, v in sorted(g.arcs))
    lines.append("}")
    return "\n".join(lines) + "\n"


EMPTY = SemiDigraph((), frozenset())

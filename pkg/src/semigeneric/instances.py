"""Generators of members of S: seeded random instances and exhaustive lists of
small instances up to isomorphism."""

from __future__ import annotations

import itertools
from typing import Iterator, Sequence

import numpy as np

from .core import SemiDigraph


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def from_layout(
    sizes: Sequence[int], rows: dict[tuple[int, int], tuple[Sequence[int], Sequence[int]]]
) -> SemiDigraph:
    """Build the structure with consecutive columns of the given sizes.

    ``rows[(p, q)] = (f, g)`` for p < q sets x -> y iff f[x] xor g[y] for x in
    column p and y in column q; every such matrix satisfies parity.
    """
    starts = list(itertools.accumulate([0, *sizes]))
    cols = [list(range(starts[i], starts[i + 1])) for i in range(len(sizes))]
    arcs = set()
    for (p, q), (f, h) in rows.items():
        for i, x in enumerate(cols[p]):
            for j, y in enumerate(cols[q]):
                arcs.add((x, y) if f[i] ^ h[j] else (y, x))
    return SemiDigraph(tuple(range(starts[-1])), frozenset(arcs))


def random_semidigraph(
    seed, n_vertices: int, n_columns: int | None = None
) -> SemiDigraph:
    """A random member of S on vertices 0..n-1 (columns consecutive)."""
    rng = as_rng(seed)
    if n_vertices == 0:
        return SemiDigraph((), frozenset())
    if n_columns is None:
        n_columns = int(rng.integers(1, n_vertices + 1))
    if not 1 <= n_columns <= n_vertices:
        raise ValueError("need 1 <= n_columns <= n_vertices")
    # Random composition of n_vertices into n_columns positive parts.
    cuts = sorted(rng.choice(np.arange(1, n_vertices), size=n_columns - 1, replace=False)) if n_columns > 1 else []
    bounds = [0, *map(int, cuts), n_vertices]
    sizes = [b - a for a, b in zip(bounds, bounds[1:])]
    rows = {}
    for p, q in itertools.combinations(range(n_columns), 2):
        f = [int(b) for b in rng.integers(0, 2, size=sizes[p])]
        h = [int(b) for b in rng.integers(0, 2, size=sizes[q])]
        rows[(p, q)] = (f, h)
    return from_layout(sizes, rows)


def _partitions(n: int, max_parts: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    if max_parts == 0:
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, max_parts - 1, first):
            yield (first, *rest)


def _layout_perms(sizes: tuple[int, ...]) -> list[list[int]]:
    starts = list(itertools.accumulate([0, *sizes]))
    cols = [list(range(starts[i], starts[i + 1])) for i in range(len(sizes))]
    perms = []
    for col_perm in itertools.permutations(range(len(sizes))):
        if any(sizes[a] != sizes[b] for a, b in zip(col_perm, range(len(sizes)))):
            continue
        for inner in itertools.product(*(itertools.permutations(c) for c in cols)):
            mapping = [0] * starts[-1]
            for target, source in enumerate(col_perm):
                for v, w in zip(cols[source], inner[target]):
                    mapping[v] = w
            perms.append(mapping)
    return perms


def small_instances(
    max_vertices: int, max_columns: int, min_vertices: int = 1
) -> Iterator[SemiDigraph]:
    """Every member of S with the given bounds, one per isomorphism class."""
    for n in range(min_vertices, max_vertices + 1):
        for sizes in _partitions(n, max_columns):
            pairs = list(itertools.combinations(range(len(sizes)), 2))
            choices = []
            for p, q in pairs:
                fs = [(0, *f) for f in itertools.product((0, 1), repeat=sizes[p] - 1)]
                hs = list(itertools.product((0, 1), repeat=sizes[q]))
                choices.append(list(itertools.product(fs, hs)))
            perms = _layout_perms(sizes) if pairs else [list(range(n))]
            seen = set()
            for combo in itertools.product(*choices):
                g = from_layout(sizes, dict(zip(pairs, combo)))
                canon = min(
                    tuple(sorted((m[u], m[v]) for u, v in g.arcs)) for m in perms
                )
                if canon in seen:
                    continue
                seen.add(canon)
                yield g

"""Exhaustive identity sweeps over small members of S.

Every check receives a structure together with its enumerated expansions and
records cases into an :class:`Outcome`, so one enumeration can feed several
checks.  :func:`run_selfcheck` drives them all over the small instances.
"""

from __future__ import annotations

import itertools
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from scipy import stats

from .core import SemiDigraph, is_partial_iso
from .instances import as_rng, small_instances
from .measure import (
    UCylinder,
    VCylinder,
    all_u_cylinders,
    brute_measure,
    cylinder_of,
    in_U,
    in_V,
    intersect_U,
    mu0_U,
    mu0_V,
    rebase,
    sample_key,
)
from .star import (
    StarExpansion,
    canonical_split,
    enumerate_expansions,
    expansion_count_formula,
    from_starstar,
    generate_and_filter,
    recover_edges,
    to_starstar,
)

MAX_FAILURES_KEPT = 10


@dataclass
class Outcome:
    name: str
    cases: int = 0
    failed: int = 0
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return self.cases > 0 and self.failed == 0

    def record(self, ok: bool, detail=None) -> None:
        self.cases += 1
        if not ok:
            self.failed += 1
            if len(self.failures) < MAX_FAILURES_KEPT:
                self.failures.append(detail)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "cases": self.cases,
            "failed": self.failed,
            "failures": [repr(f) for f in self.failures],
        }


def base_sets(g: SemiDigraph, max_points: int, min_points: int = 1) -> list[tuple[int, ...]]:
    """Sets of points in pairwise distinct columns, as sorted tuples."""
    cols = g.columns
    out = []
    for n in range(min_points, min(max_points, len(cols)) + 1):
        for chosen in itertools.combinations(range(len(cols)), n):
            out.extend(itertools.product(*(cols[c] for c in chosen)))
    return out


def v_cylinders(g: SemiDigraph, columns: Iterable[int] | None = None, min_size: int = 1) -> list[VCylinder]:
    """Every V-cylinder with tuples drawn from ``columns`` (all columns by
    default), each tuple of length >= ``min_size``; the empty one included."""
    cols = g.columns
    chosen = range(len(cols)) if columns is None else list(columns)
    per_column = []
    for c in chosen:
        opts: list[tuple[int, ...] | None] = [None]
        for r in range(min_size, len(cols[c]) + 1):
            opts.extend(itertools.permutations(cols[c], r))
        per_column.append(opts)
    return [
        VCylinder(tuple(t for t in combo if t is not None))
        for combo in itertools.product(*per_column)
    ]


# -- per-instance checks ----------------------------------------------------


def check_u_measure(g: SemiDigraph, exps: Sequence[StarExpansion], out: Outcome, max_points: int = 3, rng=None) -> None:
    """Every U-cylinder over every base set has measure 1/(n! 2^C(n,2)).

    Counts come from sorting each expansion into its cylinder; one cylinder
    per base set is also measured directly by membership.
    """
    total = len(exps)
    rng = as_rng(0) if rng is None else rng
    for points in base_sets(g, max_points):
        n = len(points)
        want = mu0_U(n)
        counts = Counter(cylinder_of(e, points) for e in exps)
        ok = len(counts) == math.factorial(n) * 2 ** math.comb(n, 2) and all(
            Fraction(c, total) == want for c in counts.values()
        )
        cyls = all_u_cylinders(points)
        probe = cyls[int(rng.integers(0, len(cyls)))]
        ok = ok and brute_measure(g, probe, expansions=exps) == want
        out.record(ok, (g.to_json(), points))


def check_v_measure(g: SemiDigraph, exps: Sequence[StarExpansion], out: Outcome) -> None:
    """Every V-cylinder has measure 1/prod(i_j!).

    Expansions are grouped by their within-column orders first, which is all
    a V-cylinder looks at; used where per-expansion membership is too slow.
    """
    total = len(exps)
    within = Counter(e.within for e in exps)
    for v in v_cylinders(g):
        hits = 0
        for w, c in within.items():
            pos = {x: i for col in w for i, x in enumerate(col)}
            if all(pos[a] < pos[b] for t in v.tuples for a, b in zip(t, t[1:])):
                hits += c
        out.record(Fraction(hits, total) == mu0_V(v.sizes), (g.to_json(), v.tuples))


def check_v_measure_direct(g: SemiDigraph, exps: Sequence[StarExpansion], out: Outcome) -> None:
    """As :func:`check_v_measure` but through :func:`brute_measure` itself."""
    for v in v_cylinders(g):
        out.record(brute_measure(g, v=v, expansions=exps) == mu0_V(v.sizes), (g.to_json(), v.tuples))


def check_product(g: SemiDigraph, exps: Sequence[StarExpansion], out: Outcome, max_points: int = 3) -> None:
    """brute(U ∩ V) = brute(U) brute(V) when V's tuples (length >= 2) sit in
    columns that carry no base point of U."""
    total = len(exps)
    for points in base_sets(g, max_points):
        used = {g.column_index(x) for x in points}
        free = [c for c in range(len(g.columns)) if c not in used]
        vs = [v for v in v_cylinders(g, free, min_size=2) if v.tuples]
        if not vs:
            continue
        cells = [cylinder_of(e, points) for e in exps]
        u_counts = Counter(cells)
        for v in vs:
            inside = [in_V(e, v) for e in exps]
            v_count = sum(inside)
            joint = Counter(c for c, hit in zip(cells, inside) if hit)
            ok = all(
                Fraction(joint[c], total) == Fraction(u_counts[c], total) * Fraction(v_count, total)
                for c in u_counts
            )
            out.record(ok, (g.to_json(), points, v.tuples))


def check_partition(g: SemiDigraph, exps: Sequence[StarExpansion], out: Outcome, max_points: int = 3) -> None:
    """The n! 2^C(n,2) U-cylinders over each base set partition the expansions."""
    for points in base_sets(g, max_points):
        cyls = all_u_cylinders(points)
        ok = all(sum(in_U(e, c) for c in cyls) == 1 for e in exps)
        out.record(ok, (g.to_json(), points))


def check_rebase(g: SemiDigraph, exps: Sequence[StarExpansion], out: Outcome, max_points: int = 3) -> None:
    """A rebased cylinder has exactly the members of the original.

    Since the cylinders over a base partition the expansions, it suffices
    that rebasing the cylinder of each expansion over B gives its cylinder
    over B'.
    """
    cols = g.columns
    for n in range(1, min(max_points, len(cols)) + 1):
        for chosen in itertools.combinations(range(len(cols)), n):
            tuples = list(itertools.product(*(cols[c] for c in chosen)))
            cells = {b: [cylinder_of(e, b) for e in exps] for b in tuples}
            for b1, b2 in itertools.product(tuples, repeat=2):
                moves = dict(zip(b1, b2))
                image = {u: rebase(u, moves, g) for u in set(cells[b1])}
                ok = all(image[c1] == c2 for c1, c2 in zip(cells[b1], cells[b2]))
                out.record(ok, (g.to_json(), b1, b2))


def check_intersections(g: SemiDigraph, exps: Sequence[StarExpansion], out: Outcome, max_points: int = 2) -> None:
    """intersect_U returns pairwise disjoint parts whose union is u1 ∩ u2."""
    cyls = [c for points in base_sets(g, max_points) for c in all_u_cylinders(points)]
    for u1, u2 in itertools.product(cyls, repeat=2):
        parts = intersect_U(u1, u2, g)
        ok = True
        for e in exps:
            hits = sum(p.contains(e) for p in parts)
            if hits > 1 or (hits == 1) != (in_U(e, u1) and in_U(e, u2)):
                ok = False
                break
        out.record(ok, (g.to_json(), u1, u2))


def check_iso_invariance(g: SemiDigraph, exps: Sequence[StarExpansion], out: Outcome, max_points: int = 2) -> None:
    """Cylinders carried onto each other by a partial isomorphism have equal measure."""
    tuples = [p for points in base_sets(g, max_points) for p in itertools.permutations(points)]
    counts = {}
    for points in base_sets(g, max_points):
        counts.update(Counter(cylinder_of(e, points) for e in exps))
    for b1, b2 in itertools.product(tuples, repeat=2):
        if len(b1) != len(b2) or not is_partial_iso(g, dict(zip(b1, b2))):
            continue
        for eps in itertools.product((0, 1), repeat=math.comb(len(b1), 2)):
            c1, c2 = UCylinder(b1, eps), UCylinder(b2, eps)
            out.record(counts.get(c1, 0) == counts.get(c2, 0), (g.to_json(), c1, c2))


def check_expansion_count(g: SemiDigraph, exps: Sequence[StarExpansion], out: Outcome, filter_up_to: int = 6) -> None:
    """|expansions| matches the product formula; for small structures the
    enumeration also equals generate-and-filter through check_star."""
    ok = len(exps) == expansion_count_formula(g) and len({e.key for e in exps}) == len(exps)
    if ok and len(g) <= filter_up_to:
        enumerated = {(e.listing, e.R) for e in exps}
        ok = enumerated == generate_and_filter(g)
    out.record(ok, (g.to_json(), len(exps), expansion_count_formula(g)))


def check_recovery(g: SemiDigraph, exps: Sequence[StarExpansion], out: Outcome) -> None:
    """Edges between any two columns follow from the labelled split, and the
    unary-label form converts back to the same expansion."""
    cols = g.columns
    for e in exps:
        ok = True
        for p, q in itertools.combinations(e.column_order, 2):
            actual = frozenset(
                (a, b) for a, b in g.arcs if {a, b} <= set(cols[p]) | set(cols[q]) and
                g.column_index(a) != g.column_index(b)
            )
            if recover_edges(canonical_split(e, p, q)) != actual:
                ok = False
        back = from_starstar(to_starstar(e))
        ok = ok and back.key == e.key and back.R == e.R
        out.record(ok, (g.to_json(), e.to_json()))


# -- sampler -------------------------------------------------------------------


def sampler_chi2(g: SemiDigraph, draws: int, seed, alpha: float = 0.001) -> tuple[bool, float]:
    """χ² goodness of fit of :func:`sample_key` against the enumerated expansions."""
    exps = enumerate_expansions(g)
    index = {e.key: i for i, e in enumerate(exps)}
    rng = as_rng(seed)
    observed = [0] * len(exps)
    for _ in range(draws):
        key = sample_key(g, rng)
        observed[index[StarExpansion.from_key(g, key).key]] += 1
    if len(exps) == 1:
        return True, 1.0
    p = float(stats.chisquare(observed).pvalue)
    return p >= alpha, p


# -- driver --------------------------------------------------------------------

PER_INSTANCE: dict[str, Callable] = {
    "expansion_count": check_expansion_count,
    "u_cylinder_measure": check_u_measure,
    "v_cylinder_measure": check_v_measure_direct,
    "product_identity": check_product,
    "partition": check_partition,
    "rebase": check_rebase,
    "isomorphism_invariance": check_iso_invariance,
    "edge_recovery": check_recovery,
}


def run_selfcheck(
    max_vertices: int = 6,
    max_columns: int = 3,
    seed: int = 0,
    draws: int = 20_000,
    intersect_up_to: int = 4,
    filter_up_to: int = 5,
    jobs: int = 1,
) -> dict[str, Outcome]:
    """Run every identity over the small instances; returns outcomes by name."""
    outcomes = {name: Outcome(name) for name in PER_INSTANCE}
    outcomes["intersect_U"] = Outcome("intersect_U")
    outcomes["sampler_chi2"] = Outcome("sampler_chi2")
    rng = as_rng(seed)
    for g in small_instances(max_vertices, max_columns):
        exps = enumerate_expansions(g, jobs=jobs)
        for name, check in PER_INSTANCE.items():
            start = time.perf_counter()
            if name == "expansion_count":
                check(g, exps, outcomes[name], filter_up_to=filter_up_to)
            elif name == "u_cylinder_measure":
                check(g, exps, outcomes[name], rng=rng)
            else:
                check(g, exps, outcomes[name])
            outcomes[name].seconds += time.perf_counter() - start
        if len(g) <= intersect_up_to:
            start = time.perf_counter()
            check_intersections(g, exps, outcomes["intersect_U"])
            outcomes["intersect_U"].seconds += time.perf_counter() - start
    start = time.perf_counter()
    for sizes in [(1, 1), (2, 1), (2, 2)]:
        g = small_profile(sizes)
        ok, p = sampler_chi2(g, draws, rng)
        outcomes["sampler_chi2"].record(ok, (sizes, p))
    outcomes["sampler_chi2"].seconds = time.perf_counter() - start
    return outcomes


def small_profile(sizes: Sequence[int]) -> SemiDigraph:
    """A fixed structure with the given column sizes (edges from lower to higher columns)."""
    from .instances import from_layout

    rows = {
        (p, q): ([0] * sizes[p], [1] * sizes[q])
        for p, q in itertools.combinations(range(len(sizes)), 2)
    }
    return from_layout(sizes, rows)

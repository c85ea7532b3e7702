import itertools

import pytest

from semigeneric.core import (
    EMPTY,
    Rel,
    SemiDigraph,
    Violation,
    build,
    column_view,
    exists_forall_check,
    induced,
    is_partial_iso,
    is_valid,
    iter_parity_witnesses,
    same_class,
    sim_split,
    to_dot,
    validate,
)
from semigeneric.errors import (
    DuplicateEdge,
    InvalidGraph,
    OppositeEdgePair,
    SelfLoop,
    UnknownVertex,
    VertexNotInColumn,
)
from semigeneric.instances import from_layout, random_semidigraph, small_instances

from conftest import FIG_LEFT, FIG_MIDDLE, FIG_RIGHT
from oracles import naive_in_S


def test_three_configurations_are_valid():
    for edges in (FIG_LEFT, FIG_MIDDLE, FIG_RIGHT):
        assert isinstance(validate(range(4), edges), SemiDigraph)


def test_single_column_without_edges_is_valid():
    g = validate([5, 6, 7], [])
    assert isinstance(g, SemiDigraph)
    assert g.columns == ((5, 6, 7),)


def test_odd_count_reports_lexicographic_witness():
    v = validate(range(4), [[0, 2], [0, 3], [1, 2], [3, 1]])
    assert v == Violation("parity", (0, 1, 2, 3))
    assert v.to_json() == {"kind": "parity", "witness": [0, 1, 2, 3]}


def test_perp_transitivity_witness():
    # 0 perp 1, 1 perp 2, but 0 -> 2
    v = validate(range(3), [[0, 2]])
    assert v.kind == "perp"
    assert v.witness == (0, 1, 2)


@pytest.mark.parametrize(
    "edges, exc",
    [([[0, 0]], SelfLoop), ([[0, 1], [0, 1]], DuplicateEdge), ([[0, 1], [1, 0]], OppositeEdgePair)],
)
def test_malformed_input(edges, exc):
    with pytest.raises(exc):
        validate([0, 1], edges)


def test_malformed_checked_before_class_conditions():
    # would also fail transitivity, but the self loop is reported first
    with pytest.raises(SelfLoop):
        validate(range(3), [[0, 2], [1, 1]])


def test_unknown_endpoint():
    with pytest.raises(UnknownVertex):
        validate([0], [[0, 9]])


def test_build_raises_on_violation():
    with pytest.raises(InvalidGraph) as info:
        build(range(3), [[0, 2]])
    assert info.value.violation.kind == "perp"


def test_empty_and_single_vertex_valid():
    assert is_valid(EMPTY)
    assert is_valid(build([3], []))


def test_rel_is_antisymmetric(fig_right):
    g = fig_right
    for u, v in itertools.permutations(g.vertices, 2):
        r = g.rel(u, v)
        back = g.rel(v, u)
        assert (r, back) in {(Rel.FORWARD, Rel.BACKWARD), (Rel.BACKWARD, Rel.FORWARD), (Rel.PERP, Rel.PERP)}
    with pytest.raises(ValueError):
        g.rel(0, 0)


def test_json_round_trip(fig_middle):
    assert SemiDigraph.from_json(fig_middle.to_json()) == fig_middle


def test_column_view_single_column():
    g = build([0, 1, 2], [])
    view = column_view(g)
    assert view.columns == ((0, 1, 2),)
    assert dict(view.splits) == {}


def test_split_left_has_one_cell(fig_left):
    assert sim_split(fig_left, 0, 1) == ((0, 1),)


def test_split_middle_has_two_cells(fig_middle):
    assert sim_split(fig_middle, 0, 1) == ((0,), (1,))


def test_exists_forall_left(fig_left):
    assert exists_forall_check(fig_left, 0, 1, 0, 1) == (True, True)


def test_exists_forall_middle(fig_middle):
    assert exists_forall_check(fig_middle, 0, 1, 0, 1) == (False, False)


def test_exists_forall_reflexive_without_out_neighbour():
    # 1 is dominated by column {0}: no forward edge from 1 into it
    g = build([0, 1], [[0, 1]])
    assert exists_forall_check(g, 1, 0, 1, 1) == (True, False)
    assert exists_forall_check(g, 0, 1, 0, 0) == (True, True)


def test_exists_forall_rejects_foreign_vertex(fig_left):
    with pytest.raises(VertexNotInColumn):
        exists_forall_check(fig_left, 0, 1, 0, 2)
    with pytest.raises(ValueError):
        exists_forall_check(fig_left, 0, 0, 0, 1)


def test_cross_column_pairs_are_always_adjacent():
    # the reading under which the two sides agree whenever Q has an
    # out-neighbour of x: distinct columns are completely joined
    for g in small_instances(5, 3):
        for u, v in itertools.combinations(g.vertices, 2):
            assert g.perp(u, v) == (g.column_index(u) == g.column_index(v))


def test_induced_edge_cases(fig_right):
    assert induced(fig_right, fig_right.vertices) == fig_right
    assert induced(fig_right, []) == EMPTY
    with pytest.raises(UnknownVertex):
        induced(fig_right, [0, 17])


def test_partial_iso_examples(fig_left, fig_middle):
    assert is_partial_iso(fig_left, {0: 0, 2: 2})
    assert is_partial_iso(fig_left, {0: 2, 1: 3})
    # swapping the cells {0} and {1} of the middle split reverses 0 -> 2
    assert not is_partial_iso(fig_middle, {0: 1, 1: 0, 2: 2})
    assert not is_partial_iso(fig_left, {0: 2, 1: 2})


def test_parity_audit_lists_every_odd_quadruple():
    g = SemiDigraph(tuple(range(4)), frozenset({(0, 2), (0, 3), (1, 2), (3, 1)}))
    # both directions of the same pair of pairs are odd
    assert list(iter_parity_witnesses(g)) == [(0, 1, 2, 3), (2, 3, 0, 1)]
    assert list(iter_parity_witnesses(build(range(4), FIG_RIGHT))) == []


def test_fast_check_agrees_with_naive_definition():
    # every digraph on 4 vertices with a fixed edge-free pair
    pairs = list(itertools.combinations(range(4), 2))
    for states in itertools.product((0, 1, 2), repeat=len(pairs)):
        edges = []
        for (a, b), s in zip(pairs, states):
            if s == 1:
                edges.append([a, b])
            elif s == 2:
                edges.append([b, a])
        got = validate(range(4), edges)
        assert isinstance(got, SemiDigraph) == naive_in_S(range(4), edges), edges


def test_from_layout_columns():
    g = from_layout([2, 1], {(0, 1): ([0, 1], [0])})
    assert g.columns == ((0, 1), (2,))
    assert g.arrow(1, 2) and g.arrow(2, 0)
    assert same_class(g, 0, 0, 1)
    assert not same_class(g, 0, 1, 1)


def test_random_instances_valid():
    for seed in range(30):
        g = random_semidigraph(seed, 9)
        assert is_valid(g)
        assert random_semidigraph(seed, 9) == g


def test_small_instance_counts():
    # one per isomorphism class; two vertices: a perp pair or an edge
    assert len(list(small_instances(2, 2, min_vertices=2))) == 2
    # three vertices: one column; a pair and a singleton that dominates the
    # pair, is dominated by it, or splits it; a transitive or cyclic triangle
    assert len(list(small_instances(3, 3, min_vertices=3))) == 6


def test_dot_export(fig_middle):
    text = to_dot(fig_middle)
    assert text.startswith("digraph S {")
    assert "subgraph cluster_0" in text and "subgraph cluster_1" in text
    assert "  2 -> 1;" in text

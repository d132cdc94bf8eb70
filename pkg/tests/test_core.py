from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from endgraph.core import (
    EmptyExpansionError,
    Truncation,
    average_degree,
    boundaries,
    build_truncation,
    components,
    escape_components,
    format_vid,
    make_region,
    parse_vid,
    symmetry_violations,
)
from endgraph.families import FamilySpec, make_presentation

vids = st.lists(st.integers(min_value=0, max_value=10**6), min_size=1, max_size=8).map(tuple)


@given(vids)
def test_vid_text_roundtrip(v):
    assert parse_vid(format_vid(v)) == v


def test_parse_vid_rejects_garbage():
    with pytest.raises(ValueError):
        parse_vid("")
    with pytest.raises(ValueError):
        parse_vid("1/x")


def tree(r=3):
    return make_presentation(FamilySpec("tree", {"r": r}))


def test_tree_ball_counts():
    t = build_truncation(tree(), 2)
    # 1 + 3 + 6 vertices, a tree
    assert len(t) == 10
    assert t.number_of_edges() == 9
    assert t.frontier == {v for v, d in t.dist.items() if d == 2}


def test_degree_cap_marks_capped_vertices():
    p = make_presentation(FamilySpec("apex-tree", {"r": 3}))
    t = build_truncation(p, 1, degree_cap=5)
    assert len(t) == 6
    assert p.root in t.capped and p.root in t.frontier


def test_zero_cap_positive_radius_is_rejected():
    with pytest.raises(EmptyExpansionError):
        build_truncation(tree(), 1, degree_cap=0)


def test_hub_needs_a_cap():
    p = make_presentation(FamilySpec("apex-tree", {"r": 3}))
    with pytest.raises(ValueError):
        build_truncation(p, 1)


def test_barrier_keeps_hub_unexpanded():
    p = make_presentation(FamilySpec("apex-tree", {"r": 3}))
    e = p.ends[0]
    t = build_truncation(p, 3, root=e.ray(0), barrier=p.hubs)
    apex = next(iter(p.hubs))
    assert apex in t.frontier
    # the apex is still joined to every expanded tree vertex
    expanded = {v for v, d in t.dist.items() if d < 3 and v != apex}
    assert expanded <= t.adj[apex]


@pytest.mark.parametrize(
    "family,params,radius",
    [
        ("tree", {"r": 3}, 4),
        ("spanning-path-tree", {"r": 3}, 4),
        ("gamma", {"r": 4}, 4),
        ("chain", {"k": 3}, 4),
        ("planar-blowup", {"rounds": 2, "t": 3}, 5),
    ],
)
def test_oracles_are_symmetric(family, params, radius):
    t = build_truncation(make_presentation(FamilySpec(family, params)), radius)
    assert symmetry_violations(t) == []


def test_truncation_text_roundtrip():
    t = build_truncation(make_presentation(FamilySpec("chain", {"k": 3})), 2)
    text = t.to_text()
    assert text.splitlines()[0] == "endgraph-trunc v1"
    back = Truncation.from_text(text)
    assert back.adj == t.adj and back.frontier == t.frontier
    assert back.to_text() == text


@pytest.mark.parametrize(
    "text",
    ["", "V 0\n", "endgraph-trunc v1\nE 0 1\n", "endgraph-trunc v1\nV 0\nE 0 0\n", "endgraph-trunc v1\nQ 1\n"],
)
def test_truncation_text_rejects_malformed(text):
    with pytest.raises(ValueError):
        Truncation.from_text(text)


def test_chain_copy_boundary():
    t = build_truncation(make_presentation(FamilySpec("chain", {"k": 4})), 6, root=(3, 0))
    copy = {(3, j) for j in range(4)}
    b = boundaries(t, copy)
    assert b.vertex == copy and len(b.edge) == 32 and b.reliable


def test_region_ratio_is_exact_and_checks_connectivity():
    t = Truncation.from_edges([((0,), (1,)), ((1,), (2,)), ((2,), (3,))])
    reg = make_region(t, [(2,), (3,)])
    assert reg.ratio == Fraction(1)
    with pytest.raises(ValueError):
        make_region(t, [(0,), (3,)])


def test_empty_boundary_ratio_raises():
    t = Truncation.from_edges([((0,), (1,))])
    with pytest.raises(ValueError):
        _ = make_region(t, t.vertices).ratio


def test_boundary_on_frontier_is_unreliable():
    t = build_truncation(tree(), 2)
    leaf = next(iter(t.frontier))
    assert not boundaries(t, [leaf]).reliable


def test_average_degree_exact():
    t = Truncation.from_edges([((0,), (1,)), ((1,), (2,))])
    assert average_degree(t, t.vertices) == Fraction(4, 3)
    with pytest.raises(ValueError):
        average_degree(t, [])


def test_components_and_escapes():
    t = build_truncation(tree(), 3)
    comps = escape_components(t, [(0,)])
    assert len(comps) == 3 and all(esc for _, esc in comps)
    assert components(t.adj, [(0, 0), (0, 1)]) == [frozenset([(0, 0)]), frozenset([(0, 1)])]


def test_without_filters_oracle():
    p = make_presentation(FamilySpec("chain", {"k": 3}))
    q = p.without({(1, 0)})
    assert (1, 0) not in set(q.neighbors((1, 1)))
    assert (1, 0) in set(p.neighbors((1, 1)))


def test_dom_rejects_unknown_end():
    p = tree()
    q = make_presentation(FamilySpec("tree", {"r": 3, "ends_depth": 2}))
    with pytest.raises(KeyError):
        p.dom(q.ends[-1])

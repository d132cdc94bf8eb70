import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from endgraph.core import build_truncation
from endgraph.enddegree import NotFoundAtDepth
from endgraph.families import FamilySpec, make_presentation
from endgraph.minors import (
    MinorWitness,
    NotFound,
    TopoWitness,
    clique_minor_absence,
    find_clique_minor,
    find_topological_clique,
    permuted_presentation,
    tkk_from_dominators,
    verify_minor_witness,
    verify_topo_witness,
)

import oracles


def singletons(nodes):
    return MinorWitness(tuple(frozenset([v]) for v in nodes))


def test_verify_minor_examples():
    assert verify_minor_witness(nx.complete_graph(5), singletons(range(5)))[0]
    ok, problems = verify_minor_witness(nx.complete_graph(4), MinorWitness((frozenset({0, 1}), frozenset({1, 2}))))
    assert not ok and any("disjointness" in p for p in problems)
    ok, problems = verify_minor_witness(nx.cycle_graph(4), singletons(range(4)))
    assert not ok and any("adjacency" in p for p in problems)
    ok, problems = verify_minor_witness(nx.path_graph(4), MinorWitness((frozenset({0, 2}), frozenset({1}))))
    assert not ok and any("connectivity" in p for p in problems)


def test_verify_topo_examples():
    k4 = nx.complete_graph(4)
    w = TopoWitness(tuple(range(4)), tuple(itertools.combinations(range(4), 2)))
    assert verify_topo_witness(k4, w)[0]
    g = nx.complete_graph(5)
    bad = TopoWitness((0, 1, 2), ((0, 4, 1), (0, 4, 2), (1, 2)))
    ok, problems = verify_topo_witness(g, bad)
    assert not ok and any("internal disjointness" in p for p in problems)
    ok, problems = verify_topo_witness(g, TopoWitness((0, 1), ((0, 2),)))
    assert not ok and any("endpoint mismatch" in p for p in problems)


def test_witness_json_roundtrip():
    w = TopoWitness(((1, 0), (1, 1)), (((1, 0), (0,), (1, 1)),), depth=4)
    assert TopoWitness.from_json(w.to_json()) == w
    m = MinorWitness((frozenset({(0,), (1,)}), frozenset({(2,)})))
    assert MinorWitness.from_json(m.to_json()) == m


def test_complete_graph_minor():
    w = find_clique_minor(nx.complete_graph(6), 6)
    assert isinstance(w, MinorWitness) and all(len(b) == 1 for b in w.branch_sets)


def test_petersen_has_k5_minor_not_k6():
    g = nx.petersen_graph()
    w = find_clique_minor(g, 5, 10_000)
    assert isinstance(w, MinorWitness) and verify_minor_witness(g, w)[0]
    assert isinstance(find_clique_minor(g, 6, 2_000), NotFound)


def test_absence_certificates():
    assert find_clique_minor(nx.cycle_graph(6), 4).provably_absent
    assert find_clique_minor(nx.balanced_tree(2, 3), 3).provably_absent
    assert "planar" in find_clique_minor(nx.grid_2d_graph(4, 4), 5).certificate
    assert clique_minor_absence(nx.complete_graph(4), 4) is None


def test_topological_examples():
    w = find_topological_clique(nx.complete_graph(5), 5)
    assert isinstance(w, TopoWitness) and all(len(p) == 2 for p in w.paths)
    k33 = nx.complete_bipartite_graph(3, 3)
    sub = nx.Graph()
    for u, v in k33.edges():
        sub.add_edges_from([(u, (u, v)), ((u, v), v)])
    w = find_topological_clique(sub, 3)
    assert isinstance(w, TopoWitness) and verify_topo_witness(sub, w)[0]
    assert find_topological_clique(nx.balanced_tree(2, 3), 3).provably_absent


def small_graphs(max_n=6):
    return st.integers(min_value=2, max_value=max_n).flatmap(
        lambda n: st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n * (n - 1) // 2).map(
            lambda es: nx.Graph([(a, b) for a, b in es if a != b] or [(0, 1)])
        )
    )


@settings(max_examples=40, deadline=None)
@given(small_graphs(), st.integers(min_value=2, max_value=4))
def test_clique_minor_search_agrees_with_brute_force(g, k):
    res = find_clique_minor(g, k, 5_000)
    truth = oracles.brute_has_clique_minor(g, k)
    if isinstance(res, MinorWitness):
        assert truth and verify_minor_witness(g, res)[0]
    elif res.provably_absent:
        assert not truth


@settings(max_examples=40, deadline=None)
@given(st.integers(8, 20), st.floats(0.2, 0.6), st.integers(0, 10**6), st.integers(3, 5))
def test_found_minor_implies_smaller_found(n, prob, seed, k):
    g = nx.gnp_random_graph(n, prob, seed=seed)
    res = find_clique_minor(g, k, 20_000)
    if isinstance(res, MinorWitness):
        smaller = find_clique_minor(g, k - 1, 20_000)
        assert isinstance(smaller, MinorWitness) and verify_minor_witness(g, smaller)[0]


@settings(max_examples=30, deadline=None)
@given(st.integers(6, 16), st.floats(0.2, 0.7), st.integers(0, 10**6), st.integers(2, 5))
def test_topological_witnesses_verify(n, prob, seed, k):
    g = nx.gnp_random_graph(n, prob, seed=seed)
    res = find_topological_clique(g, k, 20_000)
    if isinstance(res, TopoWitness):
        assert verify_topo_witness(g, res)[0]


@pytest.mark.parametrize("radius", [2, 3, 4])
def test_gamma_and_blowup_have_no_k5(radius):
    for fam, params in (("gamma", {"r": 5}), ("planar-blowup", {"rounds": 2, "t": 3})):
        t = build_truncation(make_presentation(FamilySpec(fam, params)), radius)
        assert isinstance(find_clique_minor(t, 5, 10_000), NotFound)
        assert isinstance(find_topological_clique(t, 5, 10_000), NotFound)


def test_tkk_two_apexes():
    p = make_presentation(FamilySpec("apex-tree", {"r": 3, "apexes": 2}))
    e = p.ends[0]
    w = tkk_from_dominators(p, e, p.dom(e), 5)
    assert len(w.paths) == 1 and len(w.paths[0]) == 3


def test_tkk_three_apexes_verifies():
    p = make_presentation(FamilySpec("apex-tree", {"r": 3, "apexes": 3}))
    e = p.ends[0]
    w = tkk_from_dominators(p, e, p.dom(e), 6)
    t = build_truncation(p, 6, root=e.ray(0), barrier=p.all_dominators())
    assert verify_topo_witness(t, w)[0] and len(w.paths) == 3
    assert w.vertices() <= t.vertices


def test_tkk_empty_and_non_dominating():
    p = make_presentation(FamilySpec("apex-tree", {"r": 3}))
    e = p.ends[0]
    assert tkk_from_dominators(p, e, [], 4) == TopoWitness((), ())
    with pytest.raises(ValueError):
        tkk_from_dominators(p, e, [(0,)], 5)


def test_tkk_too_shallow():
    p = make_presentation(FamilySpec("apex-tree", {"r": 3, "apexes": 3}))
    e = p.ends[0]
    with pytest.raises((NotFoundAtDepth, ValueError)):
        tkk_from_dominators(p, e, p.dom(e), 1)


def test_permuted_presentation_is_isomorphic():
    p = make_presentation(FamilySpec("tree", {"r": 3}))
    q, fwd, back = permuted_presentation(p, 3)
    t = build_truncation(p, 3)
    u = build_truncation(q, 3)
    assert len(t) == len(u) and t.number_of_edges() == u.number_of_edges()
    assert all(back(fwd(v)) == v for v in t.vertices)
    assert {fwd(v) for v in t.vertices} == u.vertices

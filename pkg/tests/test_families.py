import networkx as nx
import pytest

from endgraph.core import build_truncation
from endgraph.families import (
    DepthError,
    FamilySpec,
    CanonicalSequenceKind,
    canonical_sequence,
    gamma_neighbors,
    make_presentation,
)
from endgraph.separators import explore

import oracles


@pytest.mark.parametrize(
    "manifest",
    [
        {"family": "tree", "params": {"r": 1}},
        {"family": "chain", "params": {}},
        {"family": "bogus", "params": {}},
        {"family": "tree", "params": {"r": 3, "ends_depth": -1}},
        {"family": "layered", "params": {"layers": [2, 0]}},
        {"family": "layered", "params": {"layers": [2], "edges": [[[1, 0], [1, 0]]]}},
        {"params": {}},
    ],
)
def test_bad_manifests(manifest):
    with pytest.raises(ValueError):
        FamilySpec.from_manifest(manifest)


def test_manifest_roundtrip():
    spec = FamilySpec("gamma", {"r": 5})
    assert FamilySpec.from_manifest(spec.to_manifest()) == spec


@pytest.mark.parametrize("r", [3, 4])
def test_tree_degrees(r):
    t = build_truncation(make_presentation(FamilySpec("tree", {"r": r})), 4)
    assert {len(t.adj[v]) for v in t.interior} == {r}


def test_chain_interior_degree():
    k = 4
    t = build_truncation(make_presentation(FamilySpec("chain", {"k": k})), 5, root=(3, 0))
    assert all(len(t.adj[v]) == 3 * k - 1 for v in t.interior if v[0] > 1)


@pytest.mark.parametrize("r", [4, 5, 6])
def test_gamma_matches_independent_construction(r):
    depth = 3
    g = oracles.gamma_graph(r, depth + 1)
    role = {0: "x", 1: "y", 2: "z"}
    for n in g:
        if len(n[1]) > depth:
            continue
        vid = (*n[1], "xyz".index(n[0]))
        mine = {(role[u[-1]], tuple(u[:-1])) for u in gamma_neighbors(r, vid)}
        assert mine == set(g[n]), n


@pytest.mark.parametrize(
    "family,params,radius",
    [("gamma", {"r": 5}, 4), ("planar-blowup", {"rounds": 2, "t": 3}, 6), ("spanning-path-tree", {"r": 3}, 4)],
)
def test_planar_families_are_planar(family, params, radius):
    t = build_truncation(make_presentation(FamilySpec(family, params)), radius)
    g = nx.Graph([(u, v) for u, v in t.edges()])
    assert nx.check_planarity(g)[0]


def test_planar_blowup_min_degree_below_top():
    p = make_presentation(FamilySpec("planar-blowup", {"rounds": 2, "t": 3}))
    assert p.info["min_degree_below_top"] == 6


def test_layered_family_is_finite():
    spec = FamilySpec("layered", {"layers": [1, 2], "edges": [[[1, 0], [2, 0]], [[1, 0], [2, 1]]]})
    p = make_presentation(spec)
    t = build_truncation(p, 5)
    assert t.number_of_edges() == 2 and not p.ends


def test_canonical_sequence_needs_depth():
    spec = FamilySpec("gamma", {"r": 4})
    p = make_presentation(spec)
    t = explore(p, p.ends[0], 2)
    with pytest.raises(DepthError):
        canonical_sequence(spec, CanonicalSequenceKind.GAMMA_H, p.ends[0], 3, t)


def test_canonical_sequence_family_mismatch():
    spec = FamilySpec("chain", {"k": 3})
    p = make_presentation(spec)
    t = explore(p, p.ends[0], 4)
    with pytest.raises(ValueError):
        canonical_sequence(spec, CanonicalSequenceKind.GAMMA_H, p.ends[0], 2, t)

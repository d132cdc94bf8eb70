from dataclasses import replace
from fractions import Fraction

import pytest

from endgraph.core import make_region
from endgraph.enddegree import (
    Caveat,
    NotFoundAtDepth,
    RegionSequence,
    check_sequence,
    cut_off_region,
    ratio_profile,
    region_sequence,
    relative_degree_estimate,
    shift_end,
)
from endgraph.families import CanonicalSequenceKind, FamilySpec, canonical_sequence, make_presentation
from endgraph.separators import explore

import oracles


def pres(family, **params):
    return make_presentation(FamilySpec(family, params))


def canonical(r, kind, steps, depth=5):
    spec = FamilySpec("gamma", {"r": r})
    p = make_presentation(spec)
    e = p.ends[0]
    regs = canonical_sequence(spec, kind, e, steps, explore(p, e, depth))
    return check_sequence(regs, e, frozenset([e.ray(0)]), steps)


@pytest.mark.parametrize("k", [3, 4])
def test_chain_sequence_boundaries_are_copies(k):
    seq = region_sequence(pres("chain", k=k), pres("chain", k=k).ends[0], 3, 7)
    assert seq.complete and seq.valid
    assert ratio_profile(seq) == [k, k, k]
    for reg in seq.regions:
        copies = {v[0] for v in reg.vertex_boundary}
        assert len(copies) == 1 and len(reg.vertex_boundary) == k


def test_tree_constructed_sequence():
    p = pres("tree", r=3)
    seq = region_sequence(p, p.ends[0], 3, 7)
    assert seq.valid
    # one boundary vertex; the region keeps only the child towards the end
    assert all(len(r.vertex_boundary) == 1 for r in seq.regions)
    assert ratio_profile(seq) == [2, 2, 2]


def test_apex_tree_sequence_avoids_the_apex():
    p = pres("apex-tree", r=3)
    seq = region_sequence(p, p.ends[0], 3, 7)
    apex = next(iter(p.hubs))
    assert seq.valid and all(apex not in r.members for r in seq.regions)


@pytest.mark.parametrize("r", [4, 5, 6])
def test_gamma_h_sequence_matches_oracle(r):
    seq = canonical(r, CanonicalSequenceKind.GAMMA_H, 3)
    g = oracles.gamma_graph(r, 7)
    expected = [oracles.boundary_ratio(g, oracles.gamma_h_members(g, (0,) * i)) for i in (1, 2, 3)]
    assert ratio_profile(seq) == expected == [1, 1, 1]
    # passes the real separation property but not the single-end variant
    assert all(seq.separation) and not any(seq.end_separation)


@pytest.mark.parametrize("r", [4, 5, 6])
def test_gamma_k_sequence_matches_oracle(r):
    seq = canonical(r, CanonicalSequenceKind.GAMMA_K, 2)
    g = oracles.gamma_graph(r, 7)
    expected = [oracles.boundary_ratio(g, oracles.gamma_k_members(g, r, (0,) * i, True)) for i in (1, 2)]
    assert ratio_profile(seq) == expected
    assert all(seq.end_separation)
    # odd r gives (r+2)/2; for even r one blue child fewer is red, giving (r+1)/2
    assert expected[0] == (Fraction(r + 2, 2) if r % 2 else Fraction(r + 1, 2))


def test_gamma_red_tail_k_region_oracle():
    r = 4
    g = oracles.gamma_graph(r, 6)
    members = oracles.gamma_k_members(g, r, (3,), False)
    # boundary {x_v, y_v} plus each red child's z; edges from the analysis
    blue, red = r // 2, (r - 1) - r // 2
    assert oracles.boundary_ratio(g, members) == Fraction(3 + 3 * blue + red, 2 + red)


def test_ratio_profile_rejects_unreliable_step():
    p = pres("tree", r=3)
    t = explore(p, p.ends[0], 2)
    leaf = next(v for v in t.frontier if v[:3] == (0, 0, 0))
    reg = make_region(t, [leaf])
    seq = RegionSequence((reg,), p.ends[0], frozenset([p.ends[0].ray(0)]))
    with pytest.raises(ValueError, match="step 0"):
        ratio_profile(seq)


@pytest.mark.parametrize(
    "family,params,expected",
    [("chain", {"k": 3}, 3), ("chain", {"k": 4}, 4), ("apex-tree", {"r": 3}, 2), ("tree", {"r": 3}, 1)],
)
def test_relative_degree_estimates(family, params, expected):
    p = make_presentation(FamilySpec(family, params))
    est = relative_degree_estimate(p, p.ends[0], 3, 6)
    assert est.estimate == expected and est.caveat is Caveat.EXACT_FOR_FAMILY
    assert all(x >= 1 for prof in est.profiles.values() for x in prof)
    assert est.estimate == est.dom_size + min(est.ratio_profile)


def test_gamma_estimate_is_one():
    p = pres("gamma", r=4)
    est = relative_degree_estimate(p, p.ends[0], 3, 6)
    assert est.estimate == 1 and est.to_json()["profile"] == ["1", "1", "1"]


def test_unknown_family_gets_upper_evidence():
    p = pres("spanning-path-tree", r=3)
    est = relative_degree_estimate(p, p.ends[0], 2, 6)
    assert est.caveat is Caveat.UPPER_EVIDENCE


def test_cut_off_chain_past_first_copy():
    p = pres("chain", k=4)
    avoid = {(1, j) for j in range(4)}
    reg = cut_off_region(p, p.ends[0], avoid, Fraction(3), 7)
    assert not reg.members & avoid and reg.ratio == 4


def test_cut_off_gamma_avoiding_first_level():
    p = pres("gamma", r=5)
    avoid = {(c, role) for c in range(5) for role in range(3)}
    reg = cut_off_region(p, p.ends[0], avoid, Fraction(1, 2), 6)
    assert not reg.members & avoid and reg.ratio > Fraction(1, 2)


def test_cut_off_apex_tree_subtracts_dominators():
    p = pres("apex-tree", r=3)
    reg = cut_off_region(p, p.ends[0], set(), Fraction(3, 2), 6)
    assert reg.ratio > Fraction(1, 2)
    assert not reg.members & p.hubs


def test_cut_off_not_found_when_ratio_unreachable():
    p = pres("chain", k=4)
    with pytest.raises(NotFoundAtDepth):
        cut_off_region(p, p.ends[0], set(), Fraction(4), 7)


def trimmed(p, removed, shift):
    end = shift_end(p.ends[0], shift)
    q = p.without(removed)
    return replace(q, ends=(end,), dominators={end.name: frozenset()}), end


@pytest.mark.parametrize(
    "family,params,removed",
    [("chain", {"k": 4}, {(1, j) for j in range(4)}), ("tree", {"r": 3}, {(0,)})],
)
def test_deleting_a_finite_piece_keeps_tail_ratios(family, params, removed):
    p = make_presentation(FamilySpec(family, params))
    before = ratio_profile(region_sequence(p, p.ends[0], 4, 8))
    q, end = trimmed(p, removed, 1)
    after = ratio_profile(region_sequence(q, end, 4, 8))
    assert sorted(before[1:]) == sorted(after[1:])


def test_alt_ratio_is_reported():
    p = pres("chain", k=3)
    est = relative_degree_estimate(p, p.ends[0], 2, 6)
    # each boundary copy spans 3 edges: (9 + 3) / 3
    assert est.alt_profile == (4, 4)

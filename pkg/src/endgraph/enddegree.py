"""Region sequences converging to an end and the relative end degree."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator

from .core import (
    EndHandle,
    GraphPresentation,
    Region,
    Truncation,
    Vid,
    components,
    format_vid,
    make_region,
)
from .families import CanonicalSequenceKind, DepthError, FamilySpec, canonical_sequence
from .separators import (
    explore,
    far_tail,
    is_minimal,
    min_vertex_separator,
    minimalize_separator,
    ray_vertices,
    separates,
)


class NotFoundAtDepth(LookupError):
    """The truncation ran out before a suitable region appeared."""


class Caveat(Enum):
    EXACT_FOR_FAMILY = "exact-for-family"
    UPPER_EVIDENCE = "upper-evidence"


@dataclass(frozen=True, eq=False)
class RegionSequence:
    regions: tuple
    end: EndHandle
    seed: frozenset
    nesting: tuple = ()
    separation: tuple = ()
    end_separation: tuple = ()
    omega_region: tuple = ()
    distinct: bool = True
    requested: int = 0

    @property
    def complete(self) -> bool:
        return len(self.regions) >= self.requested

    @property
    def valid(self) -> bool:
        return self.distinct and all(self.nesting) and all(self.separation) and all(self.omega_region)

    def __len__(self) -> int:
        return len(self.regions)


def shift_end(end: EndHandle, n: int) -> EndHandle:
    """The same end, with its canonical ray started ``n`` steps later."""
    ray = end.ray
    return replace(end, name=f"{end.name}>>{n}", ray=lambda i: ray(i + n))


def _tail_component(t: Truncation, sep: frozenset, tail: list) -> frozenset | None:
    anchor = tail[-1]
    if anchor in sep:
        return None
    for comp in components(t.adj, t.vertices - sep):
        if anchor in comp:
            return comp
    return None


def iter_constructed_regions(t: Truncation, end: EndHandle, seed: Iterable[Vid] | None = None) -> Iterator[Region]:
    """Regions built as in the existence proof for converging sequences.

    Starting from ``seed`` (default: the first ray vertex), each step takes
    for every vertex of the current boundary a minimum separator from the
    far ray tail, unites them, drops the old boundary, minimalizes, and
    forms the region spanned by the new boundary and the tail's component.
    Stops silently when the truncation cannot support another reliable
    region.
    """
    tail = far_tail(t, end)
    if not tail:
        return
    prev = frozenset(seed) if seed is not None else frozenset([end.ray(0)])
    seen = set()
    while True:
        cand: set = set()
        for v in sorted(prev):
            try:
                cand |= min_vertex_separator(t, {v}, tail, protect_targets=True).separator
            except ValueError:
                return
        cand -= prev
        if not cand or not separates(t.adj, cand, prev, tail):
            return
        sep = minimalize_separator(t, cand, prev, tail).separator
        comp = _tail_component(t, sep, tail)
        if comp is None:
            return
        members = frozenset(sep | comp)
        region = make_region(t, members)
        if not region.reliable or region.vertex_boundary != sep or members in seen:
            return
        seen.add(members)
        yield region
        prev = sep


def check_sequence(regions: list, end: EndHandle, seed: frozenset, requested: int = 0) -> RegionSequence:
    """Re-verify nesting, both separation variants and the end-region condition.

    ``separation`` is the real requirement (minimal separator from the
    previous boundary to every escaping vertex of the next region);
    ``end_separation`` only asks for the end's own ray tail.
    """
    nest, sepf, endsep, omega = [], [], [], []
    prev_members: frozenset | None = None
    prev_boundary = frozenset(seed)
    for reg in regions:
        t = reg.truncation
        s = reg.vertex_boundary
        if prev_members is None:
            nest.append(not (reg.members & prev_boundary))
        else:
            nest.append(reg.members <= prev_members - prev_boundary)
        escapes = (reg.members & t.frontier) - s
        sources = prev_boundary - s
        sepf.append(bool(escapes) and bool(sources) and is_minimal(t.adj, s, sources, escapes))
        tail = [v for v in far_tail(t, end) if v in reg.members and v not in s]
        endsep.append(bool(tail) and bool(sources) and is_minimal(t.adj, s, sources, tail))
        ray = ray_vertices(t, end)
        omega.append(bool(ray) and ray[-1] in reg.members and reg.reliable and bool(escapes))
        prev_members, prev_boundary = reg.members, s
    distinct = len({r.members for r in regions}) == len(regions)
    return RegionSequence(
        regions=tuple(regions), end=end, seed=frozenset(seed),
        nesting=tuple(nest), separation=tuple(sepf), end_separation=tuple(endsep),
        omega_region=tuple(omega), distinct=distinct, requested=requested,
    )


def g_omega(p: GraphPresentation, end: EndHandle) -> GraphPresentation:
    return p.without(p.dom(end))


def region_sequence(p: GraphPresentation, end: EndHandle, steps: int, depth: int) -> RegionSequence:
    """Converging sequence in ``G - Dom(end)``; may be shorter than ``steps``
    when ``depth`` is too small (check ``complete``)."""
    t = explore(g_omega(p, end), end, depth)
    seed = frozenset([end.ray(0)])
    regions = []
    for reg in iter_constructed_regions(t, end, seed):
        regions.append(reg)
        if len(regions) >= steps:
            break
    return check_sequence(regions, end, seed, steps)


def ratio_profile(seq: RegionSequence) -> list[Fraction]:
    out = []
    for i, reg in enumerate(seq.regions):
        if not reg.reliable:
            raise ValueError(f"region at step {i} is unreliable")
        out.append(reg.ratio)
    return out


@dataclass(frozen=True)
class DegreeEstimate:
    end: EndHandle
    dom_size: int
    ratio_profile: tuple
    estimate: Fraction
    caveat: Caveat
    profiles: dict = field(default_factory=dict, compare=False)
    alt_profile: tuple = ()

    def to_json(self) -> dict:
        return {
            "end": self.end.name,
            "dom": self.dom_size,
            "profile": [_q(x) for x in self.ratio_profile],
            "estimate": _q(self.estimate),
            "caveat": self.caveat.value,
            "sources": {k: [_q(x) for x in v] for k, v in sorted(self.profiles.items())},
            "alt_profile": [_q(x) for x in self.alt_profile],
        }


def _q(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def known_relative_degree(p: GraphPresentation) -> Fraction | None:
    """Closed-form relative end degree for families where it is known."""
    if p.family in ("tree", "gamma"):
        return Fraction(1)
    if p.family == "chain":
        return Fraction(p.params["k"])
    if p.family == "apex-tree":
        return Fraction(1 + p.params.get("apexes", 1))
    return None


_CANONICAL = {
    "gamma": (CanonicalSequenceKind.GAMMA_H, CanonicalSequenceKind.GAMMA_K),
    "chain": (CanonicalSequenceKind.CHAIN_TAIL,),
    "tree": (CanonicalSequenceKind.TREE_SUBTREE,),
    "apex-tree": (CanonicalSequenceKind.TREE_SUBTREE,),
    "spanning-path-tree": (CanonicalSequenceKind.TREE_SUBTREE,),
}


def relative_degree_estimate(p: GraphPresentation, end: EndHandle, steps: int, depth: int) -> DegreeEstimate:
    """|Dom(end)| plus the smallest ratio seen on any valid converging sequence.

    Sequences considered: the constructed one and the family's canonical
    ones, each kept only if it passes the separation-property check.
    """
    dom = p.dom(end)
    gp = g_omega(p, end)
    t = explore(gp, end, depth)
    if not ray_vertices(t, end) or end.ray(0) in dom:
        return DegreeEstimate(end, len(dom), (), Fraction(len(dom)), Caveat.EXACT_FOR_FAMILY)
    seed = frozenset([end.ray(0)])
    candidates = {}
    built = []
    for reg in iter_constructed_regions(t, end, seed):
        built.append(reg)
        if len(built) >= steps:
            break
    seq = check_sequence(built, end, seed, steps)
    if seq.regions and seq.valid:
        candidates["constructed"] = seq
    if p.family in _CANONICAL and p.params:
        spec = FamilySpec(p.family, p.params)
        for kind in _CANONICAL[p.family]:
            try:
                regs = canonical_sequence(spec, kind, end, steps, t)
            except (DepthError, ValueError):
                continue
            cseq = check_sequence(regs, end, seed, steps)
            if cseq.valid:
                candidates[kind.value] = cseq
    if not candidates:
        raise NotFoundAtDepth(f"no valid region sequence for {end.name} at depth {depth}")
    profiles = {name: ratio_profile(s) for name, s in candidates.items()}
    best = min(profiles, key=lambda n: (min(profiles[n]), n))
    estimate = len(dom) + min(profiles[best])
    known = known_relative_degree(p)
    caveat = Caveat.EXACT_FOR_FAMILY if known is not None and known == estimate else Caveat.UPPER_EVIDENCE
    alt = tuple(r.alt_ratio for r in candidates[best].regions)
    return DegreeEstimate(end, len(dom), tuple(profiles[best]), estimate, caveat,
                          {k: tuple(v) for k, v in profiles.items()}, alt)


def cut_off_in(
    t: Truncation,
    end: EndHandle,
    avoid: Iterable[Vid],
    threshold: Fraction,
) -> Region:
    """First region of the constructed sequence in ``t`` that lies past
    ``avoid`` and has boundary ratio greater than ``threshold``."""
    avoid = frozenset(avoid)
    ray = ray_vertices(t, end)
    if not ray:
        raise NotFoundAtDepth(f"ray of {end.name} not in truncation")
    # the proof waits for an index beyond every avoided vertex; testing
    # disjointness directly accepts the same regions and possibly earlier ones
    for reg in iter_constructed_regions(t, end, frozenset([ray[0]])):
        if not reg.members & avoid and reg.ratio > threshold:
            return reg
    raise NotFoundAtDepth(
        f"no region past the avoid set with ratio > {_q(threshold)} for {end.name} at radius {t.radius}"
    )


def cut_off_region(
    p: GraphPresentation,
    end: EndHandle,
    avoid: Iterable[Vid],
    m: Fraction,
    depth: int,
) -> Region:
    """A region of ``G - Dom(end)`` disjoint from ``avoid`` whose boundary
    ratio exceeds ``m - |Dom(end)|``."""
    dom = p.dom(end)
    t = explore(g_omega(p, end), end, depth)
    return cut_off_in(t, end, frozenset(avoid) - dom, Fraction(m) - len(dom))


def describe_region(reg: Region) -> dict:
    return {
        "size": len(reg.members),
        "vertex_boundary": [format_vid(v) for v in sorted(reg.vertex_boundary)],
        "edge_boundary": len(reg.edge_boundary),
        "ratio": _q(reg.ratio),
        "reliable": reg.reliable,
    }

"""Vertex separators, disjoint path packings and domination certificates."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

import networkx as nx

from .core import (
    EndHandle,
    GraphPresentation,
    Truncation,
    Vid,
    build_truncation,
    components,
    format_vid,
    iter_ray_in,
)


@dataclass(frozen=True)
class SeparatorResult:
    separator: frozenset
    side_source: frozenset = field(repr=False)
    side_target: frozenset = field(repr=False)
    minimal: bool
    reliable: bool

    def __len__(self) -> int:
        return len(self.separator)

    def to_json(self) -> dict:
        return {
            "separator": [format_vid(v) for v in sorted(self.separator)],
            "minimal": self.minimal,
            "reliable": self.reliable,
        }


def reachable(adj: Mapping, sources: Iterable[Vid], blocked: Iterable[Vid]) -> set:
    blocked = set(blocked)
    seen = {s for s in sources if s not in blocked}
    stack = list(seen)
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u not in seen and u not in blocked:
                seen.add(u)
                stack.append(u)
    return seen


def separates(adj: Mapping, separator, sources, targets) -> bool:
    """True when ``sources`` is not inside ``separator`` and no path in
    ``G - separator`` joins a source to a target outside the separator."""
    separator = frozenset(separator)
    sources = frozenset(sources)
    if sources <= separator:
        return False
    live_targets = frozenset(targets) - separator
    return not (reachable(adj, sources, separator) & live_targets)


def is_minimal(adj: Mapping, separator, sources, targets) -> bool:
    return separates(adj, separator, sources, targets) and all(
        not separates(adj, separator - {s}, sources, targets) for s in separator
    )


def _result(t: Truncation, sep: frozenset, sources, targets, minimal: bool) -> SeparatorResult:
    sources, targets = frozenset(sources), frozenset(targets)
    side_s, side_t = set(), set()
    for comp in components(t.adj, t.vertices - sep):
        if comp & sources:
            side_s |= comp
        if comp & (targets - sep):
            side_t |= comp
    return SeparatorResult(
        separator=sep,
        side_source=frozenset(side_s),
        side_target=frozenset(side_t),
        minimal=minimal,
        reliable=not (sep & t.capped),
    )


def _split_network(adj: Mapping, vertices, sources, targets, protect_targets: bool) -> nx.DiGraph:
    h = nx.DiGraph()
    h.add_node("S")
    h.add_node("T")
    for v in sorted(vertices):
        if v in sources or (protect_targets and v in targets):
            h.add_edge(("i", v), ("o", v))
        else:
            h.add_edge(("i", v), ("o", v), capacity=1)
    for v in sorted(vertices):
        for u in sorted(adj[v]):
            if u in vertices:
                h.add_edge(("o", v), ("i", u))
    for s in sorted(sources):
        h.add_edge("S", ("i", s))
    for x in sorted(targets):
        h.add_edge(("o", x), "T")
    return h


def min_vertex_separator(
    t: Truncation,
    sources: Iterable[Vid],
    targets: Iterable[Vid],
    *,
    protect_targets: bool = False,
) -> SeparatorResult:
    """Minimum vertex set avoiding ``sources`` that separates them from
    ``targets``.  Targets may be cut unless ``protect_targets`` is set.

    Among minimum separators the one closest to the sources is returned.
    Raises ``ValueError`` if no finite separator exists (only possible with
    ``protect_targets`` when a source is adjacent to a target).
    """
    sources, targets = frozenset(sources), frozenset(targets)
    if not sources or not targets:
        raise ValueError("sources and targets must be non-empty")
    if sources & targets:
        raise ValueError("sources and targets intersect")
    if not (sources | targets) <= t.vertices:
        raise ValueError("sources/targets not in truncation")
    h = _split_network(t.adj, t.vertices, sources, targets, protect_targets)
    try:
        _, flow = nx.maximum_flow(h, "S", "T")
    except nx.NetworkXUnbounded:
        raise ValueError("no finite separator: a source is adjacent to a protected target") from None
    reach = _residual_reach(h, flow)
    sep = frozenset(v for v in t.vertices if ("i", v) in reach and ("o", v) not in reach)
    return _result(t, sep, sources, targets, minimal=True)


def _residual_reach(h: nx.DiGraph, flow: Mapping) -> set:
    # source side of the cut nearest to S
    seen = {"S"}
    stack = ["S"]
    while stack:
        a = stack.pop()
        for b, attrs in h.succ[a].items():
            if b not in seen and flow[a][b] < attrs.get("capacity", float("inf")):
                seen.add(b)
                stack.append(b)
        for b in h.pred[a]:
            if b not in seen and flow[b][a] > 0:
                seen.add(b)
                stack.append(b)
    return seen


def minimalize_separator(
    t: Truncation,
    candidate: Iterable[Vid],
    sources: Iterable[Vid],
    escape_targets: Iterable[Vid],
) -> SeparatorResult:
    """Drop vertices of ``candidate`` greedily in vertex order while the rest
    still separates ``sources`` from ``escape_targets``."""
    sep = set(candidate)
    sources, escape_targets = frozenset(sources), frozenset(escape_targets)
    if not separates(t.adj, sep, sources, escape_targets):
        raise ValueError("candidate does not separate sources from targets")
    for v in sorted(candidate):
        trial = sep - {v}
        if separates(t.adj, trial, sources, escape_targets):
            sep = trial
    return _result(t, frozenset(sep), sources, escape_targets, minimal=True)


def disjoint_paths(
    adj: Mapping,
    sources: Iterable[Vid],
    targets: Iterable[Vid],
    *,
    shared_sources: bool = True,
    protect_targets: bool = False,
    allowed: Iterable[Vid] | None = None,
) -> list[list]:
    """Maximum family of source-target paths, pairwise vertex-disjoint except
    possibly in source vertices (``shared_sources``) or target vertices
    (``protect_targets``).  Plain augmenting paths, no library flow."""
    sources, targets = frozenset(sources), frozenset(targets)
    verts = set(adj) if allowed is None else set(allowed)
    big = len(verts) + 1
    cap: dict = {}

    def arc(a, b, c):
        cap.setdefault(a, {})
        cap.setdefault(b, {})
        cap[a][b] = cap[a].get(b, 0) + c
        cap[b].setdefault(a, 0)

    for v in sorted(verts):
        shared = (shared_sources and v in sources) or (protect_targets and v in targets)
        arc(("i", v), ("o", v), big if shared else 1)
        for u in adj[v]:
            if u in verts:
                arc(("o", v), ("i", u), big)
    for s in sources & verts:
        arc("S", ("i", s), big)
    for x in targets & verts:
        arc(("o", x), "T", big)
    if "S" not in cap or "T" not in cap:
        return []
    orig = {a: dict(b) for a, b in cap.items()}
    flow = 0
    while True:
        prev = {"S": None}
        queue = deque(["S"])
        while queue and "T" not in prev:
            a = queue.popleft()
            for b in sorted(cap[a], key=repr):
                if cap[a][b] > 0 and b not in prev:
                    prev[b] = a
                    queue.append(b)
        if "T" not in prev:
            break
        b = "T"
        while prev[b] is not None:
            a = prev[b]
            cap[a][b] -= 1
            cap[b][a] += 1
            b = a
        flow += 1
        if flow >= big:
            raise ValueError("unbounded packing: a shared source is adjacent to a protected target")
    used = {a: {b: orig[a][b] - cap[a][b] for b in orig[a] if orig[a][b] - cap[a][b] > 0} for a in orig}
    paths = []
    for _ in range(flow):
        node, walk = "S", []
        while node != "T":
            nxt = min(used[node], key=repr)
            used[node][nxt] -= 1
            if not used[node][nxt]:
                del used[node][nxt]
            if isinstance(nxt, tuple) and nxt[0] == "i":
                walk.append(nxt[1])
            node = nxt
        paths.append(_shortcut(walk))
    return paths


def _shortcut(walk: list) -> list:
    """Remove loops a flow decomposition can leave behind."""
    out: list = []
    pos: dict = {}
    for v in walk:
        if v in pos:
            del out[pos[v] + 1:]
            pos = {u: i for i, u in enumerate(out)}
        else:
            pos[v] = len(out)
            out.append(v)
    return out


# ---------------------------------------------------------------- ends


def explore(p: GraphPresentation, end: EndHandle, radius: int) -> Truncation:
    """Ball around the first vertex of the end's canonical ray; catalog
    dominators are kept behind a barrier."""
    return build_truncation(p, radius, root=end.ray(0), barrier=p.all_dominators())


def ray_vertices(t: Truncation, end: EndHandle) -> list:
    """The last unbroken run of the end's canonical ray inside ``t``.

    For a ball around the ray's first vertex this is just the leading part
    of the ray; in a sub-truncation that lost early ray vertices it is the
    surviving tail.
    """
    if end.ray(0) in t.adj:
        first = [v for _, v in iter_ray_in(t, end)]
        if first and t.dist.get(first[-1], 0) >= (t.radius or 0) - 1:
            return first
    limit = 4 * (t.radius or 0) + 16
    run: list = []
    best: list = []
    for i in range(limit):
        v = end.ray(i)
        if v in t.adj:
            run.append(v)
        else:
            if run:
                best = run
            run = []
    return run or best


def far_tail(t: Truncation, end: EndHandle, allowed=None) -> list:
    """Ray vertices in the outermost two distance layers of ``t``."""
    cutoff = (t.radius or 0) - 1
    return [v for v in ray_vertices(t, end) if t.dist.get(v, -1) >= cutoff and (allowed is None or v in allowed)]


class Verdict(Enum):
    DOMINATES_UP_TO = "dominates-up-to"
    SEPARATED_BY = "separated-by"


@dataclass(frozen=True)
class DominationCertificate:
    vertex: Vid
    end: EndHandle
    depth: int
    cut_profile: tuple
    verdict: Verdict
    separator: frozenset | None = None

    @property
    def dominates(self) -> bool:
        return self.verdict is Verdict.DOMINATES_UP_TO

    def to_json(self) -> dict:
        return {
            "vertex": format_vid(self.vertex),
            "end": self.end.name,
            "depth": self.depth,
            "cut_profile": [list(x) for x in self.cut_profile],
            "verdict": self.verdict.value,
            "separator": None if self.separator is None else [format_vid(v) for v in sorted(self.separator)],
        }


def domination_certificate(
    p: GraphPresentation, v: Vid, end: EndHandle, max_depth: int
) -> DominationCertificate:
    """Bounded-depth test of whether ``v`` can be finitely separated from ``end``.

    At each radius the minimum cut between ``v`` and the ray vertices lying
    beyond ``v`` is computed.  If the same cut works at two consecutive
    radii, and stays off the frontier, the verdict is SeparatedBy; otherwise
    DominatesUpTo(max_depth).
    """
    p.dom(end)  # raises for ends outside the catalog
    profile = []
    prev = None
    for radius in range(1, max_depth + 1):
        t = explore(p, end, radius)
        if v not in t:
            continue
        dv = t.dist[v]
        tail = [u for u in ray_vertices(t, end) if t.dist[u] > dv and u != v]
        if not tail:
            continue
        res = min_vertex_separator(t, {v}, tail)
        profile.append((radius, len(res.separator)))
        if prev is not None and res.separator == prev and separates(t.adj, prev, {v}, tail):
            return DominationCertificate(v, end, radius, tuple(profile), Verdict.SEPARATED_BY, prev)
        # a cut touching the frontier may only exist because the ball ends there;
        # hubs are exempt, every path using one passes through the cut anyway
        prev = None if (res.separator & t.frontier) - p.hubs else res.separator
    return DominationCertificate(v, end, max_depth, tuple(profile), Verdict.DOMINATES_UP_TO)


def end_vertex_degree(p: GraphPresentation, end: EndHandle, depth: int) -> tuple[int, bool]:
    """Lower-bound style estimate of the end's vertex-degree.

    For each radius ``3..depth`` the maximum number of disjoint paths from the
    radius-1 ball to the far ray tail is computed; the bound is the minimum
    over radii and ``stable`` says whether the last two radii agree.
    """
    p.dom(end)
    values = []
    for radius in range(3, max(depth, 3) + 1):
        t = explore(p, end, radius)
        ball = {u for u, d in t.dist.items() if d <= 1} - p.all_dominators()
        tail = [u for u in far_tail(t, end) if t.dist[u] >= 3]
        if not tail:
            continue
        paths = disjoint_paths(t.adj, ball, tail, shared_sources=True, protect_targets=True)
        values.append(len(paths))
    if not values:
        raise ValueError("depth too small to see the end's ray")
    stable = len(values) >= 2 and values[-1] == values[-2]
    return min(values), stable

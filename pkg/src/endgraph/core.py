"""Lazy graph presentations, finite truncations and boundary primitives.

Vertices are tuples of ints.  Tuples compare lexicographically, which gives
the total order used for every tie-break in the package.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping

Vid = tuple  # tuple[int, ...]
Edge = tuple  # (Vid, Vid) with first < second

HEADER = "endgraph-trunc v1"


class EmptyExpansionError(ValueError):
    """A positive radius was requested with a degree cap of zero."""


def format_vid(v: Vid) -> str:
    return "/".join(str(tok) for tok in v)


def parse_vid(text: str) -> Vid:
    text = text.strip()
    if not text:
        raise ValueError("empty vertex id")
    return tuple(int(tok) for tok in text.split("/"))


def edge_key(u: Vid, v: Vid) -> Edge:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class EndHandle:
    """Symbolic end together with a generator for one of its rays."""

    name: str
    ray: Callable[[int], Vid] = field(compare=False, repr=False)
    data: Mapping = field(default_factory=dict, compare=False, repr=False)

    def ray_prefix(self, n: int) -> list[Vid]:
        return [self.ray(i) for i in range(n)]


@dataclass(frozen=True, eq=False)
class GraphPresentation:
    """A possibly infinite graph given by a deterministic neighbour oracle.

    ``hubs`` lists vertices of infinite degree; they can only be explored
    with a degree cap or kept behind a barrier.
    """

    family: str
    params: Mapping
    neighbors: Callable[[Vid], Iterable[Vid]] = field(repr=False)
    root: Vid
    ends: tuple = ()
    dominators: Mapping[str, frozenset] = field(default_factory=dict)
    hubs: frozenset = frozenset()
    info: Mapping = field(default_factory=dict)

    @property
    def locally_finite(self) -> bool:
        return not self.hubs

    def end(self, name_or_index) -> EndHandle:
        if isinstance(name_or_index, int):
            return self.ends[name_or_index]
        for e in self.ends:
            if e.name == name_or_index:
                return e
        raise KeyError(f"end {name_or_index!r} not in catalog")

    def dom(self, end: EndHandle) -> frozenset:
        if end not in self.ends:
            raise KeyError(f"end {end.name!r} not in catalog")
        return frozenset(self.dominators.get(end.name, ()))

    def all_dominators(self) -> frozenset:
        out: set = set()
        for s in self.dominators.values():
            out |= s
        return frozenset(out)

    def without(self, removed: Iterable[Vid]) -> "GraphPresentation":
        """The induced presentation on all vertices except ``removed``."""
        removed = frozenset(removed)
        if not removed:
            return self
        base = self.neighbors

        def nbrs(v):
            return (u for u in base(v) if u not in removed)

        return replace(
            self,
            neighbors=nbrs,
            dominators={name: s - removed for name, s in self.dominators.items()},
            hubs=self.hubs - removed,
            info={**self.info, "removed": tuple(sorted(removed))},
        )


@dataclass(frozen=True, eq=False)
class Truncation:
    """Finite explored portion of a presentation.

    ``adj`` is the induced graph on the explored vertex set (apart from
    pairs of capped vertices).  ``frontier`` holds every vertex whose
    neighbourhood may be incomplete.
    """

    adj: Mapping[Vid, frozenset] = field(repr=False)
    frontier: frozenset = frozenset()
    capped: frozenset = frozenset()
    dist: Mapping[Vid, int] = field(default_factory=dict, repr=False)
    root: Vid | None = None
    radius: int | None = None
    degree_cap: int | None = None
    presentation: GraphPresentation | None = field(default=None, repr=False)

    @property
    def vertices(self) -> frozenset:
        return frozenset(self.adj)

    @property
    def interior(self) -> frozenset:
        return frozenset(self.adj) - self.frontier

    def __len__(self) -> int:
        return len(self.adj)

    def __contains__(self, v) -> bool:
        return v in self.adj

    def neighbors(self, v: Vid) -> frozenset:
        return self.adj[v]

    def edges(self) -> list[Edge]:
        return sorted({edge_key(u, v) for u, nb in self.adj.items() for v in nb})

    def number_of_edges(self) -> int:
        return sum(len(nb) for nb in self.adj.values()) // 2

    def subgraph(self, members: Iterable[Vid]) -> "Truncation":
        """Induced sub-truncation; vertices that lost neighbours stay frontier only
        if they were frontier before (the lost neighbours are known)."""
        members = frozenset(members)
        adj = {v: self.adj[v] & members for v in members}
        return replace(
            self,
            adj=adj,
            frontier=self.frontier & members,
            capped=self.capped & members,
            dist={v: d for v, d in self.dist.items() if v in members},
        )

    def to_text(self) -> str:
        lines = [HEADER]
        lines += [f"V {format_vid(v)}" for v in sorted(self.adj)]
        lines += [f"F {format_vid(v)}" for v in sorted(self.frontier)]
        lines += [f"E {format_vid(u)} {format_vid(v)}" for u, v in self.edges()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Truncation":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows or " ".join(rows[0]) != HEADER:
            raise ValueError(f"missing header {HEADER!r}")
        adj: dict = {}
        frontier = set()
        for row in rows[1:]:
            tag = row[0]
            if tag == "V" and len(row) == 2:
                adj.setdefault(parse_vid(row[1]), set())
            elif tag == "F" and len(row) == 2:
                frontier.add(parse_vid(row[1]))
            elif tag == "E" and len(row) == 3:
                u, v = parse_vid(row[1]), parse_vid(row[2])
                if u not in adj or v not in adj:
                    raise ValueError(f"edge endpoint not declared: {' '.join(row)}")
                if u == v:
                    raise ValueError("self-loop in truncation file")
                adj[u].add(v)
                adj[v].add(u)
            else:
                raise ValueError(f"malformed line: {' '.join(row)}")
        if not frontier <= adj.keys():
            raise ValueError("frontier vertex not declared")
        return cls(adj={v: frozenset(nb) for v, nb in adj.items()}, frontier=frozenset(frontier))

    @classmethod
    def from_edges(cls, edges: Iterable, vertices: Iterable = ()) -> "Truncation":
        """A finite graph viewed as a truncation with empty frontier."""
        adj: dict = {v: set() for v in vertices}
        for u, v in edges:
            if u == v:
                raise ValueError("self-loop")
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        return cls(adj={v: frozenset(nb) for v, nb in adj.items()})


def build_truncation(
    p: GraphPresentation,
    radius: int,
    degree_cap: int | None = None,
    *,
    root: Vid | None = None,
    barrier: Iterable[Vid] = (),
) -> Truncation:
    """Breadth-first ball of ``radius`` around ``root`` (default ``p.root``).

    At most ``degree_cap`` neighbours are taken from any stream; vertices
    whose stream was cut are flagged capped.  ``barrier`` vertices are
    recorded when met but never expanded, which lets a ball grow around
    hubs without enumerating them.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if degree_cap is not None and degree_cap < 0:
        raise ValueError("degree_cap must be non-negative")
    if degree_cap == 0 and radius > 0:
        raise EmptyExpansionError("degree cap 0 cannot expand a positive radius")
    root = p.root if root is None else root
    barrier = frozenset(barrier)

    def stream(v) -> tuple[list, bool]:
        if degree_cap is None:
            if v in p.hubs:
                raise ValueError(f"vertex {format_vid(v)} has infinite degree; use a degree cap")
            return list(p.neighbors(v)), False
        got = list(itertools.islice(p.neighbors(v), degree_cap + 1))
        return got[:degree_cap], len(got) > degree_cap

    dist = {root: 0}
    queue = deque([root])
    expanded: dict = {}
    capped = set()
    while queue:
        v = queue.popleft()
        if dist[v] >= radius or (v in barrier and v != root):
            continue
        nbrs, cut = stream(v)
        expanded[v] = nbrs
        if cut:
            capped.add(v)
        for u in nbrs:
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)

    adj: dict = {v: set() for v in dist}
    for v, nbrs in expanded.items():
        for u in nbrs:
            if u == v:
                raise ValueError(f"self-loop at {format_vid(v)}")
            adj[v].add(u)
            adj[u].add(v)
    for v in dist:
        if v in expanded:
            continue
        if degree_cap is None and v in p.hubs:
            continue
        nbrs, cut = stream(v)
        if cut:
            capped.add(v)
        for u in nbrs:
            if u in adj:
                adj[v].add(u)
                adj[u].add(v)
    frontier = (set(dist) - set(expanded)) | capped
    return Truncation(
        adj={v: frozenset(nb) for v, nb in adj.items()},
        frontier=frozenset(frontier),
        capped=frozenset(capped),
        dist=dist,
        root=root,
        radius=radius,
        degree_cap=degree_cap,
        presentation=p,
    )


def symmetry_violations(t: Truncation) -> list[Edge]:
    """Edges (v, u) where u is in v's oracle stream but v is not in u's.

    Only interior vertices are checked, both streams re-enumerated.
    """
    p = t.presentation
    if p is None:
        return []
    bad = []
    for v in sorted(t.interior):
        for u in p.neighbors(v):
            if u in t.interior and v not in set(p.neighbors(u)):
                bad.append((v, u))
    return bad


@dataclass(frozen=True)
class Boundary:
    vertex: frozenset
    edge: frozenset
    reliable: bool = True


def boundaries(t: Truncation, members: Iterable[Vid]) -> Boundary:
    """Vertex- and edge-boundary of ``members`` inside ``t``.

    The result is unreliable when a boundary vertex may have neighbours the
    truncation does not know about.
    """
    members = frozenset(members)
    missing = members - t.vertices
    if missing:
        raise ValueError(f"members not in truncation: {sorted(missing)[:3]}")
    vb = set()
    eb = set()
    for v in members:
        for u in t.adj[v]:
            if u not in members:
                vb.add(v)
                eb.add(edge_key(v, u))
    reliable = not (vb & t.frontier)
    return Boundary(frozenset(vb), frozenset(eb), reliable)


def is_connected(adj: Mapping, members: Iterable[Vid]) -> bool:
    members = set(members)
    if not members:
        return False
    start = min(members)
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u in members and u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == len(members)


def components(adj: Mapping, allowed: Iterable[Vid]) -> list[frozenset]:
    """Connected components of the subgraph induced by ``allowed``, ordered by
    their least vertex."""
    allowed = set(allowed)
    out = []
    for s in sorted(allowed):
        if s not in allowed:
            continue
        comp = {s}
        allowed.discard(s)
        stack = [s]
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if u in allowed:
                    allowed.discard(u)
                    comp.add(u)
                    stack.append(u)
        out.append(frozenset(comp))
    return out


def escape_components(t: Truncation, removed: Iterable[Vid]) -> list[tuple[frozenset, bool]]:
    """Components of ``t - removed``; a component escapes when it holds a
    frontier vertex, the finite stand-in for containing a ray."""
    removed = frozenset(removed)
    comps = components(t.adj, t.vertices - removed)
    return [(c, bool(c & t.frontier)) for c in comps]


def average_degree(g, members: Iterable[Vid]) -> Fraction:
    """``2 e(G[members]) / |members|`` as an exact rational."""
    adj = g.adj if isinstance(g, Truncation) else g
    members = frozenset(members)
    if not members:
        raise ValueError("average degree of an empty vertex set is undefined")
    twice = sum(len(adj[v] & members) for v in members)
    return Fraction(twice, len(members))


def degree_into(adj: Mapping, sources: Iterable[Vid], target: Iterable[Vid]) -> Fraction:
    """Average over ``sources`` of the number of neighbours each has in ``target``."""
    sources = frozenset(sources)
    target = frozenset(target)
    if not sources:
        raise ValueError("empty source set")
    return Fraction(sum(len(adj[v] & target) for v in sources), len(sources))


@dataclass(frozen=True, eq=False)
class Region:
    """Connected induced subgraph of a truncation with its boundaries."""

    truncation: Truncation = field(repr=False)
    members: frozenset = field(repr=False)
    vertex_boundary: frozenset = frozenset()
    edge_boundary: frozenset = field(default=frozenset(), repr=False)
    reliable: bool = True

    @property
    def ratio(self) -> Fraction:
        if not self.vertex_boundary:
            raise ValueError("region has an empty vertex boundary")
        return Fraction(len(self.edge_boundary), len(self.vertex_boundary))

    @property
    def alt_ratio(self) -> Fraction:
        """(|edge boundary| + edges spanned by the vertex boundary) / |vertex boundary|."""
        inner = sum(len(self.truncation.adj[v] & self.vertex_boundary) for v in self.vertex_boundary) // 2
        return Fraction(len(self.edge_boundary) + inner, len(self.vertex_boundary))

    def __len__(self) -> int:
        return len(self.members)


def make_region(t: Truncation, members: Iterable[Vid]) -> Region:
    members = frozenset(members)
    if not is_connected(t.adj, members):
        raise ValueError("region members do not induce a connected subgraph")
    b = boundaries(t, members)
    return Region(t, members, b.vertex, b.edge, b.reliable)


def bfs_distances(adj: Mapping, sources: Iterable[Vid], allowed: Iterable[Vid] | None = None) -> dict:
    allowed = None if allowed is None else set(allowed)
    dist = {}
    queue: deque = deque()
    for s in sorted(sources):
        if allowed is None or s in allowed:
            dist[s] = 0
            queue.append(s)
    while queue:
        v = queue.popleft()
        for u in sorted(adj[v]):
            if u not in dist and (allowed is None or u in allowed):
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def iter_ray_in(t: Truncation, end: EndHandle, limit: int = 100000) -> Iterator[tuple[int, Vid]]:
    """Leading ray vertices of ``end`` that lie in ``t`` (stops at the first miss)."""
    for i in range(limit):
        v = end.ray(i)
        if v not in t.adj:
            return
        yield i, v

"""Complete minors and topological complete minors in finite graphs."""

from __future__ import annotations

import heapq
import itertools
import random
from collections import deque
from dataclasses import dataclass, field, replace
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
    parse_vid,
)
from .enddegree import NotFoundAtDepth
from .separators import domination_certificate, far_tail


def as_adjacency(g) -> dict:
    """Adjacency sets from a truncation, a networkx graph or a mapping."""
    if isinstance(g, Truncation):
        return {v: set(ns) for v, ns in g.adj.items()}
    if isinstance(g, nx.Graph):
        return {v: set(g[v]) - {v} for v in g}
    return {v: set(ns) for v, ns in g.items()}


def as_nx(g) -> nx.Graph:
    adj = as_adjacency(g)
    h = nx.Graph()
    h.add_nodes_from(adj)
    h.add_edges_from((u, v) for u, ns in adj.items() for v in ns if u != v)
    return h


# ---------------------------------------------------------------- witnesses


def _vid_json(v):
    return format_vid(v) if isinstance(v, tuple) else v


def _vid_back(x):
    return parse_vid(x) if isinstance(x, str) else x


@dataclass(frozen=True)
class MinorWitness:
    branch_sets: tuple

    @property
    def k(self) -> int:
        return len(self.branch_sets)

    def to_json(self) -> dict:
        return {
            "kind": "minor",
            "k": self.k,
            "branch_sets": [[_vid_json(v) for v in sorted(b)] for b in self.branch_sets],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MinorWitness":
        return cls(tuple(frozenset(_vid_back(v) for v in b) for b in data["branch_sets"]))


@dataclass(frozen=True)
class TopoWitness:
    branch_vertices: tuple
    paths: tuple
    depth: int | None = field(default=None, compare=False)

    @property
    def k(self) -> int:
        return len(self.branch_vertices)

    def vertices(self) -> frozenset:
        return frozenset(self.branch_vertices) | frozenset(v for p in self.paths for v in p)

    def to_json(self) -> dict:
        out = {
            "kind": "topo",
            "k": self.k,
            "branch_vertices": [_vid_json(v) for v in self.branch_vertices],
            "paths": [[_vid_json(v) for v in p] for p in self.paths],
        }
        if self.depth is not None:
            out["depth"] = self.depth
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "TopoWitness":
        return cls(
            tuple(_vid_back(v) for v in data["branch_vertices"]),
            tuple(tuple(_vid_back(v) for v in p) for p in data["paths"]),
            data.get("depth"),
        )


@dataclass(frozen=True)
class NotFound:
    reason: str  # "budget-exhausted" or "provably-absent"
    certificate: str = ""
    expansions: int = 0

    @property
    def provably_absent(self) -> bool:
        return self.reason == "provably-absent"

    def to_json(self) -> dict:
        return {"kind": "not-found", "reason": self.reason, "certificate": self.certificate,
                "expansions": self.expansions}


def _connected_in(adj, members) -> bool:
    members = set(members)
    if not members:
        return False
    start = next(iter(members))
    seen, stack = {start}, [start]
    while stack:
        v = stack.pop()
        for u in adj.get(v, ()):
            if u in members and u not in seen:
                seen.add(u)
                stack.append(u)
    return seen == members


def verify_minor_witness(g, w: MinorWitness) -> tuple[bool, list[str]]:
    adj = as_adjacency(g)
    problems = []
    sets = [frozenset(b) for b in w.branch_sets]
    for i, b in enumerate(sets):
        if not b:
            problems.append(f"empty branch set {i}")
        missing = [v for v in b if v not in adj]
        if missing:
            problems.append(f"vertex missing: {missing[0]!r}")
    for i, j in itertools.combinations(range(len(sets)), 2):
        if sets[i] & sets[j]:
            problems.append(f"disjointness: sets {i} and {j} share a vertex")
    for i, b in enumerate(sets):
        if b and all(v in adj for v in b) and not _connected_in(adj, b):
            problems.append(f"connectivity: set {i} is not connected")
    for i, j in itertools.combinations(range(len(sets)), 2):
        if not any(u in adj and adj[u] & sets[j] for u in sets[i]):
            problems.append(f"adjacency: no edge between sets {i} and {j}")
    return not problems, problems


def verify_topo_witness(g, w: TopoWitness) -> tuple[bool, list[str]]:
    adj = as_adjacency(g)
    problems = []
    branch = list(w.branch_vertices)
    k = len(branch)
    if len(set(branch)) != k:
        problems.append("branch vertices repeat")
    if len(w.paths) != k * (k - 1) // 2:
        problems.append(f"path count: {len(w.paths)} != {k * (k - 1) // 2}")
    for v in branch:
        if v not in adj:
            problems.append(f"vertex missing: {v!r}")
    wanted = {frozenset(p) for p in itertools.combinations(branch, 2)}
    seen_pairs = set()
    owner: dict = {}
    bset = set(branch)
    for idx, path in enumerate(w.paths):
        if len(path) < 2:
            problems.append(f"not a path: path {idx} too short")
            continue
        if len(set(path)) != len(path):
            problems.append(f"not a path: path {idx} repeats a vertex")
        for a, b in zip(path, path[1:]):
            if a not in adj or b not in adj[a]:
                problems.append(f"missing edge in path {idx}: {a!r}-{b!r}")
                break
        ends = frozenset((path[0], path[-1]))
        if ends not in wanted:
            problems.append(f"endpoint mismatch: path {idx}")
        elif ends in seen_pairs:
            problems.append(f"endpoint mismatch: pair of path {idx} already joined")
        seen_pairs.add(ends)
        for v in path[1:-1]:
            if v in bset:
                problems.append(f"internal disjointness: path {idx} passes branch vertex {v!r}")
            elif v in owner and owner[v] != idx:
                problems.append(f"internal disjointness: paths {owner[v]} and {idx} share {v!r}")
            owner[v] = idx
    return not problems, problems


# ---------------------------------------------------------------- absence certificates


def _reduces_series_parallel(adj: Mapping) -> bool:
    """True iff the graph has no K^4 minor (treewidth at most 2).

    Repeatedly delete vertices of degree <= 1 and suppress vertices of
    degree 2 (parallel edges merge); the graph empties exactly when it is
    K^4-minor-free.
    """
    h = {v: set(ns) - {v} for v, ns in adj.items()}
    queue = deque(sorted(h, key=repr))
    while queue:
        v = queue.popleft()
        if v not in h:
            continue
        ns = h[v]
        if len(ns) <= 2:
            for u in ns:
                h[u].discard(v)
            if len(ns) == 2:
                a, b = sorted(ns, key=repr)
                h[a].add(b)
                h[b].add(a)
            del h[v]
            queue.extend(ns)
    return not h


def _exhaustive_minor(adj: Mapping, k: int) -> MinorWitness | None:
    """All assignments of vertices to k branch sets or none; tiny graphs only."""
    verts = sorted(adj, key=repr)
    for labels in itertools.product(range(k + 1), repeat=len(verts)):
        sets = [set() for _ in range(k)]
        for v, lab in zip(verts, labels):
            if lab < k:
                sets[lab].add(v)
        if not all(sets):
            continue
        w = MinorWitness(tuple(frozenset(s) for s in sets))
        if verify_minor_witness(adj, w)[0]:
            return w
    return None


EXHAUSTIVE_LIMIT = 200_000


def clique_minor_absence(g, k: int) -> str | None:
    """A sound reason why ``K^k`` is not a minor of ``g``, or None."""
    h = as_nx(g)
    n, m = h.number_of_nodes(), h.number_of_edges()
    if k <= 0:
        return None
    if n < k:
        return f"only {n} vertices"
    if k >= 3:
        need = k * (k - 1) // 2
        if all(h.subgraph(c).number_of_edges() < need for c in nx.connected_components(h)):
            return f"every component has fewer than {need} edges"
        if nx.is_forest(h):
            return "graph is a forest"
    if k == 4 and _reduces_series_parallel(as_adjacency(h)):
        return "series-parallel reduction empties the graph"
    if k >= 5 and nx.check_planarity(h)[0]:
        return "graph is planar"
    if k >= 3:
        tw, _ = nx.algorithms.approximation.treewidth_min_fill_in(h)
        if tw <= k - 2:
            return f"tree decomposition of width {tw} < {k - 1}"
    return None


# ---------------------------------------------------------------- clique minor search


def _contraction_run(adj: Mapping, k: int, rng: random.Random | None, budget: list) -> MinorWitness | None:
    """Contract a minimum-degree vertex into the neighbour sharing the fewest
    neighbours with it, watching for a k-clique around the merged vertex."""
    h = {v: set(ns) - {v} for v, ns in adj.items()}
    bs = {v: frozenset([v]) for v in h}
    keys = {v: (rng.random() if rng else 0.0, repr(v)) for v in h}
    heap = [(len(ns), keys[v], v) for v, ns in h.items()]
    heapq.heapify(heap)

    def clique_at(u):
        if len(h[u]) < k - 1:
            return None
        sub = {w for w in h[u] if len(h[w]) >= k - 1}
        if len(sub) < k - 1:
            return None
        budget[0] -= 1
        g = nx.Graph()
        g.add_nodes_from(sub)
        g.add_edges_from((a, b) for a in sub for b in h[a] if b in sub)
        for c in nx.find_cliques(g):
            budget[0] -= 1
            if len(c) >= k - 1:
                return [u, *sorted(c, key=lambda x: keys[x])[: k - 1]]
            if budget[0] <= 0:
                return None
        return None

    for v in sorted(h, key=lambda x: keys[x]):
        c = clique_at(v)
        if c:
            return MinorWitness(tuple(bs[x] for x in c))
    while len(h) >= k and budget[0] > 0:
        d, _, v = heapq.heappop(heap)
        if v not in h or d != len(h[v]):
            continue
        budget[0] -= 1
        if not h[v]:
            del h[v]
            continue
        u = min(h[v], key=lambda x: (len(h[v] & h[x]), keys[x]))
        for w in h[v]:
            h[w].discard(v)
            if w != u:
                h[w].add(u)
                h[u].add(w)
        del h[v]
        bs[u] = bs[u] | bs[v]
        for w in h[u] | {u}:
            heapq.heappush(heap, (len(h[w]), keys[w], w))
        c = clique_at(u)
        if c:
            return MinorWitness(tuple(bs[x] for x in c))
    return None


def find_clique_minor(g, k: int, budget: int = 100_000) -> MinorWitness | NotFound:
    """Witness for ``K^k`` as a minor of the finite graph ``g`` or NotFound.

    The contraction process does not depend on ``k`` (only when it stops
    does), so finding ``K^k`` implies finding ``K^(k-1)`` with the same budget.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    adj = as_adjacency(g)
    reason = clique_minor_absence(adj, k)
    if reason:
        return NotFound("provably-absent", reason)
    if k == 1:
        return MinorWitness((frozenset([min(adj, key=repr)]),))
    if (k + 1) ** len(adj) <= EXHAUSTIVE_LIMIT:
        w = _exhaustive_minor(adj, k)
        return w if w else NotFound("provably-absent", "exhaustive search over all branch-set assignments")
    left = [budget]
    restart = 0
    while left[0] > 0:
        rng = None if restart == 0 else random.Random(restart)
        for comp in sorted(components(adj, adj), key=lambda c: (-len(c), min(c, key=repr)) if c else (0,)):
            if len(comp) < k:
                continue
            w = _contraction_run({v: adj[v] & comp for v in comp}, k, rng, left)
            if w is not None:
                ok, problems = verify_minor_witness(adj, w)
                if not ok:  # pragma: no cover - search and check disagree
                    raise AssertionError(problems)
                return w
            if left[0] <= 0:
                break
        restart += 1
    return NotFound("budget-exhausted", f"{restart} contraction runs", budget - left[0])


# ---------------------------------------------------------------- topological search


def _bfs_path(adj: Mapping, a, b, blocked: set, budget: list) -> list | None:
    prev = {a: None}
    queue = deque([a])
    while queue:
        v = queue.popleft()
        budget[0] -= 1
        if budget[0] <= 0:
            return None
        for u in sorted(adj[v], key=repr):
            if u in prev:
                continue
            if u == b:
                path = [b, v]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                return path[::-1]
            if u in blocked:
                continue
            prev[u] = v
            queue.append(u)
    return None


def _route(adj, branch, budget, order):
    used = set(branch)
    paths = {}
    for i, j in order:
        a, b = branch[i], branch[j]
        p = _bfs_path(adj, a, b, used, budget)
        if p is None:
            return None
        used.update(p)
        paths[(i, j)] = tuple(p)
    return tuple(paths[pair] for pair in itertools.combinations(range(len(branch)), 2))


def find_topological_clique(g, k: int, budget: int = 100_000) -> TopoWitness | NotFound:
    """Witness for a subdivided ``K^k`` in ``g`` or NotFound.

    Tries branch-vertex sets among the highest-degree vertices and routes
    the pairs greedily by shortest paths avoiding everything used so far.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    adj = as_adjacency(g)
    reason = clique_minor_absence(adj, k)
    if reason:
        return NotFound("provably-absent", reason)
    cands = sorted((v for v in adj if len(adj[v]) >= k - 1), key=lambda v: (-len(adj[v]), repr(v)))
    if len(cands) < k:
        return NotFound("provably-absent", f"fewer than {k} vertices of degree >= {k - 1}")
    left = [budget]
    pairs = list(itertools.combinations(range(k), 2))
    orders = [pairs, sorted(pairs, key=lambda p: (p[1] - p[0], p))]
    tried = 0
    for branch in itertools.combinations(cands, k):
        tried += 1
        for order in orders:
            paths = _route(adj, list(branch), left, order)
            if paths is not None:
                w = TopoWitness(tuple(branch), paths)
                ok, problems = verify_topo_witness(adj, w)
                if not ok:  # pragma: no cover
                    raise AssertionError(problems)
                return w
            if left[0] <= 0:
                return NotFound("budget-exhausted", f"{tried} branch sets tried", budget)
    return NotFound("budget-exhausted", f"all {tried} candidate sets failed", budget - left[0])


# ---------------------------------------------------------------- from dominators


def tkk_from_dominators(p: GraphPresentation, end: EndHandle, S: Iterable[Vid], depth: int) -> TopoWitness:
    """Subdivided ``K^|S|`` with branch vertices ``S``, all dominating ``end``.

    Branch vertices are added in vertex order; each new one is joined to the
    earlier ones, again in order, through the component of the remaining
    graph that holds the end's far ray tail.  Every vertex already used by
    the witness is avoided, not just ``S`` and the new star's paths.
    """
    branch = sorted(frozenset(S))
    if not branch:
        return TopoWitness((), (), depth)
    for s in branch:
        cert = domination_certificate(p, s, end, depth)
        if not cert.dominates:
            raise ValueError(f"{format_vid(s)} does not dominate {end.name} up to depth {depth}")
    t = build_truncation(p, depth, root=end.ray(0), barrier=p.all_dominators())
    missing = [s for s in branch if s not in t]
    if missing:
        raise NotFoundAtDepth(f"{format_vid(missing[0])} not within depth {depth}")
    tail = far_tail(t, end)
    used = set(branch)
    paths: dict = {}
    for i, s in enumerate(branch):
        for j in range(i):
            v = branch[j]
            comp = _escape_component(t, used, tail)
            if comp is None:
                raise NotFoundAtDepth(f"ray tail of {end.name} cut off at depth {depth}")
            path = _path_through(t.adj, s, v, comp)
            if path is None:
                raise NotFoundAtDepth(f"no {format_vid(s)}-{format_vid(v)} path through the end's component")
            used.update(path)
            paths[(j, i)] = tuple(path[::-1])
    ordered = tuple(paths[pair] for pair in itertools.combinations(range(len(branch)), 2))
    return TopoWitness(tuple(branch), ordered, depth)


def _escape_component(t: Truncation, used: set, tail: list) -> frozenset | None:
    live = [v for v in tail if v not in used]
    if not live:
        return None
    anchor = live[-1]
    for comp in components(t.adj, t.vertices - used):
        if anchor in comp:
            return comp
    return None


def _path_through(adj: Mapping, s, v, comp: frozenset) -> list | None:
    starts = sorted(adj[s] & comp)
    goals = adj[v] & comp
    if not starts or not goals:
        return None
    prev = {x: None for x in starts}
    queue = deque(starts)
    while queue:
        x = queue.popleft()
        if x in goals:
            path = [x]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return [s, *path[::-1], v]
        for y in sorted(adj[x]):
            if y in comp and y not in prev:
                prev[y] = x
                queue.append(y)
    return None


# ---------------------------------------------------------------- relabelling


def _digit_perm(n: int, rng: random.Random) -> tuple[dict, dict]:
    perm = list(range(n))
    rng.shuffle(perm)
    fwd = dict(enumerate(perm))
    return fwd, {b: a for a, b in fwd.items()}


def permuted_presentation(p: GraphPresentation, seed: int, span: int | None = None) -> tuple[GraphPresentation, callable, callable]:
    """Same graph with vertex ids re-canonicalized by a coordinate-wise
    permutation of the small integers and shuffled neighbour order.

    Returns ``(presentation, forward, backward)`` id maps.
    """
    rng = random.Random(seed)
    if span is None:
        span = max([int(x) for x in p.params.values() if isinstance(x, int)] + [2]) + 2
    fwd_d, back_d = _digit_perm(span, rng)

    def forward(v):
        return tuple(fwd_d.get(c, c) for c in v)

    def backward(v):
        return tuple(back_d.get(c, c) for c in v)

    base = p.neighbors
    hubs = frozenset(forward(v) for v in p.hubs)

    def nbrs(w):
        if w in hubs:
            return (forward(u) for u in base(backward(w)))
        out = [forward(u) for u in base(backward(w))]
        random.Random(hash((seed, w))).shuffle(out)
        return out

    ends = tuple(replace(e, ray=(lambda r: lambda i: forward(r(i)))(e.ray)) for e in p.ends)
    return (
        replace(
            p,
            neighbors=nbrs,
            root=forward(p.root),
            ends=ends,
            dominators={n: frozenset(forward(v) for v in s) for n, s in p.dominators.items()},
            hubs=hubs,
        ),
        forward,
        backward,
    )

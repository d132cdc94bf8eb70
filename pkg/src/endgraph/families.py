"""Concrete infinite graph families as lazy presentations.

Vertex encodings:

* tree-like families: ``(0, *address)``; apexes are ``(1, a)``
* gamma: ``(*address, role)`` with role 0, 1, 2 for the x, y, z path
* chain: ``(copy, index)`` with copies numbered from 1
* planar-blowup: ``(level, *ray_path, position)``
* layered: ``(layer, index)`` with layers numbered from 1

A tree address lists child indices.  The root has ``r`` children, every
other vertex ``r - 1``, so the tree is ``r``-regular.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping

from .core import (
    EndHandle,
    GraphPresentation,
    Region,
    Truncation,
    Vid,
    iter_ray_in,
    make_region,
)

FAMILIES = ("tree", "apex-tree", "spanning-path-tree", "gamma", "chain", "planar-blowup", "layered")


class DepthError(ValueError):
    """The truncation is too shallow for the requested regions."""


@dataclass(frozen=True)
class FamilySpec:
    family: str
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        validate(self)

    @classmethod
    def from_manifest(cls, data) -> "FamilySpec":
        if isinstance(data, (str, bytes)):
            data = json.loads(data)
        if not isinstance(data, dict) or "family" not in data:
            raise ValueError("manifest must be an object with a 'family' key")
        params = data.get("params", {})
        if not isinstance(params, dict):
            raise ValueError("manifest 'params' must be an object")
        return cls(data["family"], params)

    def to_manifest(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}

    def __hash__(self):
        return hash((self.family, json.dumps(self.params, sort_keys=True)))


def _positive(params, key, default=None):
    val = params.get(key, default)
    if not isinstance(val, int) or isinstance(val, bool) or val < 1:
        raise ValueError(f"parameter {key!r} must be a positive integer, got {val!r}")
    return val


def validate(spec: FamilySpec) -> None:
    f, ps = spec.family, spec.params
    if f not in FAMILIES:
        raise ValueError(f"unknown family {f!r}")
    if f in ("tree", "apex-tree", "spanning-path-tree", "gamma"):
        r = _positive(ps, "r")
        if r < 2:
            raise ValueError("trees need r >= 2")
        ed = ps.get("ends_depth", 1)
        if not isinstance(ed, int) or ed < 0:
            raise ValueError("ends_depth must be a non-negative integer")
    if f == "apex-tree":
        _positive(ps, "apexes", 1)
    if f == "chain":
        _positive(ps, "k")
    if f == "planar-blowup":
        _positive(ps, "rounds")
        _positive(ps, "t")
    if f == "layered":
        layers = ps.get("layers")
        if not isinstance(layers, list) or not layers or not all(
            isinstance(n, int) and n >= 1 for n in layers
        ):
            raise ValueError("layered needs 'layers': list of positive layer sizes")
        for e in ps.get("edges", []):
            (i, a), (j, b) = e
            if not (1 <= i <= len(layers) and 1 <= j <= len(layers)):
                raise ValueError(f"edge {e} refers to a missing layer")
            if not (0 <= a < layers[i - 1] and 0 <= b < layers[j - 1]):
                raise ValueError(f"edge {e} refers to a missing vertex")
            if (i, a) == (j, b):
                raise ValueError("self-loop in layered graph")


# ---------------------------------------------------------------- trees


def n_children(r: int, addr: tuple) -> int:
    return r if not addr else r - 1


def tree_level(r: int, depth: int) -> Iterator[tuple]:
    """Addresses at ``depth`` in lexicographic (= planar left-to-right) order."""
    if depth == 0:
        yield ()
        return
    yield from itertools.product(range(r), *[range(r - 1)] * (depth - 1))


def tree_bfs(r: int) -> Iterator[tuple]:
    for d in itertools.count():
        yield from tree_level(r, d)


def _level_shift(r: int, addr: tuple, step: int) -> tuple | None:
    """Predecessor (step -1) or successor (step +1) of ``addr`` on its level."""
    digits = list(addr)
    bases = [r] + [r - 1] * (len(addr) - 1)
    for pos in range(len(digits) - 1, -1, -1):
        nxt = digits[pos] + step
        if 0 <= nxt < bases[pos]:
            digits[pos] = nxt
            for q in range(pos + 1, len(digits)):
                digits[q] = 0 if step > 0 else bases[q] - 1
            return tuple(digits)
    return None


def branch_address(data: Mapping, level: int) -> tuple:
    prefix = tuple(data["prefix"])
    if level <= len(prefix):
        return prefix[:level]
    return prefix + (data["digit"],) * (level - len(prefix))


def branch_ends(r: int, depth: int, to_vid, digit: int = 0) -> tuple:
    ends = []
    for addr in tree_level(r, depth):
        data = {"prefix": addr, "digit": digit}
        name = "branch:" + ".".join(map(str, addr)) + f"+{digit}*"
        ends.append(EndHandle(name, _ray_fn(data, to_vid), data))
    return tuple(ends)


def _ray_fn(data, to_vid):
    return lambda i: to_vid(branch_address(data, i))


def branch_end(spec: FamilySpec, prefix: tuple, digit: int) -> EndHandle:
    """An extra (non-catalog) end following ``prefix`` and then ``digit`` forever."""
    r = spec.params["r"]
    if not 0 <= digit < r - 1:
        raise ValueError("digit must be a valid non-root child index")
    to_vid = _gamma_y if spec.family == "gamma" else _tree_vid
    data = {"prefix": tuple(prefix), "digit": digit}
    name = "branch:" + ".".join(map(str, prefix)) + f"+{digit}*"
    return EndHandle(name, _ray_fn(data, to_vid), data)


def _tree_vid(addr):
    return (0, *addr)


def _tree_neighbors(r: int, v: Vid) -> list:
    addr = v[1:]
    out = []
    if addr:
        out.append((0, *addr[:-1]))
    out.extend((0, *addr, c) for c in range(n_children(r, addr)))
    return out


def regular_tree(spec: FamilySpec) -> GraphPresentation:
    r = spec.params["r"]
    ends = branch_ends(r, spec.params.get("ends_depth", 1), _tree_vid)

    def nbrs(v):
        if v[0] != 0:
            raise KeyError(v)
        return _tree_neighbors(r, v)

    return GraphPresentation(
        family="tree", params=dict(spec.params), neighbors=nbrs, root=(0,),
        ends=ends, dominators={e.name: frozenset() for e in ends},
    )


def apex_tree(spec: FamilySpec) -> GraphPresentation:
    r = spec.params["r"]
    n_apex = spec.params.get("apexes", 1)
    apexes = [(1, a) for a in range(n_apex)]
    ends = branch_ends(r, spec.params.get("ends_depth", 1), _tree_vid)

    def nbrs(v):
        if v[0] == 1:
            others = (a for a in apexes if a != v)
            return itertools.chain(others, ((0, *addr) for addr in tree_bfs(r)))
        return _tree_neighbors(r, v) + apexes

    return GraphPresentation(
        family="apex-tree", params=dict(spec.params), neighbors=nbrs, root=apexes[0],
        ends=ends, dominators={e.name: frozenset(apexes) for e in ends},
        hubs=frozenset(apexes), info={"apexes": apexes},
    )


def spanning_path_tree(spec: FamilySpec) -> GraphPresentation:
    r = spec.params["r"]
    ends = branch_ends(r, spec.params.get("ends_depth", 1), _tree_vid)

    def nbrs(v):
        out = _tree_neighbors(r, v)
        addr = v[1:]
        for step in (-1, 1):
            w = _level_shift(r, addr, step)
            if w is not None and addr:
                out.append((0, *w))
        return out

    return GraphPresentation(
        family="spanning-path-tree", params=dict(spec.params), neighbors=nbrs, root=(0,),
        ends=ends, dominators={e.name: frozenset() for e in ends},
    )


# ---------------------------------------------------------------- gamma

X, Y, Z = 0, 1, 2


def _gamma_y(addr):
    return (*addr, Y)


def gamma_is_blue(r: int, child_index: int) -> bool:
    # the first floor(r/2) children of every vertex are blue; one of the two
    # child counts (r at the root, r - 1 elsewhere) is odd whatever r is
    return child_index < r // 2


def gamma_neighbors(r: int, v: Vid) -> list:
    *addr, role = v
    addr = tuple(addr)
    out = []
    kids = range(n_children(r, addr))
    if role == X:
        out.append((*addr, Y))
        if addr:
            parent = addr[:-1]
            out.append((*parent, X) if gamma_is_blue(r, addr[-1]) else (*parent, Y))
        out.extend((*addr, c, X) for c in kids if gamma_is_blue(r, c))
    elif role == Y:
        out.extend([(*addr, X), (*addr, Z)])
        if addr:
            out.append((*addr[:-1], Y))
        for c in kids:
            if gamma_is_blue(r, c):
                out.extend([(*addr, c, Y), (*addr, c, Z)])
            else:
                out.extend([(*addr, c, X), (*addr, c, Y)])
    elif role == Z:
        out.append((*addr, Y))
        if addr:
            parent = addr[:-1]
            out.append((*parent, Y) if gamma_is_blue(r, addr[-1]) else (*parent, Z))
        out.extend((*addr, c, Z) for c in kids if not gamma_is_blue(r, c))
    else:
        raise KeyError(v)
    return out


def gamma(spec: FamilySpec) -> GraphPresentation:
    r = spec.params["r"]
    ends = branch_ends(r, spec.params.get("ends_depth", 1), _gamma_y)
    return GraphPresentation(
        family="gamma", params=dict(spec.params), neighbors=lambda v: gamma_neighbors(r, v),
        root=(Y,), ends=ends, dominators={e.name: frozenset() for e in ends},
    )


# ---------------------------------------------------------------- chain


def complete_chain(spec: FamilySpec) -> GraphPresentation:
    k = spec.params["k"]

    def nbrs(v):
        i, j = v
        if i < 1 or not 0 <= j < k:
            raise KeyError(v)
        out = [(i - 1, b) for b in range(k)] if i > 1 else []
        out += [(i, b) for b in range(k) if b != j]
        out += [(i + 1, b) for b in range(k)]
        return out

    end = EndHandle("chain", lambda n: (n + 1, 0), {})
    return GraphPresentation(
        family="chain", params=dict(spec.params), neighbors=nbrs, root=(1, 0),
        ends=(end,), dominators={"chain": frozenset()},
    )


# ---------------------------------------------------------------- planar blow-up


def planar_blowup(spec: FamilySpec) -> GraphPresentation:
    rounds, t = spec.params["rounds"], spec.params["t"]

    def nbrs(v):
        level, *path = v
        *pre, z = path
        pre = tuple(pre)
        if not 1 <= level <= rounds or len(path) != level:
            raise KeyError(v)
        out = []
        if level < rounds:
            for p in (z - 1, z):
                out.extend((level + 1, *pre, p, j) for j in range(t))
        else:
            out.extend([(level, *pre, z - 1), (level, *pre, z + 1)])
        if level >= 2 and 0 <= z < t:
            *ppre, p = pre
            out.extend([(level - 1, *ppre, p), (level - 1, *ppre, p + 1)])
        return sorted(out)

    ends = []
    for level in range(1, rounds + 1):
        pre = (0,) * (level - 1)
        for sign in (1, -1):
            ends.append(_blowup_end(level, pre, sign, rounds, t))
    min_deg = 2
    return GraphPresentation(
        family="planar-blowup", params=dict(spec.params), neighbors=nbrs, root=(1, 0),
        ends=tuple(ends), dominators={e.name: frozenset() for e in ends},
        info={"min_degree": min_deg, "min_degree_below_top": 2 * t if rounds > 1 else 2},
    )


def _blowup_end(level, pre, sign, rounds, t) -> EndHandle:
    start = t if sign > 0 else -1

    def ray(i):
        j, odd = divmod(i, 2)
        if level == rounds:
            return (level, *pre, start + sign * i)
        z = start + sign * j
        if not odd:
            return (level, *pre, z)
        edge_pos = z if sign > 0 else z - 1
        return (level + 1, *pre, edge_pos, 0)

    name = f"blowup:{level}:{'.'.join(map(str, pre))}:{'+' if sign > 0 else '-'}"
    return EndHandle(name, ray, {"level": level, "sign": sign})


# ---------------------------------------------------------------- finite graphs


def finite_presentation(adj: Mapping, family: str = "finite", params=None) -> GraphPresentation:
    frozen = {v: tuple(sorted(nb)) for v, nb in adj.items()}
    if not frozen:
        raise ValueError("empty graph")
    return GraphPresentation(
        family=family, params=dict(params or {}), neighbors=lambda v: frozen[v],
        root=min(frozen), info={"finite": True, "vertices": tuple(sorted(frozen))},
    )


def layered(spec: FamilySpec) -> GraphPresentation:
    layers = spec.params["layers"]
    adj = {(i + 1, a): set() for i, n in enumerate(layers) for a in range(n)}
    for (i, a), (j, b) in spec.params.get("edges", []):
        adj[(i, a)].add((j, b))
        adj[(j, b)].add((i, a))
    return finite_presentation(adj, "layered", spec.params)


def make_presentation(spec: FamilySpec) -> GraphPresentation:
    builders = {
        "tree": regular_tree,
        "apex-tree": apex_tree,
        "spanning-path-tree": spanning_path_tree,
        "gamma": gamma,
        "chain": complete_chain,
        "planar-blowup": planar_blowup,
        "layered": layered,
    }
    return builders[spec.family](spec)


# ---------------------------------------------------------------- canonical sequences


class CanonicalSequenceKind(Enum):
    GAMMA_H = "gamma-h"
    GAMMA_K = "gamma-k"
    CHAIN_TAIL = "chain-tail"
    TREE_SUBTREE = "tree-subtree"


_KIND_FAMILY = {
    CanonicalSequenceKind.GAMMA_H: ("gamma",),
    CanonicalSequenceKind.GAMMA_K: ("gamma",),
    CanonicalSequenceKind.CHAIN_TAIL: ("chain",),
    CanonicalSequenceKind.TREE_SUBTREE: ("tree", "apex-tree", "spanning-path-tree"),
}


def _in_subtree(addr: tuple, top: tuple) -> bool:
    return addr[: len(top)] == top


def _gamma_members(t: Truncation, pred) -> frozenset:
    return frozenset(v for v in t.vertices if pred(tuple(v[:-1]), v[-1]))


def gamma_k_members(t: Truncation, r: int, v_addr: tuple, color_blue: bool) -> frozenset:
    """Members of K_v: x_v, y_v and the subtrees hanging off v's children of
    the given colour."""
    depth = len(v_addr)

    def pred(addr, role):
        if addr == v_addr:
            return role in (X, Y)
        if len(addr) > depth and addr[:depth] == v_addr:
            return gamma_is_blue(r, addr[depth]) == color_blue
        return False

    return _gamma_members(t, pred)


def canonical_sequence(
    spec: FamilySpec,
    kind: CanonicalSequenceKind,
    end: EndHandle,
    steps: int,
    t: Truncation,
) -> list[Region]:
    """The family's hand-made regions along ``end``, for sequence indices
    ``i = 2 .. steps + 1`` (index 1 is the whole graph for subtree-type
    regions and has an empty boundary)."""
    if spec.family not in _KIND_FAMILY[kind]:
        raise ValueError(f"{kind.value} does not apply to family {spec.family!r}")
    regions = []
    for i in range(2, steps + 2):
        if kind is CanonicalSequenceKind.CHAIN_TAIL:
            members = frozenset(v for v in t.vertices if v[0] >= i)
        elif kind is CanonicalSequenceKind.TREE_SUBTREE:
            top = branch_address(end.data, i - 1)
            members = frozenset(v for v in t.vertices if v[0] == 0 and _in_subtree(v[1:], top))
        elif kind is CanonicalSequenceKind.GAMMA_H:
            top = branch_address(end.data, i - 1)
            members = _gamma_members(t, lambda addr, role: _in_subtree(addr, top))
        else:
            top = branch_address(end.data, i - 1)
            nxt = branch_address(end.data, i)
            blue = gamma_is_blue(spec.params["r"], nxt[-1])
            members = gamma_k_members(t, spec.params["r"], top, blue)
        if not members:
            raise DepthError(f"region {i} is empty in this truncation")
        region = make_region(t, members)
        if not region.reliable or not region.vertex_boundary:
            raise DepthError(f"truncation too shallow for region {i} of {kind.value}")
        deepest = [v for _, v in _ray_tail(t, end)]
        if not deepest or deepest[-1] not in members:
            raise DepthError(f"region {i} does not reach the end's ray inside the truncation")
        regions.append(region)
    return regions


def _ray_tail(t, end):
    return list(iter_ray_in(t, end))

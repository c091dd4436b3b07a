"""Deterministic constructors for test spaces and covers."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any

import numpy as np

from aldkit.covers import Cover
from aldkit.errors import SizeOverflow, SpecMismatch
from aldkit.space import FiniteMetricSpace, ball, from_distance_matrix, from_graph

DEFAULT_SIZE_CAP = 5000

SPACE_KINDS = ("path", "cycle", "grid", "tree", "lamplighter")
COVER_KINDS = ("intervals", "boxes", "netballs")


@dataclass(frozen=True)
class SpaceSpec:
    kind: str
    n: int = 0
    width: int = 0
    height: int = 0
    valence: int = 0
    radius: int = 0

    def validate(self) -> None:
        need = {
            "path": ("n",),
            "cycle": ("n",),
            "grid": ("width", "height"),
            "tree": ("valence", "radius"),
            "lamplighter": ("radius",),
        }
        if self.kind not in need:
            raise SpecMismatch(f"unknown space kind {self.kind!r}")
        for name in need[self.kind]:
            if getattr(self, name) < (0 if name == "radius" else 1):
                raise SpecMismatch(f"{self.kind} needs a positive {name}")
        if self.kind == "cycle" and self.n < 3:
            raise SpecMismatch("a cycle needs at least 3 vertices")


@dataclass(frozen=True)
class CoverSpec:
    kind: str
    length: int = 0
    overlap: int = 0
    side: int = 0
    net_radius: float = 0.0
    ball_radius: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.kind in ("intervals", "boxes"):
            size = self.length if self.kind == "intervals" else self.side
            if size < 1 or self.overlap < 0 or self.overlap >= size:
                raise SpecMismatch(f"{self.kind} needs size >= 1 and 0 <= overlap < size")
        elif self.kind == "netballs":
            if self.net_radius < 0 or self.ball_radius < self.net_radius:
                raise SpecMismatch("net balls need 0 <= net_radius <= ball_radius to cover")
        else:
            raise SpecMismatch(f"unknown cover kind {self.kind!r}")


def _check_size(count: int, cap: int) -> None:
    if count > cap:
        raise SizeOverflow(f"space would have {count} points, above the cap of {cap}")


def path_space(n: int) -> FiniteMetricSpace:
    return generate_space(SpaceSpec("path", n=n))


def cycle_space(n: int) -> FiniteMetricSpace:
    return generate_space(SpaceSpec("cycle", n=n))


def grid_space(width: int, height: int) -> FiniteMetricSpace:
    return generate_space(SpaceSpec("grid", width=width, height=height))


def tree_space(valence: int, radius: int) -> FiniteMetricSpace:
    return generate_space(SpaceSpec("tree", valence=valence, radius=radius))


def lamplighter_space(radius: int) -> FiniteMetricSpace:
    return generate_space(SpaceSpec("lamplighter", radius=radius))


def generate_space(spec: SpaceSpec, size_cap: int = DEFAULT_SIZE_CAP) -> FiniteMetricSpace:
    spec.validate()
    meta: dict[str, Any] = {"kind": spec.kind}
    if spec.kind in ("path", "cycle"):
        n = spec.n
        _check_size(n, size_cap)
        i = np.arange(n)
        gap = np.abs(i[:, None] - i[None, :])
        dist = gap if spec.kind == "path" else np.minimum(gap, n - gap)
        meta["n"] = n
        return from_distance_matrix(dist, 1.0, meta=meta)
    if spec.kind == "grid":
        w, h = spec.width, spec.height
        _check_size(w * h, size_cap)
        coords = [(x, y) for y in range(h) for x in range(w)]
        c = np.array(coords)
        dist = np.abs(c[:, None, :] - c[None, :, :]).sum(axis=2)
        meta.update(width=w, height=h)
        return from_distance_matrix(dist, 1.0, [f"({x},{y})" for x, y in coords], meta)
    if spec.kind == "tree":
        return _tree_ball(spec.valence, spec.radius, size_cap, meta)
    return _lamplighter_ball(spec.radius, size_cap, meta)


def _tree_ball(valence: int, radius: int, cap: int, meta: dict[str, Any]) -> FiniteMetricSpace:
    """Ball in the ``valence``-regular tree; vertices are reduced child-index words."""
    words: list[tuple[int, ...]] = [()]
    edges = []
    frontier = [0]
    for depth in range(radius):
        nxt = []
        for v in frontier:
            w = words[v]
            branches = valence if depth == 0 else valence - 1
            for b in range(branches):
                _check_size(len(words) + 1, cap)
                words.append(w + (b,))
                edges.append((v, len(words) - 1, 1.0))
                nxt.append(len(words) - 1)
        frontier = nxt
    meta.update(valence=valence, radius=radius)
    labels = ["e" if not w else ".".join(map(str, w)) for w in words]
    return from_graph(len(words), edges, labels, meta)


LampElement = tuple[frozenset[int], int]


def lamplighter_neighbors(g: LampElement) -> list[LampElement]:
    """Right multiplication by the standard generators: cursor +-1, toggle at cursor."""
    lamps, pos = g
    return [(lamps, pos + 1), (lamps, pos - 1), (lamps ^ {pos}, pos)]


def _lamplighter_ball(radius: int, cap: int, meta: dict[str, Any]) -> FiniteMetricSpace:
    """Ball of the lamplighter Cayley graph carrying the genuine word metric.

    Geodesics between two points of ``B(r)`` stay inside ``B(2r)``, so
    distances are taken by breadth-first search in the larger ball and then
    restricted.
    """
    ident: LampElement = (frozenset(), 0)
    order = {ident: 0}
    queue = deque([ident])
    elems = [ident]
    while queue:
        g = queue.popleft()
        if order[g] == 2 * radius:
            continue
        for h in lamplighter_neighbors(g):
            if h not in order:
                order[h] = order[g] + 1
                elems.append(h)
                queue.append(h)
    inner = [g for g in elems if order[g] <= radius]
    _check_size(len(inner), cap)
    index = {g: i for i, g in enumerate(elems)}
    edges = []
    for g in elems:
        for h in lamplighter_neighbors(g):
            if h in index and index[g] < index[h]:
                edges.append((index[g], index[h], 1.0))
    big = from_graph(len(elems), edges)
    keep = np.array([index[g] for g in inner])
    dist = big.dist[np.ix_(keep, keep)]
    labels = [f"({','.join(map(str, sorted(l)))};{p})" for l, p in inner]
    meta.update(radius=radius)
    return from_distance_matrix(dist, 1.0, labels, meta)


def _require_path(space: FiniteMetricSpace) -> None:
    i = np.arange(space.n)
    if not np.array_equal(space.dist, np.abs(i[:, None] - i[None, :]).astype(float)):
        raise SpecMismatch("interval covers need a unit path metric")


def generate_cover(space: FiniteMetricSpace, spec: CoverSpec) -> Cover:
    spec.validate()
    if spec.kind == "intervals":
        _require_path(space)
        return Cover(space, _intervals(space.n, spec.length, spec.overlap))
    if spec.kind == "boxes":
        if space.meta.get("kind") != "grid":
            raise SpecMismatch("box covers need a grid space")
        w, h = space.meta["width"], space.meta["height"]
        sets = []
        for ys in _intervals(h, spec.side, spec.overlap):
            for xs in _intervals(w, spec.side, spec.overlap):
                sets.append([y * w + x for y in ys for x in xs])
        return Cover(space, sets)
    return Cover(space, net_balls(space, spec.net_radius, spec.ball_radius, spec.seed))


def _intervals(n: int, length: int, overlap: int) -> list[list[int]]:
    """Windows ``{s .. s+length}`` with starts stepping by ``length - overlap``, clipped."""
    step = length - overlap
    out = []
    s = 0
    while True:
        out.append(list(range(s, min(s + length, n - 1) + 1)))
        if s + length >= n - 1:
            return out
        s += step


def greedy_net(space: FiniteMetricSpace, net_radius: float, seed: int = 0) -> list[int]:
    """Points pairwise farther than ``net_radius`` apart, chosen greedily.

    Scans in ascending index order, or in a seeded permutation when ``seed`` is
    nonzero.
    """
    order = np.arange(space.n) if seed == 0 else np.random.default_rng(seed).permutation(space.n)
    net: list[int] = []
    for p in order:
        if not net or space.dist[p, net].min() > net_radius:
            net.append(int(p))
    return net


def net_balls(space: FiniteMetricSpace, net_radius: float, ball_radius: float, seed: int = 0) -> list[list[int]]:
    return [sorted(ball(space, p, ball_radius)) for p in greedy_net(space, net_radius, seed)]


def intervals_cover(space: FiniteMetricSpace, length: int, overlap: int) -> Cover:
    return generate_cover(space, CoverSpec("intervals", length=length, overlap=overlap))

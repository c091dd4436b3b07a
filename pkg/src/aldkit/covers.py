"""Covers of finite metric spaces and the statistics the depth functional consumes.

A cover is an ordered family: duplicate members are kept and counted, since
they change both the multiplicity at a point and the depth average.
"""

from __future__ import annotations

import bisect
import json
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

import numpy as np

from aldkit.errors import NotACover, SchemaError
from aldkit.space import INFINITE, FiniteMetricSpace, subset_diameter


class Cover:
    """A finite family of nonempty point sets whose union is the whole space."""

    def __init__(self, space: FiniteMetricSpace, sets: Iterable[Iterable[int]]):
        self.space = space
        normalized = []
        for j, s in enumerate(sets):
            members = tuple(sorted({int(i) for i in s}))
            if not members:
                raise NotACover(f"cover member {j} is empty")
            if members[0] < 0 or members[-1] >= space.n:
                raise SchemaError(f"cover member {j} references a point outside 0..{space.n - 1}")
            normalized.append(members)
        self.sets: tuple[tuple[int, ...], ...] = tuple(normalized)
        member = np.zeros((len(self.sets), space.n), dtype=bool)
        for j, s in enumerate(self.sets):
            member[j, list(s)] = True
        member.setflags(write=False)
        self.member = member
        uncovered = np.flatnonzero(~member.any(axis=0))
        if len(uncovered):
            raise NotACover(f"{len(uncovered)} point(s) not covered, first is {int(uncovered[0])}")

    def __len__(self) -> int:
        return len(self.sets)

    def __repr__(self) -> str:
        return f"Cover(n={self.space.n}, sets={len(self.sets)})"

    @cached_property
    def masks(self) -> tuple[int, ...]:
        """Members as Python int bitsets."""
        return tuple(sum(1 << i for i in s) for s in self.sets)

    @cached_property
    def multiplicities(self) -> np.ndarray:
        m = self.member.sum(axis=0)
        m.setflags(write=False)
        return m

    @cached_property
    def incidence(self) -> tuple[tuple[int, ...], ...]:
        """For each point, the indices of the members containing it, ascending."""
        cols = [[] for _ in range(self.space.n)]
        for j, s in enumerate(self.sets):
            for i in s:
                cols[i].append(j)
        return tuple(tuple(c) for c in cols)

    @cached_property
    def depths(self) -> tuple[np.ndarray, ...]:
        """Per member, the boundary distance of each of its points (in member order)."""
        dist = self.space.dist
        out = []
        for j, s in enumerate(self.sets):
            outside = np.flatnonzero(~self.member[j])
            if outside.size == 0:
                row = np.full(len(s), INFINITE)
            else:
                row = dist[np.ix_(np.asarray(s), outside)].min(axis=1)
            row.setflags(write=False)
            out.append(row)
        return tuple(out)

    def depths_at(self, x: int) -> list[tuple[int, float]]:
        """``(member index, boundary distance)`` for every member containing ``x``."""
        return [(j, float(self.depths[j][bisect.bisect_left(self.sets[j], x)])) for j in self.incidence[x]]

    def is_full(self, j: int) -> bool:
        return len(self.sets[j]) == self.space.n

    def to_json(self, space_ref: str = "") -> dict[str, Any]:
        return {"space": space_ref, "sets": [list(s) for s in self.sets]}


def multiplicity_at(cover: Cover, x: int) -> int:
    return int(cover.multiplicities[x])


def global_multiplicity(cover: Cover) -> int:
    return int(cover.multiplicities.max())


def uniform_bound(cover: Cover) -> float:
    """Largest member diameter: the least admissible uniform bound."""
    return max(subset_diameter(cover.space, s) for s in cover.sets)


def boundary_distance(cover: Cover, x: int, j: int) -> float:
    """``d(x, X \\ U_j)``; zero off the member, infinite when ``U_j`` is everything."""
    s = cover.sets[j]
    pos = bisect.bisect_left(s, x)
    if pos == len(s) or s[pos] != x:
        return 0.0
    return float(cover.depths[j][pos])


def threshold_adjacency(space: FiniteMetricSpace, lam: float) -> list[int]:
    """Bitset adjacency of the graph joining distinct points at distance <= lam."""
    adj = []
    for i in range(space.n):
        row = np.flatnonzero(space.dist[i] <= lam)
        adj.append(sum(1 << int(j) for j in row) & ~(1 << i))
    return adj


def _lowest(bits: int) -> int:
    return (bits & -bits).bit_length() - 1


def maximal_cliques(adj: Sequence[int]) -> Iterator[int]:
    """Bron-Kerbosch with Tomita pivoting over bitset adjacency.

    Yields each maximal clique once, as a bitset. Uses an explicit stack so
    complete graphs on a few thousand vertices do not hit the recursion limit.
    """
    n = len(adj)
    if n == 0:
        return

    def pivot_candidates(p: int, x: int) -> int:
        best, best_u = -1, 0
        px = p | x
        while px:
            u = _lowest(px)
            px &= px - 1
            c = (p & adj[u]).bit_count()
            if c > best:
                best, best_u = c, u
        return p & ~adj[best_u]

    full = (1 << n) - 1
    stack = [[0, full, 0, pivot_candidates(full, 0)]]
    while stack:
        frame = stack[-1]
        r, p, x, cand = frame
        if not p and not x:
            yield r
            stack.pop()
            continue
        if not cand:
            stack.pop()
            continue
        v = _lowest(cand)
        bit = 1 << v
        frame[3] = cand & ~bit
        frame[1] = p & ~bit
        frame[2] = x | bit
        np_, nx_ = p & adj[v], x & adj[v]
        if not np_ and not nx_:
            yield r | bit
            continue
        if not np_:
            continue  # not maximal: x blocks it
        stack.append([r | bit, np_, nx_, pivot_candidates(np_, nx_)])


def is_lebesgue_number(cover: Cover, lam: float) -> bool:
    """True when every subset of diameter <= lam lies inside some member.

    Subsets of diameter <= lam are exactly the cliques of the threshold graph,
    so it is enough to place each maximal clique.
    """
    masks = cover.masks
    for clique in maximal_cliques(threshold_adjacency(cover.space, lam)):
        if not any(clique & ~u == 0 for u in masks):
            return False
    return True


def lebesgue_number_exact(cover: Cover) -> float:
    """Largest realized distance (or 0) that is a Lebesgue number of the cover."""
    cand = cover.space.realized_distances()
    lo, hi = 0, len(cand) - 1  # cand[0] == 0 is always feasible
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if is_lebesgue_number(cover, float(cand[mid])):
            lo = mid
        else:
            hi = mid - 1
    return float(cand[lo])


def lebesgue_ball_lower_bound(cover: Cover) -> float:
    """Largest realized radius r such that every point has ball(x, r) inside a member.

    ``ball(x, r)`` fits in ``U`` exactly when ``r < d(x, X \\ U)``.
    """
    cand = cover.space.realized_distances()
    worst = float(cand[-1])
    for x in range(cover.space.n):
        deepest = max(d for _, d in cover.depths_at(x))
        if deepest == INFINITE:
            r = float(cand[-1])
        else:
            r = float(cand[np.searchsorted(cand, deepest, side="left") - 1])
        worst = min(worst, r)
    return worst


def load_cover(path: str | Path, space: FiniteMetricSpace) -> Cover:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise SchemaError(f"cover file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"cover file {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict) or "sets" not in data:
        raise SchemaError('cover JSON needs "sets"')
    return Cover(space, data["sets"])


def save_cover(cover: Cover, path: str | Path, space_ref: str = "") -> None:
    Path(path).write_text(json.dumps(cover.to_json(space_ref), sort_keys=True) + "\n")

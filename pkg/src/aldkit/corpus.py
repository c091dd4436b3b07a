"""A fixed, deterministic collection of (space, cover) instances used by the
verification suite and the tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from aldkit.covers import Cover
from aldkit.generators import (
    CoverSpec,
    cycle_space,
    generate_cover,
    grid_space,
    lamplighter_space,
    net_balls,
    path_space,
    tree_space,
)
from aldkit.space import FiniteMetricSpace, from_distance_matrix, from_graph


@dataclass(frozen=True, eq=False)
class Instance:
    name: str
    space: FiniteMetricSpace
    cover: Cover


def random_graph_space(rng: np.random.Generator, n: int, extra: float = 0.3, max_weight: int = 1) -> FiniteMetricSpace:
    """Connected graph on ``n`` vertices: a random spanning tree plus each other
    edge with probability ``extra``; integer weights in ``1..max_weight``."""
    order = rng.permutation(n)
    edges = []
    for i in range(1, n):
        u, v = int(order[i]), int(order[rng.integers(i)])
        edges.append((u, v, float(rng.integers(1, max_weight + 1))))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < extra:
                edges.append((u, v, float(rng.integers(1, max_weight + 1))))
    return from_graph(n, edges, meta={"kind": "random-graph"})


def random_euclidean_space(rng: np.random.Generator, n: int, scale: float = 10.0) -> FiniteMetricSpace:
    """``n`` random points in the plane; the separation constant is the closest pair."""
    pts = rng.random((n, 2)) * scale
    dist = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    sep = dist[np.triu_indices(n, 1)].min()
    return from_distance_matrix(dist, float(sep), meta={"kind": "euclidean"})


def random_cover(rng: np.random.Generator, space: FiniteMetricSpace) -> Cover:
    """Balls around a random net, with radii drawn from the realized distances."""
    radii = space.realized_distances()[1:]
    net_r = float(rng.choice(radii[: max(1, len(radii) // 4)]))
    ball_r = float(rng.choice(radii[radii >= net_r][:2]))
    return Cover(space, net_balls(space, net_r, ball_r, seed=int(rng.integers(1, 2**31))))


def _intervals(space: FiniteMetricSpace, length: int, overlap: int) -> Cover:
    return generate_cover(space, CoverSpec("intervals", length=length, overlap=overlap))


def _netballs(space: FiniteMetricSpace, net_r: float, ball_r: float) -> Cover:
    return generate_cover(space, CoverSpec("netballs", net_radius=net_r, ball_radius=ball_r))


def _boxes(space: FiniteMetricSpace, side: int, overlap: int) -> Cover:
    return generate_cover(space, CoverSpec("boxes", side=side, overlap=overlap))


def build_corpus(seed: int = 0) -> list[Instance]:
    out: list[Instance] = []
    p10 = path_space(10)
    out.append(Instance("path10-two-windows", p10, Cover(p10, [range(6), range(4, 10)])))
    for n, length, overlap in ((12, 4, 2), (30, 6, 3)):
        p = path_space(n)
        out.append(Instance(f"path{n}-intervals-{length}-{overlap}", p, _intervals(p, length, overlap)))
    for k in (4, 8, 16, 32):
        p = path_space(200)
        out.append(Instance(f"path200-intervals-{2 * k}-{k}", p, _intervals(p, 2 * k, k)))
    for n, net_r, ball_r in ((8, 1, 2), (12, 2, 3), (40, 3, 5)):
        c = cycle_space(n)
        out.append(Instance(f"cycle{n}-netballs-{net_r}-{ball_r}", c, _netballs(c, net_r, ball_r)))
    for (w, h), side, overlap in (((3, 3), 1, 0), ((8, 8), 4, 2), ((12, 5), 3, 1)):
        g = grid_space(w, h)
        out.append(Instance(f"grid{w}x{h}-boxes-{side}-{overlap}", g, _boxes(g, side, overlap)))
    g43 = grid_space(4, 3)
    out.append(Instance("grid4x3-netballs-1-2", g43, _netballs(g43, 1, 2)))
    for (val, rad), net_r, ball_r in (((3, 2), 1, 1), ((3, 4), 2, 3), ((4, 3), 1, 2)):
        t = tree_space(val, rad)
        out.append(Instance(f"tree{val}-{rad}-netballs-{net_r}-{ball_r}", t, _netballs(t, net_r, ball_r)))
    for rad, net_r, ball_r in ((2, 1, 1), (4, 2, 3)):
        lp = lamplighter_space(rad)
        out.append(Instance(f"lamplighter{rad}-netballs-{net_r}-{ball_r}", lp, _netballs(lp, net_r, ball_r)))
    rng = np.random.default_rng(seed)
    for i in range(6):
        n = int(rng.integers(6, 13))
        sp = random_graph_space(rng, n, extra=0.2, max_weight=2 if i % 2 else 1)
        out.append(Instance(f"random-graph-{i}-n{n}", sp, random_cover(rng, sp)))
    return out

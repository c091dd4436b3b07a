"""Finite discrete metric spaces and the distance primitives built on them."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from aldkit.errors import (
    AsymmetryError,
    DisconnectedGraph,
    DiscretenessViolation,
    SchemaError,
    TriangleViolation,
)

#: Distance to the empty set. Python's float infinity already orders above every
#: finite value and absorbs addition, which is all an extended distance needs.
INFINITE = math.inf

REAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Points ``0..n-1`` with a validated distance matrix.

    Instances are immutable; ``dist`` is a read-only array. Equality is
    identity, so covers and maps can refer to "the same space" cheaply.
    """

    dist: np.ndarray
    disc_const: float
    labels: tuple[str, ...] = ()
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(self.n)))

    @property
    def n(self) -> int:
        return int(self.dist.shape[0])

    def d(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    @property
    def is_integral(self) -> bool:
        return bool(np.all(self.dist == np.round(self.dist)))

    def diameter(self) -> float:
        return float(self.dist.max()) if self.n else 0.0

    def realized_distances(self) -> np.ndarray:
        """Sorted distinct distance values, including 0."""
        return np.unique(self.dist)

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"n": self.n, "labels": list(self.labels)}
        out["metric"] = {
            "kind": "matrix",
            "dist": [[_num(v) for v in row] for row in self.dist],
            "disc_const": _num(self.disc_const),
        }
        if self.meta:
            out["meta"] = self.meta
        return out


def _num(v: float) -> float | int:
    v = float(v)
    return int(v) if v.is_integer() else v


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _check_triangle(dist: np.ndarray, tol: float) -> None:
    n = dist.shape[0]
    for k in range(n):
        via = dist[:, k, None] + dist[None, k, :]
        bad = dist > via + tol
        if bad.any():
            i, j = map(int, np.argwhere(bad)[0])
            raise TriangleViolation(i, j, k, float(dist[i, j]), float(via[i, j]))


def from_distance_matrix(
    matrix: Sequence[Sequence[float]] | np.ndarray,
    disc_const: float,
    labels: Sequence[str] | None = None,
    meta: dict[str, Any] | None = None,
) -> FiniteMetricSpace:
    """Validate ``matrix`` as a discrete metric with constant ``disc_const``.

    Integer-valued matrices are checked exactly; real-valued ones with an
    absolute slack of 1e-9 on the triangle inequality.
    """
    try:
        dist = np.array(matrix, dtype=np.float64)
    except ValueError as exc:  # ragged rows
        raise SchemaError(f"distance matrix is not rectangular: {exc}") from None
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise SchemaError(f"distance matrix must be square, got shape {dist.shape}")
    if not disc_const > 0:
        raise SchemaError("disc_const must be positive")
    n = dist.shape[0]
    if not np.all(np.isfinite(dist)) or (dist < 0).any():
        raise SchemaError("distances must be finite and nonnegative")
    if n and np.any(np.diag(dist) != 0):
        raise SchemaError("diagonal of the distance matrix must be zero")
    asym = np.argwhere(dist != dist.T)
    if len(asym):
        i, j = map(int, asym[0])
        raise AsymmetryError(f"d({i},{j})={dist[i, j]} but d({j},{i})={dist[j, i]}")
    off = ~np.eye(n, dtype=bool)
    low = np.argwhere((dist < disc_const) & off)
    if len(low):
        i, j = map(int, low[0])
        raise DiscretenessViolation(i, j, float(dist[i, j]), disc_const)
    integral = bool(np.all(dist == np.round(dist)))
    _check_triangle(dist, 0.0 if integral else REAL_TOL)
    return FiniteMetricSpace(
        _freeze(dist),
        float(disc_const),
        tuple(labels) if labels is not None else (),
        dict(meta or {}),
    )


def from_graph(
    vertex_count: int,
    edges: Iterable[Sequence[float]],
    labels: Sequence[str] | None = None,
    meta: dict[str, Any] | None = None,
) -> FiniteMetricSpace:
    """Shortest-path metric of a connected, positively weighted graph."""
    edges = [(int(e[0]), int(e[1]), float(e[2]) if len(e) > 2 else 1.0) for e in edges]
    n = int(vertex_count)
    if n < 1:
        raise SchemaError("a space needs at least one point")
    rows, cols, vals = [], [], []
    for i, j, w in edges:
        if not (0 <= i < n and 0 <= j < n):
            raise SchemaError(f"edge ({i},{j}) references a missing vertex")
        if not w > 0:
            raise SchemaError(f"edge ({i},{j}) has nonpositive weight {w}")
        if i == j:
            continue
        rows += [i, j]
        cols += [j, i]
        vals += [w, w]
    # duplicate edges: coo->csr would sum them, so keep the lightest explicitly
    best: dict[tuple[int, int], float] = {}
    for i, j, w in zip(rows, cols, vals):
        best[(i, j)] = min(w, best.get((i, j), math.inf))
    if best:
        ij = np.array(list(best.keys()))
        graph = coo_matrix((list(best.values()), (ij[:, 0], ij[:, 1])), shape=(n, n)).tocsr()
    else:
        graph = coo_matrix((n, n)).tocsr()
    ncomp, comp = connected_components(graph, directed=False)
    if ncomp > 1:
        raise DisconnectedGraph(f"graph has {ncomp} components; vertex 0 reaches {int((comp == comp[0]).sum())} of {n}")
    dist = shortest_path(graph, method="D", directed=False)
    disc = min(best.values()) if best else 1.0
    return FiniteMetricSpace(
        _freeze(dist), float(disc), tuple(labels) if labels is not None else (), dict(meta or {})
    )


def ball(space: FiniteMetricSpace, center: int, radius: float) -> frozenset[int]:
    """Closed ball ``{y : d(center, y) <= radius}``."""
    return frozenset(int(i) for i in np.flatnonzero(space.dist[center] <= radius))


def subset_diameter(space: FiniteMetricSpace, points: Iterable[int]) -> float:
    idx = np.fromiter(points, dtype=np.intp)
    if idx.size == 0:
        return 0.0
    return float(space.dist[np.ix_(idx, idx)].max())


def bounded_geometry_profile(space: FiniteMetricSpace, radius: float) -> int:
    """Largest ball cardinality at the given radius."""
    return int((space.dist <= radius).sum(axis=1).max())


def load_space(path: str | Path) -> FiniteMetricSpace:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise SchemaError(f"space file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise SchemaError(f"space file {path} is not valid JSON: {exc}") from None
    return space_from_json(data)


def space_from_json(data: dict[str, Any]) -> FiniteMetricSpace:
    if not isinstance(data, dict) or "n" not in data or "metric" not in data:
        raise SchemaError('space JSON needs "n" and "metric"')
    n = data["n"]
    labels = data.get("labels")
    meta = data.get("meta")
    metric = data["metric"]
    kind = metric.get("kind")
    if kind == "matrix":
        dist = metric.get("dist")
        if dist is None or "disc_const" not in metric:
            raise SchemaError('matrix metric needs "dist" and "disc_const"')
        if len(dist) != n:
            raise SchemaError(f'"n"={n} but matrix has {len(dist)} rows')
        return from_distance_matrix(dist, metric["disc_const"], labels, meta)
    if kind == "graph":
        return from_graph(n, metric.get("edges", []), labels, meta)
    raise SchemaError(f"unknown metric kind {kind!r}")


def save_space(space: FiniteMetricSpace, path: str | Path) -> None:
    Path(path).write_text(json.dumps(space.to_json(), sort_keys=True) + "\n")

"""Deliberately naive reference computations.

These share no code with the main modules beyond plain lists of numbers, and
exist only to cross-check them: loops over raw distance matrices and subsets,
and an integer program for minimum-multiplicity covers.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

Matrix = Sequence[Sequence[float]]


def boundary_distance(dist: Matrix, member: Sequence[int], x: int) -> float:
    inside = set(member)
    if x not in inside:
        return 0.0
    best = math.inf
    for y in range(len(dist)):
        if y not in inside and dist[x][y] < best:
            best = dist[x][y]
    return best


def depth_mean(dist: Matrix, sets: Sequence[Sequence[int]], w: Callable[[float], float], x: int) -> float:
    total, count = 0.0, 0
    for s in sets:
        if x in s:
            total += w(boundary_distance(dist, s, x))
            count += 1
    return total / count


def witness_vectors(dist: Matrix, sets: Sequence[Sequence[int]], f: float, anchors: Sequence[int]) -> list[list[float]]:
    n = len(dist)
    out = []
    for x in range(n):
        v = [0.0] * n
        for s, a in zip(sets, anchors):
            v[a] += math.exp(boundary_distance(dist, s, x) / f) - 1.0
        out.append(v)
    return out


def variation_ratio(dist: Matrix, sets: Sequence[Sequence[int]], f: float, anchors: Sequence[int], R: float) -> float:
    vecs = witness_vectors(dist, sets, f, anchors)
    n = len(dist)
    best = 0.0
    for x in range(n):
        for y in range(n):
            if dist[x][y] < R:
                num = sum(abs(a - b) for a, b in zip(vecs[x], vecs[y]))
                best = max(best, num / sum(vecs[x]))
    return best


def _subset_diameters(dist: Matrix) -> list[float]:
    """Diameter of every subset, indexed by bitmask."""
    n = len(dist)
    diam = [0.0] * (1 << n)
    for mask in range(1, 1 << n):
        top = mask.bit_length() - 1
        rest = mask & ~(1 << top)
        d = diam[rest]
        for j in range(top):
            if rest >> j & 1:
                d = max(d, dist[top][j])
        diam[mask] = d
    return diam


def lebesgue_number(dist: Matrix, sets: Sequence[Sequence[int]]) -> float:
    """Largest realized distance (or 0) such that every subset of at most that
    diameter lies in a member, by enumerating all subsets."""
    n = len(dist)
    if n > 16:
        raise ValueError("brute force is limited to 16 points")
    diam = _subset_diameters(dist)
    masks = [sum(1 << i for i in s) for s in sets]
    # smallest diameter among subsets no member contains
    worst = math.inf
    for mask in range(1, 1 << n):
        if not any(mask & ~m == 0 for m in masks):
            worst = min(worst, diam[mask])
    realized = sorted({dist[i][j] for i in range(n) for j in range(n)})
    return max(r for r in realized if r < worst)


def small_subsets(dist: Matrix, cap: float) -> list[int]:
    """Bitmasks of all nonempty subsets with diameter <= cap."""
    diam = _subset_diameters(dist)
    return [m for m in range(1, 1 << len(dist)) if diam[m] <= cap]


def min_multiplicity_bruteforce(dist: Matrix, lam: float, cap: float) -> int:
    """Minimum multiplicity over every subfamily of every diameter-<=cap subset.

    Enumerates all ``2^|pool|`` subfamilies; only usable for about four points.
    """
    n = len(dist)
    pool = small_subsets(dist, cap)
    demands = small_subsets(dist, lam)
    if len(pool) > 20:
        raise ValueError("pool too large for full subfamily enumeration")
    best = math.inf
    for r in range(1, len(pool) + 1):
        for fam in itertools.combinations(pool, r):
            if all(any(d & ~s == 0 for s in fam) for d in demands):
                mult = max(sum(s >> p & 1 for s in fam) for p in range(n))
                best = min(best, mult)
    return int(best)


def min_multiplicity_milp(dist: Matrix, lam: float, cap: float) -> int:
    """Same optimum as :func:`min_multiplicity_bruteforce`, as a 0/1 program.

    Variables: one indicator per diameter-<=cap subset plus the multiplicity
    ``M``. Every diameter-<=lam subset must lie in a chosen set; every point
    lies in at most ``M`` chosen sets.
    """
    n = len(dist)
    pool = small_subsets(dist, cap)
    demands = small_subsets(dist, lam)
    nv = len(pool) + 1
    rows, lo, hi = [], [], []
    for d in demands:
        rows.append([1.0 if d & ~s == 0 else 0.0 for s in pool] + [0.0])
        lo.append(1.0)
        hi.append(np.inf)
    for p in range(n):
        rows.append([1.0 if s >> p & 1 else 0.0 for s in pool] + [-1.0])
        lo.append(-np.inf)
        hi.append(0.0)
    c = np.zeros(nv)
    c[-1] = 1.0
    res = milp(
        c,
        constraints=LinearConstraint(np.array(rows), lo, hi),
        integrality=np.ones(nv),
        bounds=Bounds(np.zeros(nv), np.concatenate([np.ones(nv - 1), [len(pool)]])),
    )
    if not res.success:
        raise RuntimeError(f"integer program failed: {res.message}")
    return int(round(res.x[-1]))

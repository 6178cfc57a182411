"""Euclidean functionals: exact and heuristic TSP tours, strip tours with a
certified length bound, and exact minimum spanning trees.

The exact tour solver is the oracle for the heuristics and is capped at 13
points; larger instances use the deterministic strip + 2-opt pipeline,
which is itself a well-defined functional of the point set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, SizeLimitError

__all__ = ["Tour", "SpanningTree", "tsp_exact", "tsp_strip", "tsp_2opt",
           "mst_weight", "tour_length", "STRIP_TOUR_COEFF", "STRIP_TOUR_OFFSET"]

TSP_EXACT_MAX_POINTS = 13

# Certified constants of the boustrophedon strip tour: with ceil(sqrt(s))
# horizontal strips the route length never exceeds 3*alpha*sqrt(s) + 2*alpha.
STRIP_TOUR_COEFF = 3.0
STRIP_TOUR_OFFSET = 2.0


def _distance_matrix(points):
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    diff = pts[:, None, :] - pts[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


def tour_length(points, order):
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(order) < 2:
        return 0.0
    seq = pts[np.asarray(order)]
    closed = np.vstack([seq, seq[:1]])
    return float(np.sqrt(((closed[1:] - closed[:-1]) ** 2).sum(axis=1)).sum())


@dataclass
class Tour:
    """A closed tour: a permutation of point indices and its length."""

    order: np.ndarray
    length: float

    def __post_init__(self):
        self.order = np.asarray(self.order, dtype=np.int64)
        n = len(self.order)
        if sorted(self.order.tolist()) != list(range(n)):
            raise InvalidArgumentError("order must be a permutation of 0..n-1")

    @classmethod
    def of(cls, points, order):
        return cls(order=np.asarray(order, dtype=np.int64),
                   length=tour_length(points, order))


@dataclass
class SpanningTree:
    """A spanning tree as n-1 index pairs plus total edge weight."""

    edges: list
    weight: float


def tsp_exact(points):
    """Optimal closed tour by Held-Karp dynamic programming.

    Deterministic output: the lexicographically smallest optimal order
    (tours are cycles, so the order starts at index 0).  Limited to 13
    points.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n < 1:
        raise InvalidArgumentError("need at least one point")
    if n > TSP_EXACT_MAX_POINTS:
        raise SizeLimitError(
            f"exact tours are limited to {TSP_EXACT_MAX_POINTS} points, got {n}"
        )
    if n == 1:
        return Tour.of(pts, [0])
    if n == 2:
        return Tour.of(pts, [0, 1])
    d = _distance_matrix(pts)
    k = n - 1  # cities 1..n-1 encoded as bits 0..k-1
    full = (1 << k) - 1
    # cost[mask, j] = min length of a path 0 -> (mask minus j) -> j+1
    cost = np.full((1 << k, k), np.inf)
    for j in range(k):
        cost[1 << j, j] = d[0, j + 1]
    masks_by_pop = [[] for _ in range(k + 1)]
    for mask in range(1, full + 1):
        masks_by_pop[bin(mask).count("1")].append(mask)
    for pop in range(2, k + 1):
        for mask in masks_by_pop[pop]:
            bits = [j for j in range(k) if mask >> j & 1]
            idx = np.array(bits)
            for j in bits:
                prev = mask ^ (1 << j)
                prev_bits = idx[idx != j]
                cand = cost[prev, prev_bits] + d[prev_bits + 1, j + 1]
                cost[mask, j] = cand.min()
    closing = cost[full] + d[1:, 0]
    best = float(closing.min())
    # Greedy lexicographic reconstruction: extend with the smallest city
    # whose completion cost still meets the optimum.  The completion from
    # city j+1 through remaining\{j} back to 0 is the reverse of the path
    # 0 -> remaining\{j} -> j+1, i.e. cost[remaining, j] by symmetry.
    tol = 1e-9 * (1.0 + best)
    order = [0]
    remaining = full
    last = 0
    acc = 0.0
    while remaining:
        for j in range(k):
            if not remaining >> j & 1:
                continue
            step = d[last, j + 1]
            if acc + step + cost[remaining, j] <= best + tol:
                order.append(j + 1)
                acc += step
                last = j + 1
                remaining ^= 1 << j
                break
        else:  # pragma: no cover - the optimum is always completable
            raise RuntimeError("failed to reconstruct an optimal tour")
    return Tour(order=np.array(order), length=best)


def tsp_strip(points, alpha):
    """Boustrophedon tour over ceil(sqrt(s)) horizontal strips of an
    alpha-sided square; the returned length is asserted against the
    certified bound 3*alpha*sqrt(s) + 2*alpha."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    s = len(pts)
    if s == 0:
        return Tour(order=np.empty(0, dtype=np.int64), length=0.0)
    if alpha <= 0:
        raise InvalidArgumentError("alpha must be > 0")
    k = math.isqrt(s - 1) + 1 if s > 1 else 1  # ceil(sqrt(s))
    ymin = pts[:, 1].min()
    strip = np.minimum(((pts[:, 1] - ymin) / alpha * k).astype(int), k - 1)
    xs = pts[:, 0]
    order = []
    for band in range(k):
        members = np.flatnonzero(strip == band)
        if len(members) == 0:
            continue
        inner = members[np.argsort(xs[members], kind="stable")]
        if band % 2 == 1:
            inner = inner[::-1]
        order.extend(inner.tolist())
    tour = Tour.of(pts, order)
    limit = STRIP_TOUR_COEFF * alpha * math.sqrt(s) + STRIP_TOUR_OFFSET * alpha
    assert tour.length <= limit + 1e-9 * (1 + limit), (
        f"strip tour length {tour.length} exceeded its certificate {limit}"
    )
    return tour


def tsp_2opt(points, start: Tour, max_passes=50):
    """Improve a tour by 2-exchanges until no improvement remains or
    max_passes full sweeps have run.

    Deterministic: sweeps i in fixed ascending order and applies the first
    improving exchange for each i (segment order[i..j] is reversed).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if len(start.order) != n:
        raise InvalidArgumentError("start tour must cover exactly the given points")
    if n < 4:
        return Tour.of(pts, start.order)
    d = _distance_matrix(pts)
    order = start.order.copy()
    eps = 1e-12
    for _ in range(max_passes):
        improved = False
        for i in range(1, n - 1):
            a = order[i - 1]
            b = order[i]
            seg = order[i:]                      # candidates order[j], j >= i
            nxt = np.empty(n - i, dtype=np.int64)
            nxt[:-1] = order[i + 1:]
            nxt[-1] = order[0]
            delta = d[a, seg] + d[b, nxt] - d[a, b] - d[seg, nxt]
            hit = np.flatnonzero(delta < -eps)
            if len(hit):
                j = i + int(hit[0])
                order[i:j + 1] = order[i:j + 1][::-1]
                improved = True
        if not improved:
            break
    return Tour.of(pts, order)


def mst_weight(points):
    """Exact Euclidean minimum spanning tree by dense Prim."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n < 1:
        raise InvalidArgumentError("need at least one point")
    if n == 1:
        return SpanningTree(edges=[], weight=0.0)
    d = _distance_matrix(pts)
    in_tree = np.zeros(n, dtype=bool)
    best = d[0].copy()
    parent = np.zeros(n, dtype=np.int64)
    in_tree[0] = True
    best[0] = np.inf
    edges = []
    total = 0.0
    for _ in range(n - 1):
        v = int(np.argmin(best))
        total += float(best[v])
        edges.append((int(parent[v]), v))
        in_tree[v] = True
        closer = d[v] < best
        closer &= ~in_tree
        parent[closer] = v
        best = np.where(closer, d[v], best)
        best[v] = np.inf
    return SpanningTree(edges=edges, weight=total)

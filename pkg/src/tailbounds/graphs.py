"""Inhomogeneous random graphs, chromatic number, and the maximum average
degree of an edge-probability matrix.

mad() maximizes sum_{i,j in U} p_ij / |U| over vertex subsets, where the
double sum runs over ordered pairs (each unordered edge counts twice); the
brute-force oracle in the tests uses the same convention.
"""

from __future__ import annotations

import io
import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, SizeLimitError
from .harness.rng import substream

__all__ = ["EdgeProbabilityMatrix", "Graph", "sample_graph", "chromatic_exact",
           "chromatic_greedy", "mad", "mad_realized"]

CHROMATIC_EXACT_CAP = 30
CHROMATIC_TIME_BUDGET = 10.0
MAD_MAX_N = 200


@dataclass
class EdgeProbabilityMatrix:
    """Symmetric matrix of edge probabilities with zero diagonal."""

    p: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        n = self.p.shape[0]
        if self.p.shape != (n, n):
            raise InvalidArgumentError("p must be square")
        if not np.allclose(self.p, self.p.T, atol=1e-12):
            raise InvalidArgumentError("p must be symmetric")
        if np.any(np.diag(self.p) != 0):
            raise InvalidArgumentError("p must have a zero diagonal")
        if np.any((self.p < 0) | (self.p > 1)):
            raise InvalidArgumentError("entries must lie in [0, 1]")
        self.p = (self.p + self.p.T) / 2.0

    @property
    def n(self):
        return self.p.shape[0]

    @property
    def mean_probability(self):
        n = self.n
        if n < 2:
            return 0.0
        return float(np.triu(self.p, 1).sum() / (n * (n - 1) / 2))

    @classmethod
    def uniform(cls, n, prob):
        p = np.full((n, n), float(prob))
        np.fill_diagonal(p, 0.0)
        return cls(p)


@dataclass
class Graph:
    """Undirected loop-free graph with boolean adjacency."""

    adj: np.ndarray
    seed: int = 0

    def __post_init__(self):
        self.adj = np.asarray(self.adj, dtype=bool)
        n = self.adj.shape[0]
        if self.adj.shape != (n, n):
            raise InvalidArgumentError("adjacency must be square")
        if not (self.adj == self.adj.T).all() or self.adj.diagonal().any():
            raise InvalidArgumentError("adjacency must be symmetric and loop-free")

    @property
    def n(self):
        return self.adj.shape[0]

    @property
    def max_degree(self):
        return int(self.adj.sum(axis=1).max()) if self.n else 0

    def neighbor_masks(self):
        masks = []
        for i in range(self.n):
            m = 0
            for j in np.flatnonzero(self.adj[i]):
                m |= 1 << int(j)
            masks.append(m)
        return masks

    def to_csv(self):
        buf = io.StringIO()
        buf.write(f"# n={self.n} seed={self.seed}\n")
        buf.write("u,v\n")
        us, vs = np.nonzero(np.triu(self.adj, 1))
        for u, v in zip(us, vs):
            buf.write(f"{u},{v}\n")
        return buf.getvalue()


def sample_graph(P: EdgeProbabilityMatrix, seed):
    """Each edge present independently with probability p_ij."""
    rng = substream(seed, "graph")
    n = P.n
    u = rng.random((n, n))
    upper = np.triu(u < P.p, 1)
    return Graph(adj=upper | upper.T, seed=seed)


def chromatic_greedy(G: Graph, order=None):
    """First-fit coloring along the given vertex order; at most maxdeg+1."""
    n = G.n
    if n == 0:
        return 0
    if order is None:
        order = range(n)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise InvalidArgumentError("order must be a permutation of the vertices")
    color = [-1] * n
    used = 0
    for v in order:
        taken = {color[u] for u in np.flatnonzero(G.adj[v]) if color[u] >= 0}
        c = 0
        while c in taken:
            c += 1
        color[v] = c
        used = max(used, c + 1)
    return used


def _dsatur_greedy(masks, n):
    if n == 0:
        return 0, []
    color = [-1] * n
    sat = [0] * n  # bitmask of neighbor colors
    degs = [bin(m).count("1") for m in masks]
    for _ in range(n):
        v = max(
            (u for u in range(n) if color[u] < 0),
            key=lambda u: (bin(sat[u]).count("1"), degs[u], -u),
        )
        c = 0
        while sat[v] >> c & 1:
            c += 1
        color[v] = c
        for u in range(n):
            if masks[v] >> u & 1 and color[u] < 0:
                sat[u] |= 1 << c
    return max(color) + 1, color


def _greedy_clique(masks, n):
    best = 0
    order = sorted(range(n), key=lambda v: -bin(masks[v]).count("1"))
    for start in order[: min(n, 8)]:
        clique = [start]
        common = masks[start]
        while common:
            v = max(
                (u for u in range(n) if common >> u & 1),
                key=lambda u: bin(common & masks[u]).count("1"),
            )
            clique.append(v)
            common &= masks[v]
        best = max(best, len(clique))
    return best


def chromatic_exact(G: Graph, cap=CHROMATIC_EXACT_CAP,
                    time_budget=CHROMATIC_TIME_BUDGET):
    """Exact chromatic number by DSATUR-seeded branch and bound.

    Raises SizeLimitError above the vertex cap or when the time budget is
    exhausted, so callers never silently get a heuristic value.
    """
    n = G.n
    if n > cap:
        raise SizeLimitError(f"exact coloring capped at {cap} vertices, got {n}")
    if n == 0:
        return 0
    masks = G.neighbor_masks()
    ub, _ = _dsatur_greedy(masks, n)
    lb = _greedy_clique(masks, n)
    if lb == ub:
        return ub
    deadline = time.monotonic() + time_budget
    best = ub
    color = [-1] * n
    sat = [0] * n
    degs = [bin(m).count("1") for m in masks]
    counter = [0]

    def branch(colored, used):
        nonlocal best
        counter[0] += 1
        if counter[0] % 2048 == 0 and time.monotonic() > deadline:
            raise SizeLimitError("exact coloring exceeded its time budget")
        if used >= best:
            return
        if colored == n:
            best = used
            return
        v = max(
            (u for u in range(n) if color[u] < 0),
            key=lambda u: (bin(sat[u]).count("1"), degs[u], -u),
        )
        limit = min(used + 1, best - 1)
        for c in range(limit):
            if sat[v] >> c & 1:
                continue
            color[v] = c
            touched = []
            for u in range(n):
                if masks[v] >> u & 1 and color[u] < 0 and not sat[u] >> c & 1:
                    sat[u] |= 1 << c
                    touched.append(u)
            branch(colored + 1, max(used, c + 1))
            color[v] = -1
            for u in touched:
                sat[u] &= ~(1 << c)

    branch(0, 0)
    return best


# --- maximum average degree -------------------------------------------------


class _Dinic:
    def __init__(self, n):
        self.n = n
        self.head = [[] for _ in range(n)]
        self.to = []
        self.cap = []

    def add(self, u, v, c):
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(c)
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0.0)

    def max_flow(self, s, t):
        flow = 0.0
        eps = 1e-12
        while True:
            level = [-1] * self.n
            level[s] = 0
            queue = [s]
            for u in queue:
                for e in self.head[u]:
                    v = self.to[e]
                    if self.cap[e] > eps and level[v] < 0:
                        level[v] = level[u] + 1
                        queue.append(v)
            if level[t] < 0:
                return flow
            it = [0] * self.n

            def dfs(u, pushed):
                if u == t:
                    return pushed
                while it[u] < len(self.head[u]):
                    e = self.head[u][it[u]]
                    v = self.to[e]
                    if self.cap[e] > eps and level[v] == level[u] + 1:
                        got = dfs(v, min(pushed, self.cap[e]))
                        if got > eps:
                            self.cap[e] -= got
                            self.cap[e ^ 1] += got
                            return got
                    it[u] += 1
                return 0.0

            while True:
                pushed = dfs(s, math.inf)
                if pushed <= eps:
                    break
                flow += pushed

    def min_cut_source_side(self, s):
        seen = [False] * self.n
        seen[s] = True
        queue = [s]
        for u in queue:
            for e in self.head[u]:
                v = self.to[e]
                if self.cap[e] > 1e-12 and not seen[v]:
                    seen[v] = True
                    queue.append(v)
        return seen


def _subset_density(p, members):
    members = np.asarray(members)
    sub = p[np.ix_(members, members)]
    return float(sub.sum() / len(members))


def _densest_feasible(w, degree, total, guess):
    """Source side of the min cut for the density test 'exists U with
    sum_{i<j in U} w_ij / |U| > guess'; empty when no such U exists."""
    n = len(degree)
    net = _Dinic(n + 2)
    s, t = n, n + 1
    for v in range(n):
        net.add(s, v, total)
        net.add(v, t, total + 2.0 * guess - degree[v])
    us, vs = np.nonzero(np.triu(w, 1))
    for u, v in zip(us, vs):
        net.add(int(u), int(v), float(w[u, v]))
        net.add(int(v), int(u), float(w[u, v]))
    net.max_flow(s, t)
    side = net.min_cut_source_side(s)
    return [v for v in range(n) if side[v]]


def mad(P: EdgeProbabilityMatrix):
    """MAX over subsets U of sum_{i,j in U} p_ij / |U| (ordered pairs).

    Exact up to binary-search resolution: each feasible cut yields a
    concrete subset whose density is evaluated directly, and the search
    terminates when no subset can beat the incumbent by more than ~1e-12.
    """
    n = P.n
    if n > MAD_MAX_N:
        raise SizeLimitError(f"mad() capped at {MAD_MAX_N} vertices, got {n}")
    if n == 0 or P.p.sum() == 0:
        return 0.0
    # Work on the unordered-weight graph w = 2p: its pairwise subset weight
    # sum_{i<j in U} w_ij equals the ordered-pair sum of p over U, so the
    # flow test's density units are exactly the mad units.
    w = 2.0 * P.p
    degree = w.sum(axis=1)
    total = float(np.triu(w, 1).sum())
    lo = _subset_density(w, np.arange(n)) / 2.0  # full vertex set
    hi = float(degree.max()) / 2.0
    for _ in range(200):
        if hi - lo <= 1e-13 * (1.0 + hi):
            break
        g = (lo + hi) / 2.0
        members = _densest_feasible(w, degree, total, g)
        if members:
            cand = _subset_density(w, members) / 2.0
            if cand <= lo:
                # Only float fuzz separates g from the optimum; stop refining.
                hi = g
            else:
                lo = cand
        else:
            hi = g
    return lo


def mad_realized(G: Graph):
    """mad of the realized 0/1 adjacency matrix."""
    return mad(EdgeProbabilityMatrix(G.adj.astype(float)))

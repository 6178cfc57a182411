"""Shared independent oracles: brute-force and enumeration references that
the implementation under test must match or stay on the right side of."""

from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np


def rademacher_moment_exact(n, m):
    """E(X_1+...+X_n)^m for i.i.d. +/-1 signs, exact by enumerating the
    number of -1 coordinates (2^n outcomes grouped by count)."""
    total = Fraction(0)
    for k in range(n + 1):
        total += comb(n, k) * Fraction(n - 2 * k) ** m
    return total / Fraction(2) ** n


def tour_length_oracle(points, order):
    pts = np.asarray(points, dtype=float)
    seq = pts[list(order) + [order[0]]]
    return float(np.sqrt(((seq[1:] - seq[:-1]) ** 2).sum(axis=1)).sum())


def best_random_permutation_tour(points, trials, rng):
    n = len(points)
    best = np.inf
    for _ in range(trials):
        perm = rng.permutation(n)
        best = min(best, tour_length_oracle(points, perm.tolist()))
    return best


def mst_weight_brute(points):
    """Minimum spanning tree weight over all n^(n-2) labeled trees,
    decoded from Pruefer sequences; exact for small n."""
    import heapq
    import itertools

    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n == 1:
        return 0.0
    if n == 2:
        return float(np.hypot(*(pts[0] - pts[1])))
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    best = np.inf
    for seq in itertools.product(range(n), repeat=n - 2):
        degree = [1] * n
        for v in seq:
            degree[v] += 1
        total = 0.0
        leaves = [v for v in range(n) if degree[v] == 1]
        heapq.heapify(leaves)
        for v in seq:
            leaf = heapq.heappop(leaves)
            total += d[leaf, v]
            degree[leaf] -= 1
            degree[v] -= 1
            if degree[v] == 1:
                heapq.heappush(leaves, v)
        u, v = (x for x in range(n) if degree[x] == 1)
        total += d[u, v]
        best = min(best, total)
    return best


def lis_brute(values):
    """Longest chain by DFS over all extendable increasing subsequences;
    equal values chain in position order (matching the library rule)."""
    n = len(values)
    best = 0

    def extend(last_idx, length):
        nonlocal best
        best = max(best, length)
        start = last_idx + 1
        for j in range(start, n):
            if last_idx < 0 or values[last_idx] <= values[j]:
                extend(j, length + 1)

    extend(-1, 0)
    return best


def mad_brute(p):
    """Max over nonempty subsets of the ordered-pair density, by
    meet-in-the-middle over the two vertex halves."""
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    a = n // 2
    b = n - a
    masks_a = 1 << a
    masks_b = 1 << b
    bits_a = np.array([[m >> i & 1 for i in range(a)] for m in range(masks_a)],
                      dtype=float)
    bits_b = np.array([[m >> i & 1 for i in range(b)] for m in range(masks_b)],
                      dtype=float)
    paa = p[:a, :a]
    pbb = p[a:, a:]
    pab = p[:a, a:]
    wa = np.einsum("mi,ij,mj->m", bits_a, paa, bits_a)
    wb = np.einsum("mi,ij,mj->m", bits_b, pbb, bits_b)
    cross = 2.0 * bits_a @ pab @ bits_b.T  # ordered pairs across the halves
    sizes = bits_a.sum(axis=1)[:, None] + bits_b.sum(axis=1)[None, :]
    weight = wa[:, None] + wb[None, :] + cross
    with np.errstate(invalid="ignore", divide="ignore"):
        density = np.where(sizes > 0, weight / sizes, -np.inf)
    return float(np.nanmax(density))


def chromatic_brute(adj):
    """Smallest k admitting a proper coloring, by backtracking."""
    n = adj.shape[0]
    if n == 0:
        return 0

    def colorable(k):
        color = [-1] * n

        def place(v):
            if v == n:
                return True
            for c in range(min(k, v + 1)):
                if all(color[u] != c for u in np.flatnonzero(adj[v])):
                    color[v] = c
                    if place(v + 1):
                        return True
                    color[v] = -1
            return False

        return place(0)

    for k in range(1, n + 1):
        if colorable(k):
            return k
    return n


def packing_lp_vertex_oracle(rows, counts):
    """Optimal covering-LP value by enumerating basis vertices exactly.

    min sum x  s.t.  sum_i x_i a_ij >= counts_j, x >= 0, solved by checking
    every choice of r columns from [types | surplus] in rational arithmetic.
    """
    rows = [list(map(Fraction, r)) for r in rows]
    r = len(counts)
    s = len(rows)
    counts = [Fraction(c) for c in counts]
    columns = []
    for i in range(s):
        columns.append(([rows[i][j] for j in range(r)], Fraction(1)))
    for j in range(r):
        col = [Fraction(0)] * r
        col[j] = Fraction(-1)
        columns.append((col, Fraction(0)))
    best = None
    for combo in combinations(range(len(columns)), r):
        mat = [[columns[c][0][j] for c in combo] for j in range(r)]
        vec = counts[:]
        sol = _solve_exact(mat, vec)
        if sol is None or any(v < 0 for v in sol):
            continue
        value = sum(columns[c][1] * v for c, v in zip(combo, sol))
        if best is None or value < best:
            best = value
    return best


def _solve_exact(mat, vec):
    n = len(vec)
    a = [row[:] + [vec[i]] for i, row in enumerate(mat)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        inv = Fraction(1) / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def pack_exact_bins(sizes_by_item):
    """Exact minimum bin count by branch and bound over item placements."""
    items = sorted(sizes_by_item, reverse=True)
    n = len(items)
    best = n if n else 0
    bins = []

    def place(idx):
        nonlocal best
        if idx == n:
            best = min(best, len(bins))
            return
        if len(bins) >= best:
            return
        seen = set()
        for b in range(len(bins)):
            room = round(1.0 - bins[b], 12)
            if items[idx] <= room + 1e-9 and bins[b] not in seen:
                seen.add(bins[b])
                bins[b] += items[idx]
                place(idx + 1)
                bins[b] -= items[idx]
        bins.append(items[idx])
        place(idx + 1)
        bins.pop()

    place(0)
    return best

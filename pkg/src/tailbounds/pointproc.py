"""Planar point processes on a sqrt(n) x sqrt(n) grid of cells.

Cell counts are i.i.d. from a configurable (possibly heavy-tailed)
distribution; once counts are fixed, the points inside a cell may be
placed uniformly, bunched, spread, or adversarially, which models
within-cell collusion.
"""

from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from .errors import InvalidArgumentError
from .harness.rng import substream

__all__ = [
    "Poisson",
    "TruncatedZeta",
    "TwoPoint",
    "Deterministic",
    "PlacementStrategy",
    "PointSet",
    "sample_point_set",
    "layer_order",
    "layer_sizes",
    "tau0_by_layer",
    "cell_bounds",
    "point_cell",
]


@dataclass(frozen=True)
class Poisson:
    """Poisson cell counts; all moments finite."""

    mean: float

    def __post_init__(self):
        if self.mean < 0:
            raise InvalidArgumentError("mean must be >= 0")

    kind = "poisson"
    moment_order_valid = math.inf

    def sample(self, rng, size):
        return rng.poisson(self.mean, size=size)

    def zero_prob(self):
        return math.exp(-self.mean)

    def moment(self, l):
        """Raw moment E Y^l via the Stirling-number expansion."""
        total = 0.0
        # S(l, k) by recurrence
        s_prev = [1.0]
        for row in range(1, l + 1):
            s_next = [0.0] * (row + 1)
            for k in range(1, row + 1):
                upper = s_prev[k] if k < len(s_prev) else 0.0
                s_next[k] = k * upper + s_prev[k - 1]
            s_prev = s_next
        for k in range(1, l + 1):
            total += s_prev[k] * self.mean**k
        return total if l > 0 else 1.0

    def pmf(self, k):
        return math.exp(-self.mean + k * math.log(self.mean) - math.lgamma(k + 1)) \
            if self.mean > 0 else (1.0 if k == 0 else 0.0)

    def label(self):
        return f"poisson({self.mean})"


@lru_cache(maxsize=16)
def _zeta_tables(s, cap):
    ks = np.arange(1, cap + 1, dtype=float)
    w = ks ** (-s)
    pmf = w / w.sum()
    return pmf, np.cumsum(pmf)


@dataclass(frozen=True)
class TruncatedZeta:
    """Power-law counts: Pr(Y = k) proportional to k^(-s) on 1..cap, with
    optional zero inflation Pr(Y = 0) = p0.

    Truncation keeps every moment finite and the bookkeeping exact; the
    untruncated law controls E Y^l only for l < s - 1, which
    moment_order_valid records.  p0 > 0 gives the count law genuine mass
    at zero (the empty-cell probability the grid hypotheses speak about);
    it rescales, not reshapes, the power-law part.
    """

    s: float
    cap: int = 10**6
    p0: float = 0.0

    def __post_init__(self):
        if self.s <= 1 or self.cap < 1:
            raise InvalidArgumentError("need exponent s > 1 and cap >= 1")
        if not 0 <= self.p0 < 1:
            raise InvalidArgumentError("p0 must be in [0, 1)")

    kind = "zeta"

    @property
    def moment_order_valid(self):
        return max(0, math.ceil(self.s - 1) - 1)

    def sample(self, rng, size):
        _, cdf = _zeta_tables(self.s, self.cap)
        u = rng.random(size)
        counts = (np.searchsorted(cdf, u, side="right") + 1).astype(np.int64)
        if self.p0:
            counts = np.where(rng.random(size) < self.p0, 0, counts)
        return counts

    def zero_prob(self):
        return self.p0

    def moment(self, l):
        pmf, _ = _zeta_tables(self.s, self.cap)
        ks = np.arange(1, self.cap + 1, dtype=float)
        scale = 1.0 - self.p0 if l > 0 else 1.0
        return scale * float((pmf * ks**l).sum()) if l > 0 else 1.0

    def pmf(self, k):
        if k == 0:
            return self.p0
        pmf, _ = _zeta_tables(self.s, self.cap)
        return (1.0 - self.p0) * float(pmf[k - 1]) if 1 <= k <= self.cap else 0.0

    def label(self):
        return f"zeta(s={self.s},cap={self.cap},p0={self.p0})"


@dataclass(frozen=True)
class TwoPoint:
    """Y = 0 with probability p0, else a fixed positive count."""

    p0: float
    value: int

    def __post_init__(self):
        if not 0 <= self.p0 <= 1:
            raise InvalidArgumentError("p0 must be in [0, 1]")
        if self.value < 1:
            raise InvalidArgumentError("value must be >= 1")

    kind = "two_point"
    moment_order_valid = math.inf

    def sample(self, rng, size):
        return np.where(rng.random(size) < self.p0, 0, self.value).astype(np.int64)

    def zero_prob(self):
        return self.p0

    def moment(self, l):
        return (1 - self.p0) * self.value**l if l > 0 else 1.0

    def pmf(self, k):
        if k == 0:
            return self.p0
        return 1 - self.p0 if k == self.value else 0.0

    def label(self):
        return f"two_point(p0={self.p0},value={self.value})"


@dataclass(frozen=True)
class Deterministic:
    """Exactly k points in every cell."""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise InvalidArgumentError("k must be >= 0")

    kind = "deterministic"
    moment_order_valid = math.inf

    def sample(self, rng, size):
        return np.full(size, self.k, dtype=np.int64)

    def zero_prob(self):
        return 1.0 if self.k == 0 else 0.0

    def moment(self, l):
        return float(self.k**l)

    def pmf(self, j):
        return 1.0 if j == self.k else 0.0

    def label(self):
        return f"deterministic({self.k})"


class PlacementStrategy(str, Enum):
    UNIFORM_IN_CELL = "uniform_in_cell"
    CORNER_BUNCH = "corner_bunch"
    GRID_SPREAD = "grid_spread"
    ADVERSARIAL_DIAGONAL = "adversarial_diagonal"


def _side(n_cells):
    side = math.isqrt(n_cells)
    if side * side != n_cells or n_cells < 4:
        raise InvalidArgumentError(f"n_cells must be a perfect square >= 4, got {n_cells}")
    return side


def cell_bounds(n_cells, index):
    """Half-open cell [x0, x1) x [y0, y1); the top row and right column own
    their outer boundary so the cells partition the unit square."""
    side = _side(n_cells)
    r, c = divmod(index, side)
    h = 1.0 / side
    return c * h, (c + 1) * h, r * h, (r + 1) * h


def point_cell(n_cells, x, y):
    """Owning cell of a point of the unit square under the half-open rule."""
    side = _side(n_cells)
    c = min(int(x * side), side - 1)
    r = min(int(y * side), side - 1)
    return r * side + c


def _clip_open(value, low, high, closed):
    # Keep a coordinate strictly below the open upper edge of its cell.
    if closed or value < high:
        return min(max(value, low), high if closed else np.nextafter(high, low))
    return np.nextafter(high, low)


@dataclass
class PointSet:
    n_cells: int
    cells: list  # per-cell (k, 2) float arrays
    seed: int
    config_label: str

    @property
    def total_points(self):
        return sum(len(c) for c in self.cells)

    def all_points(self):
        parts = [c for c in self.cells if len(c)]
        if not parts:
            return np.empty((0, 2))
        return np.vstack(parts)

    def config_hash(self):
        h = hashlib.sha256(f"{self.n_cells}|{self.config_label}".encode())
        return h.hexdigest()[:12]

    def to_csv(self):
        buf = io.StringIO()
        buf.write(f"# config={self.config_hash()} seed={self.seed}\n")
        buf.write("cell_index,x,y\n")
        for idx, pts in enumerate(self.cells):
            for x, y in pts:
                buf.write(f"{idx},{float(x)!r},{float(y)!r}\n")
        return buf.getvalue()

    @staticmethod
    def from_csv(text, n_cells, config_label=""):
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        seed_line = next(ln for ln in text.splitlines() if ln.startswith("#"))
        seed = int(seed_line.split("seed=")[1])
        cells = [[] for _ in range(n_cells)]
        for ln in lines[1:]:
            idx, x, y = ln.split(",")
            cells[int(idx)].append((float(x), float(y)))
        cells = [np.array(c, dtype=float).reshape(len(c), 2) for c in cells]
        return PointSet(n_cells=n_cells, cells=cells, seed=seed,
                        config_label=config_label)


def _place(rng, n_cells, index, count, placement):
    side = _side(n_cells)
    x0, x1, y0, y1 = cell_bounds(n_cells, index)
    r, c = divmod(index, side)
    closed_x = c == side - 1
    closed_y = r == side - 1
    h = 1.0 / side
    if count == 0:
        return np.empty((0, 2))
    if placement is PlacementStrategy.UNIFORM_IN_CELL:
        xs = x0 + rng.random(count) * h
        ys = y0 + rng.random(count) * h
        return np.column_stack([xs, ys])
    if placement is PlacementStrategy.CORNER_BUNCH:
        return np.tile([x0, y0], (count, 1))
    if placement is PlacementStrategy.GRID_SPREAD:
        g = math.isqrt(count - 1) + 1
        pts = []
        for j in range(count):
            gy, gx = divmod(j, g)
            pts.append((x0 + (gx + 0.5) * h / g, y0 + (gy + 0.5) * h / g))
        return np.array(pts)
    if placement is PlacementStrategy.ADVERSARIAL_DIAGONAL:
        cx = x0 if abs(x0 - 0.5) <= abs(x1 - 0.5) else _clip_open(x1, x0, x1, closed_x)
        cy = y0 if abs(y0 - 0.5) <= abs(y1 - 0.5) else _clip_open(y1, y0, y1, closed_y)
        return np.tile([cx, cy], (count, 1))
    raise InvalidArgumentError(f"unknown placement {placement!r}")


def sample_point_set(n_cells, count_dist, placement, seed):
    """Draw i.i.d. cell counts from count_dist and place that many points
    in each cell per the placement strategy.  Deterministic in seed."""
    _side(n_cells)
    placement = PlacementStrategy(placement)
    rng = substream(seed, "pointset")
    counts = count_dist.sample(rng, n_cells)
    cells = [
        _place(rng, n_cells, idx, int(k), placement) for idx, k in enumerate(counts)
    ]
    label = f"{count_dist.label()}|{placement.value}"
    return PointSet(n_cells=n_cells, cells=cells, seed=seed, config_label=label)


def layer_order(n_cells):
    """Exposure order of cells in L-shaped layers: the cells touching the
    bottom or left boundary first, then each layer one cell further in,
    ending at the top-right cell; row-major inside a layer.  Returns a
    permutation of cell indices."""
    side = _side(n_cells)
    order = []
    for layer in range(side):
        members = []
        for idx in range(n_cells):
            r, c = divmod(idx, side)
            if min(r, c) == layer:
                members.append(idx)
        order.extend(members)
    return np.array(order, dtype=np.int64)


def layer_sizes(n_cells):
    side = _side(n_cells)
    return [2 * (side - layer) - 1 for layer in range(side)]


def tau0_by_layer(ps: PointSet, cap=2 * math.sqrt(2)):
    """Diagnostic: per layer, the mean over its cells of the minimum
    distance from the cell's square to any point owned by a cell exposed
    later in layer_order, capped at 2*sqrt(2).  Reported, never asserted:
    the exposure ordering makes this distance small for early layers."""
    order = layer_order(ps.n_cells)
    sizes = layer_sizes(ps.n_cells)
    position = np.empty(ps.n_cells, dtype=np.int64)
    position[order] = np.arange(ps.n_cells)
    means = []
    start = 0
    for size in sizes:
        taus = []
        for idx in order[start:start + size]:
            later = [
                pts for cell in order if position[cell] > position[idx]
                for pts in (ps.cells[cell],) if len(pts)
            ]
            if not later:
                taus.append(cap)
                continue
            pts = np.vstack(later)
            x0, x1, y0, y1 = cell_bounds(ps.n_cells, int(idx))
            dx = np.maximum(np.maximum(x0 - pts[:, 0], pts[:, 0] - x1), 0.0)
            dy = np.maximum(np.maximum(y0 - pts[:, 1], pts[:, 1] - y1), 0.0)
            taus.append(min(cap, float(np.sqrt(dx**2 + dy**2).min())))
        means.append(float(np.mean(taus)))
        start += size
    return means

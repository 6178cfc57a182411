import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import best_random_permutation_tour, mst_weight_brute
from tailbounds.errors import InvalidArgumentError, SizeLimitError
from tailbounds.euclid import (
    STRIP_TOUR_COEFF,
    STRIP_TOUR_OFFSET,
    Tour,
    mst_weight,
    tour_length,
    tsp_2opt,
    tsp_exact,
    tsp_strip,
)


class TestTspExact:
    def test_right_triangle(self):
        tour = tsp_exact([(0, 0), (3, 0), (0, 4)])
        assert tour.length == pytest.approx(12.0)

    def test_unit_square(self):
        tour = tsp_exact([(0, 0), (1, 0), (1, 1), (0, 1)])
        assert tour.length == pytest.approx(4.0)
        assert tour.order.tolist() == [0, 1, 2, 3]  # lexicographically smallest

    def test_beats_random_permutations(self):
        rng = np.random.default_rng(17)
        points = rng.random((8, 2))
        exact = tsp_exact(points)
        oracle = best_random_permutation_tour(points, trials=10000, rng=rng)
        assert exact.length <= oracle + 1e-12

    def test_length_recomputable(self):
        rng = np.random.default_rng(3)
        points = rng.random((9, 2))
        tour = tsp_exact(points)
        assert tour.length == pytest.approx(tour_length(points, tour.order),
                                            rel=1e-12)

    def test_size_limit(self):
        with pytest.raises(SizeLimitError):
            tsp_exact(np.zeros((14, 2)))

    def test_degenerate_sizes(self):
        assert tsp_exact([(0.3, 0.4)]).length == 0.0
        assert tsp_exact([(0, 0), (0, 2)]).length == pytest.approx(4.0)

    @pytest.mark.parametrize("seed", range(8))
    def test_monotone_under_insertion(self, seed):
        rng = np.random.default_rng(seed)
        points = rng.random((9, 2))
        base = tsp_exact(points[:-1]).length
        grown = tsp_exact(points).length
        assert grown >= base - 1e-12

    def test_deterministic_tie_break(self):
        # four corners admit many optimal tours; the smallest order wins
        points = [(0, 0), (0, 1), (1, 0), (1, 1)]
        tour = tsp_exact(points)
        assert tour.order.tolist() == [0, 1, 3, 2]


class TestTspStrip:
    def test_single_point(self):
        tour = tsp_strip([(0.2, 0.7)], alpha=1.0)
        assert tour.length == 0.0

    def test_four_corners_of_alpha_square(self):
        alpha = 2.5
        pts = [(0, 0), (alpha, 0), (alpha, alpha), (0, alpha)]
        tour = tsp_strip(pts, alpha)
        assert tour.length <= 3 * alpha * 2 + 2 * alpha

    def test_large_uniform_cloud(self):
        rng = np.random.default_rng(5)
        pts = rng.random((10000, 2))
        tour = tsp_strip(pts, 1.0)
        assert tour.length <= STRIP_TOUR_COEFF * 100 + STRIP_TOUR_OFFSET
        improved = tsp_2opt(pts, tour, max_passes=1)
        assert improved.length <= tour.length + 1e-9

    @given(st.integers(min_value=0, max_value=400), st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=60, deadline=None)
    def test_certificate_property(self, s, seed):
        rng = np.random.default_rng(seed)
        alpha = float(rng.uniform(0.1, 5.0))
        pts = rng.random((s, 2)) * alpha
        tour = tsp_strip(pts, alpha)  # asserts its own certificate
        assert tour.length <= STRIP_TOUR_COEFF * alpha * math.sqrt(max(s, 1)) \
            + STRIP_TOUR_OFFSET * alpha + 1e-9

    def test_adversarial_rows(self):
        # points stacked on strip boundaries at both x extremes
        alpha = 1.0
        s = 64
        k = math.isqrt(s)
        pts = []
        for band in range(k):
            y = band / k + 1e-6
            for j in range(k):
                pts.append((j / (k - 1), y + (j % 2) * (1.0 / k - 2e-6)))
        tour = tsp_strip(pts[:s], alpha)
        assert tour.length <= 3 * alpha * math.sqrt(s) + 2 * alpha


class TestTsp2opt:
    def test_convex_position_unchanged(self):
        pts = [(math.cos(a), math.sin(a)) for a in np.linspace(0, 2 * math.pi, 9)[:-1]]
        start = Tour.of(pts, list(range(8)))
        improved = tsp_2opt(pts, start)
        assert improved.length == pytest.approx(start.length)
        assert improved.order.tolist() == list(range(8))

    def test_uncrosses_quadrilateral(self):
        pts = [(0, 0), (1, 1), (1, 0), (0, 1)]  # order 0-1-2-3 self-crosses
        start = Tour.of(pts, [0, 1, 2, 3])
        improved = tsp_2opt(pts, start, max_passes=1)
        assert improved.length == pytest.approx(4.0)

    def test_never_worse_than_start(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            pts = rng.random((40, 2))
            start = tsp_strip(pts, 1.0)
            improved = tsp_2opt(pts, start)
            assert improved.length <= start.length + 1e-9

    def test_close_to_exact_on_small_instances(self):
        close = 0
        total = 500
        for seed in range(total):
            rng = np.random.default_rng(1000 + seed)
            n = int(rng.integers(5, 11))
            pts = rng.random((n, 2))
            exact = tsp_exact(pts)
            heur = tsp_2opt(pts, tsp_strip(pts, 1.0))
            assert heur.length >= exact.length - 1e-9
            if heur.length <= exact.length * 1.05:
                close += 1
        assert close / total >= 0.95

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        pts = rng.random((60, 2))
        start = tsp_strip(pts, 1.0)
        a = tsp_2opt(pts, start)
        b = tsp_2opt(pts, start)
        assert a.order.tolist() == b.order.tolist()


class TestMst:
    def test_two_points(self):
        assert mst_weight([(0, 0), (3, 4)]).weight == pytest.approx(5.0)

    def test_triangle_plus_center_non_monotone(self):
        side = [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)]
        without = mst_weight(side).weight
        with_center = mst_weight(side + [(0.5, math.sqrt(3) / 6)]).weight
        assert without == pytest.approx(2.0)
        assert with_center == pytest.approx(math.sqrt(3))
        assert with_center < without  # adding a point lowered the weight

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_pruefer_brute_force(self, seed):
        rng = np.random.default_rng(40 + seed)
        pts = rng.random((7, 2))
        assert mst_weight(pts).weight == pytest.approx(mst_weight_brute(pts),
                                                       rel=1e-12)

    def test_tree_shape(self):
        rng = np.random.default_rng(8)
        pts = rng.random((25, 2))
        tree = mst_weight(pts)
        assert len(tree.edges) == 24
        seen = {0}
        for u, v in tree.edges:
            assert (u in seen) != (v in seen) or (u in seen and v in seen)
            seen.update((u, v))
        assert seen == set(range(25))
        d = np.sqrt(((pts[:, None] - pts[None, :]) ** 2).sum(axis=2))
        assert tree.weight == pytest.approx(sum(d[u, v] for u, v in tree.edges))


class TestPermutationInvariance:
    @pytest.mark.parametrize("seed", range(4))
    def test_functionals_ignore_point_order(self, seed):
        rng = np.random.default_rng(70 + seed)
        pts = rng.random((9, 2))
        perm = rng.permutation(9)
        shuffled = pts[perm]
        assert tsp_exact(pts).length == pytest.approx(tsp_exact(shuffled).length)
        assert mst_weight(pts).weight == pytest.approx(mst_weight(shuffled).weight)
        assert tsp_strip(pts, 1.0).length == pytest.approx(
            tsp_strip(shuffled, 1.0).length)


def test_tour_validates_permutation():
    with pytest.raises(InvalidArgumentError):
        Tour(order=np.array([0, 0, 1]), length=1.0)

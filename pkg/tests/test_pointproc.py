import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from tailbounds.errors import InvalidArgumentError
from tailbounds.harness.rng import substream
from tailbounds.pointproc import (
    Deterministic,
    PlacementStrategy,
    PointSet,
    Poisson,
    TruncatedZeta,
    TwoPoint,
    cell_bounds,
    layer_order,
    layer_sizes,
    point_cell,
    sample_point_set,
)


class TestCountDistributions:
    def test_poisson_moments(self):
        d = Poisson(1.0)
        # raw moments of Poisson(1) are the Bell numbers
        assert d.moment(1) == pytest.approx(1.0)
        assert d.moment(2) == pytest.approx(2.0)
        assert d.moment(3) == pytest.approx(5.0)
        assert d.moment(4) == pytest.approx(15.0)
        assert d.zero_prob() == pytest.approx(math.exp(-1))

    def test_zeta_moment_validity_order(self):
        assert TruncatedZeta(6.0, 1000).moment_order_valid == 4
        assert TruncatedZeta(3.5, 1000).moment_order_valid == 2

    def test_zeta_exact_moments(self):
        d = TruncatedZeta(6.0, 100000)
        z = np.arange(1, 100001, dtype=float)
        w = z**-6.0
        w /= w.sum()
        assert d.moment(2) == pytest.approx(float((w * z**2).sum()), rel=1e-12)
        assert d.zero_prob() == 0.0

    def test_zero_inflated_zeta(self):
        d = TruncatedZeta(6.0, 1000, p0=0.3)
        assert d.zero_prob() == pytest.approx(0.3)
        plain = TruncatedZeta(6.0, 1000)
        assert d.moment(2) == pytest.approx(0.7 * plain.moment(2))
        rng = substream(5, "zta")
        draws = d.sample(rng, 20000)
        assert (draws == 0).mean() == pytest.approx(0.3, abs=0.02)

    def test_two_point(self):
        d = TwoPoint(0.25, 3)
        assert d.zero_prob() == 0.25
        assert d.moment(2) == pytest.approx(0.75 * 9)
        assert d.pmf(3) == 0.75 and d.pmf(0) == 0.25 and d.pmf(1) == 0.0

    def test_deterministic(self):
        d = Deterministic(2)
        rng = substream(1, "det")
        assert (d.sample(rng, 10) == 2).all()
        assert d.zero_prob() == 0.0

    @pytest.mark.parametrize("dist", [
        Poisson(1.3),
        TruncatedZeta(6.0, 50, p0=0.2),
        TwoPoint(0.4, 2),
    ])
    def test_count_marginals_chi_square(self, dist):
        # Empirical count distribution matches the pmf at the 0.1% level.
        rng = substream(77, "chi", dist.label())
        draws = dist.sample(rng, 10000)
        top = int(draws.max())
        observed = np.bincount(draws, minlength=top + 1).astype(float)
        expected = np.array([dist.pmf(k) for k in range(top + 1)]) * len(draws)
        # fold the tail into the last cell with expected mass >= 5
        keep = expected >= 5
        obs = np.append(observed[keep], observed[~keep].sum())
        exp = np.append(expected[keep], expected[~keep].sum())
        if exp[-1] == 0:
            obs, exp = obs[:-1], exp[:-1]
        exp *= obs.sum() / exp.sum()
        _, p_value = stats.chisquare(obs, exp)
        assert p_value > 0.001

    def test_zeta_second_moment_stable_across_seeds(self):
        d = TruncatedZeta(6.0, 10**6)
        second = []
        for seed in range(4):
            rng = substream(seed, "zeta-stab")
            draws = d.sample(rng, 20000).astype(float)
            second.append((draws**2).mean())
        assert np.std(second) < 0.2
        assert np.mean(second) == pytest.approx(d.moment(2), rel=0.1)


class TestSamplePointSet:
    def test_deterministic_one_per_quadrant(self):
        ps = sample_point_set(4, Deterministic(1), "uniform_in_cell", seed=0)
        assert ps.total_points == 4
        owners = sorted(point_cell(4, x, y) for x, y in ps.all_points())
        assert owners == [0, 1, 2, 3]

    def test_poisson_total_concentrates(self):
        # total over 400 cells is Poisson(400); |T-400| <= 80 this often
        hits = 0
        reps = 200
        for seed in range(reps):
            ps = sample_point_set(400, Poisson(1.0), "uniform_in_cell", seed)
            hits += abs(ps.total_points - 400) <= 80
        assert hits / reps >= 0.99

    @pytest.mark.parametrize("placement", list(PlacementStrategy))
    def test_containment_exact(self, placement):
        ps = sample_point_set(16, TwoPoint(0.3, 3), placement, seed=9)
        for idx, cell in enumerate(ps.cells):
            for x, y in cell:
                assert point_cell(16, x, y) == idx
                x0, x1, y0, y1 = cell_bounds(16, idx)
                assert x0 <= x <= x1 and y0 <= y <= y1

    def test_reproducibility_bytes(self):
        a = sample_point_set(100, Poisson(2.0), "grid_spread", seed=31)
        b = sample_point_set(100, Poisson(2.0), "grid_spread", seed=31)
        assert a.to_csv() == b.to_csv()
        c = sample_point_set(100, Poisson(2.0), "grid_spread", seed=32)
        assert a.to_csv() != c.to_csv()

    def test_corner_bunch_is_coincident(self):
        ps = sample_point_set(9, Deterministic(3), "corner_bunch", seed=2)
        for cell in ps.cells:
            assert len({(x, y) for x, y in cell}) == 1

    def test_adversarial_diagonal_faces_center(self):
        ps = sample_point_set(4, Deterministic(1), "adversarial_diagonal", seed=3)
        for idx, cell in enumerate(ps.cells):
            (x, y), = cell
            # each point sits within a whisker of the cell corner nearest
            # the unit-square center
            assert abs(x - 0.5) < 0.51 and abs(y - 0.5) < 0.51
            assert min(abs(x - b) for b in (0.0, 0.5, 1.0)) < 1e-6
            assert min(abs(y - b) for b in (0.0, 0.5, 1.0)) < 1e-6

    def test_rejects_non_square(self):
        with pytest.raises(InvalidArgumentError):
            sample_point_set(12, Deterministic(1), "uniform_in_cell", 0)

    def test_csv_round_trip(self):
        ps = sample_point_set(16, Poisson(1.0), "uniform_in_cell", seed=5)
        text = ps.to_csv()
        assert text.startswith("# config=")
        back = PointSet.from_csv(text, 16)
        assert back.seed == 5
        assert np.array_equal(back.all_points(), ps.all_points())

    @given(st.integers(min_value=2, max_value=6), st.integers(min_value=0, max_value=50))
    @settings(max_examples=30, deadline=None)
    def test_containment_property(self, side, seed):
        n = side * side
        ps = sample_point_set(n, Poisson(1.5), "uniform_in_cell", seed)
        for idx, cell in enumerate(ps.cells):
            for x, y in cell:
                assert point_cell(n, x, y) == idx


class TestLayerOrder:
    def test_two_by_two(self):
        order = layer_order(4).tolist()
        # boundary cells (bottom-left, bottom-right, top-left) first,
        # top-right cell last
        assert order == [0, 1, 2, 3]
        assert order[-1] == 3

    def test_three_by_three_sizes(self):
        assert layer_sizes(9) == [5, 3, 1]
        order = layer_order(9).tolist()
        assert len(order) == 9
        assert sorted(order) == list(range(9))
        assert order[-1] == 8  # top-right cell is exposed last
        # first layer: min(row, col) == 0
        first = order[:5]
        assert set(first) == {0, 1, 2, 3, 6}

    def test_deterministic(self):
        assert layer_order(49).tolist() == layer_order(49).tolist()

    def test_layers_partition(self):
        for n in (4, 16, 25, 64):
            order = layer_order(n)
            assert sorted(order.tolist()) == list(range(n))
            assert sum(layer_sizes(n)) == n

    def test_tau0_diagnostic_scale(self):
        from tailbounds.pointproc import tau0_by_layer

        ps = sample_point_set(100, Deterministic(1), "uniform_in_cell", seed=6)
        taus = tau0_by_layer(ps)
        assert len(taus) == 10
        # with every later cell occupied, early layers sit within a couple
        # of cell widths of the next point; the last cell has no later
        # points and reports the cap
        assert all(t <= 3 * 0.1 for t in taus[:-1])
        assert taus[-1] == pytest.approx(2 * math.sqrt(2))

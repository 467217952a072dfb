import numpy as np
import pytest

from acquest.choice import (Market, boundary_bisection, choice_probability,
                            equal_profit_residual, optimal_design,
                            optimal_designs, profit, random_planar_market,
                            segment_map, sigmoid, utility)
from acquest.datasets import dial_scale_partworths, dial_scale_space


class TestSigmoid:
    def test_zero(self):
        assert sigmoid(0.0) == 0.5

    def test_complement_identity(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(-50, 50, size=2000)
        np.testing.assert_allclose(sigmoid(x) + sigmoid(-x), 1.0, atol=1e-12)

    def test_saturation_no_overflow(self):
        assert sigmoid(1e4) == 1.0
        assert sigmoid(-1e4) == 0.0
        assert sigmoid(1e12) == 1.0  # capped before exponentiation


class TestUtility:
    def test_zero_partworth(self, desk_market):
        w = np.zeros(desk_market.dim)
        for vec in desk_market.vectors:
            assert utility(w, vec) == 0.0

    def test_hand_summed_design(self):
        # (250 lbs, 8/8, 120 in^2, 4/32, 1.00, $20): sum the six shifted
        # per-level table values by hand
        space = dial_scale_space()
        w = dial_scale_partworths(space)
        z = space.schema.constrain_design(space.schema.encode((1, 2, 2, 2, 1, 2)))
        expected = ((0.129 - 0.052) + (0.235 - 0.396) + (0.049 - -0.033)
                    + (0.215 - 0.100) + (0.253 - -0.467) + (0.054 - -0.908))
        assert abs(utility(w, z) - expected) < 1e-12

    def test_gap_matches_full_layout(self):
        space = dial_scale_space()
        schema = space.schema
        rng = np.random.default_rng(3)
        w_full = rng.normal(size=30)
        w = schema.constrain_partworths(w_full)
        zi = schema.encode((0, 1, 2, 3, 4, 0))
        zj = schema.encode((4, 3, 2, 1, 0, 4))
        gap_constrained = utility(w, schema.constrain_design(zi)) \
            - utility(w, schema.constrain_design(zj))
        assert abs(gap_constrained - w_full @ (zi - zj)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            utility(np.zeros(3), np.zeros(4))


class TestChoiceProbability:
    def test_equal_utilities(self):
        z = np.array([1.0, 0.0])
        assert choice_probability(np.zeros(2), z, z) == 0.5

    def test_theta_scaled_wrong_choice_rates(self):
        # false response rates for a 0.1 utility gap
        assert sigmoid(-1.0 * 0.1) == pytest.approx(0.475, abs=1e-3)
        assert sigmoid(-10.0 * 0.1) == pytest.approx(0.269, abs=1e-3)
        assert sigmoid(-100.0 * 0.1) < 1e-4

    def test_saturating_gap(self):
        w = np.array([1e4, 0.0])
        assert choice_probability(w, np.array([1.0, 0.0]), np.array([0.0, 0.0])) == 1.0


class TestProfit:
    def test_half_share_margin(self):
        z = np.array([1.0, 0.0])
        assert profit(np.zeros(2), z, z, price=10.0, cost=4.0) == pytest.approx(3.0)

    def test_zero_margin(self):
        rng = np.random.default_rng(1)
        z, z0 = rng.normal(size=2), rng.normal(size=2)
        for _ in range(5):
            w = rng.normal(size=2)
            assert profit(w, z, z0, price=7.0, cost=7.0) == 0.0

    def test_equal_margins_order_by_utility(self):
        market = Market(np.array([[2.0, 0.0], [1.0, 0.0]]),
                        prices=np.array([9.0, 9.0]), costs=np.array([2.0, 2.0]),
                        competitor=np.array([0.0, 0.0]))
        w = np.array([1.0, 0.0])  # u(z1) > u(z2)
        profits = [profit(w, market.vectors[k], market.competitor, 9.0, 2.0)
                   for k in range(2)]
        assert profits[0] > profits[1]


class TestOptimalDesign:
    def test_single_positive_margin_wins_everywhere(self):
        market = Market(np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]),
                        prices=np.array([5.0, 5.0, 5.0]),
                        costs=np.array([5.0, 1.0, 5.0]),
                        competitor=np.array([0.2, -0.3]))
        rng = np.random.default_rng(4)
        for _ in range(50):
            assert optimal_design(rng.normal(size=2, scale=3), market) == 1

    def test_zero_partworth_picks_highest_margin(self, desk_market):
        w = np.zeros(desk_market.dim)
        assert optimal_design(w, desk_market) == int(np.argmax(desk_market.margins))

    def test_invariant_to_common_utility_shift(self):
        # translating every design and the competitor by the same vector
        # leaves all utility gaps, hence the argmax, unchanged
        market = random_planar_market(6, seed=5)
        shift = np.array([0.7, -1.3])
        shifted = Market(market.vectors + shift, market.prices, market.costs,
                         market.competitor + shift)
        rng = np.random.default_rng(6)
        pts = rng.uniform(-8, 8, size=(200, 2))
        np.testing.assert_array_equal(optimal_designs(pts, market),
                                      optimal_designs(pts, shifted))

    def test_tie_breaks_to_lowest_index(self):
        market = Market(np.array([[1.0, 0.0], [1.0, 0.0]]),
                        prices=np.array([8.0, 8.0]), costs=np.array([1.0, 1.0]),
                        competitor=np.array([0.0, 0.0]))
        assert optimal_design(np.array([2.0, 0.5]), market) == 0


class TestEqualProfitResidual:
    def test_equal_margins_equal_utilities(self, two_design_market):
        w = np.array([0.8, 0.8])  # on the boundary w1 = w2
        assert equal_profit_residual(w, two_design_market, 0, 1) == pytest.approx(0.0)

    def test_positive_on_winning_side(self):
        market = random_planar_market(8, seed=7)
        rng = np.random.default_rng(8)
        for _ in range(30):
            w = rng.uniform(-6, 6, size=2)
            k = optimal_design(w, market)
            other = (k + 1) % market.size
            assert equal_profit_residual(w, market, k, other) >= 0.0

    def test_antisymmetry(self):
        market = random_planar_market(5, seed=9)
        rng = np.random.default_rng(10)
        for _ in range(30):
            w = rng.uniform(-5, 5, size=2)
            i, j = rng.choice(5, size=2, replace=False)
            assert equal_profit_residual(w, market, i, j) == pytest.approx(
                -equal_profit_residual(w, market, j, i), abs=1e-12)

    def test_bisection_finds_boundary(self):
        market = random_planar_market(8, seed=11)
        _, _, labels = segment_map(market, (-10, 10), 60)
        axis = np.linspace(-10, 10, 60)
        found = False
        for row in range(60):
            for col in range(59):
                a, b = labels[row, col], labels[row, col + 1]
                if a != b:
                    w_a = np.array([axis[col], axis[row]])
                    w_b = np.array([axis[col + 1], axis[row]])
                    w_mid = boundary_bisection(market, a, b, w_a, w_b, tol=1e-8)
                    # the sign change is pinned inside a 1e-8 neighbourhood
                    step = np.array([2e-8, 0.0])
                    lo = equal_profit_residual(w_mid - step, market, a, b)
                    hi = equal_profit_residual(w_mid + step, market, a, b)
                    assert np.sign(lo) != np.sign(hi)
                    found = True
                    break
            if found:
                break
        assert found


class TestSegmentMap:
    def test_single_effective_candidate(self):
        market = Market(np.array([[1.0, 0.0], [0.0, 1.0]]),
                        prices=np.array([9.0, 1.0]), costs=np.array([1.0, 1.0]),
                        competitor=np.array([0.0, 0.0]))
        # margin 8 vs 0: the zero-margin design never wins
        _, _, labels = segment_map(market, (-5, 5), 40)
        assert set(np.unique(labels)) == {0}

    def test_labels_match_brute_force_small(self):
        market = random_planar_market(8, seed=12)
        axis1, axis2, labels = segment_map(market, (-10, 10), 25)
        for i, w2 in enumerate(axis2):
            for j, w1 in enumerate(axis1):
                w = np.array([w1, w2])
                profits = [profit(w, market.vectors[k], market.competitor,
                                  market.prices[k], market.costs[k])
                           for k in range(market.size)]
                assert labels[i, j] == int(np.argmax(profits))

    def test_invariant_to_margin_scaling(self):
        market = random_planar_market(8, seed=13)
        scaled = Market(market.vectors, market.prices * 3.0, market.costs * 3.0,
                        market.competitor)
        _, _, labels = segment_map(market, (-10, 10), 30)
        _, _, labels_scaled = segment_map(scaled, (-10, 10), 30)
        np.testing.assert_array_equal(labels, labels_scaled)

    def test_requires_2d(self, desk_market):
        with pytest.raises(ValueError):
            segment_map(desk_market)

    def test_invalid_grid(self):
        market = random_planar_market(3, seed=1)
        with pytest.raises(ValueError):
            segment_map(market, (5, -5), 10)
        with pytest.raises(ValueError):
            segment_map(market, (-5, 5), 1)

    def test_partition_unique_strict_max(self):
        market = random_planar_market(8, seed=14)
        rng = np.random.default_rng(15)
        pts = rng.uniform(-10, 10, size=(500, 2))
        from acquest.choice import profit_matrix
        profits = profit_matrix(pts, market)
        top = np.sort(profits, axis=1)[:, -2:]
        assert np.all(top[:, 1] > top[:, 0])  # strict argmax off the boundaries

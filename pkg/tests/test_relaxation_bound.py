import math
import os
import sys
import time
import unittest

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.core.channel_model import ChannelModel, stationary_belief
from src.core.criteria import Average, Discounted
from src.core.errors import ConfigError
from src.core.relaxation_bound import (
    BoundRequest,
    average_objective,
    bound_subgradient,
    dense_grid_minimum,
    relaxed_objective,
    upper_bound_average,
    upper_bound_bisection,
    upper_bound_discounted,
)
from src.sim.harness import SimConfig, discounted_horizon, simulate

# 8本・K=4・β=0.8 の代表的な構成
MIXED_CHANNELS = tuple(
    ChannelModel(p01, p11)
    for p01, p11 in zip((0.2, 0.5, 0.8, 0.1, 0.6, 0.2, 0.3, 0.8), (0.4, 0.1, 0.3, 0.6, 0.2, 0.8, 0.7, 0.6))
)
BETA = 0.8
EPSILON = 1e-3


def stationary_total(channels) -> float:
    return sum(stationary_belief(ch) * ch.bandwidth for ch in channels)


class TestBoundRequest(unittest.TestCase):
    def test_validation(self):
        with self.assertRaises(ConfigError):
            BoundRequest(MIXED_CHANNELS, 0, Discounted(BETA))
        with self.assertRaises(ConfigError):
            BoundRequest(MIXED_CHANNELS, 9, Discounted(BETA))
        with self.assertRaises(ConfigError):
            BoundRequest(MIXED_CHANNELS, 4, Discounted(BETA), epsilon=0.0)
        with self.assertRaises(ConfigError):
            BoundRequest(MIXED_CHANNELS, 4, Discounted(BETA), initial_beliefs=(0.5,) * 3)
        with self.assertRaises(ConfigError):
            BoundRequest((), 1, Discounted(BETA))

    def test_default_beliefs_are_stationary(self):
        req = BoundRequest(MIXED_CHANNELS, 4, Discounted(BETA))
        self.assertEqual(req.beliefs, tuple(stationary_belief(ch) for ch in MIXED_CHANNELS))
        self.assertEqual(req.N, 8)
        self.assertEqual(req.max_bandwidth, 1.0)


class TestDiscountedBound(unittest.TestCase):
    def setUp(self):
        self.req = BoundRequest(MIXED_CHANNELS, 4, Discounted(BETA), epsilon=EPSILON)
        self.result = upper_bound_discounted(self.req)

    def test_all_channels_sensed(self):
        req = BoundRequest(MIXED_CHANNELS, 8, Discounted(BETA))
        result = upper_bound_discounted(req)
        self.assertEqual(result.m_star, 0.0)
        self.assertTrue(result.exact)
        self.assertAlmostEqual(result.value, stationary_total(MIXED_CHANNELS) / (1.0 - BETA), places=9)

    def test_bound_brackets_simple_policies(self):
        random_policy = 4 / 8 * stationary_total(MIXED_CHANNELS) / (1.0 - BETA)
        self.assertGreaterEqual(self.result.value, random_policy - 1e-9)
        self.assertLessEqual(self.result.value, 4 / (1.0 - BETA) + EPSILON)

    def test_close_to_dense_grid_minimum(self):
        # G は凸なので m* の周りの窓で 1e-4 刻みのグリッドと比べる
        step = 1e-4
        low = max(self.result.m_star - 0.01, 0.0)
        high = min(self.result.m_star + 0.01, self.req.max_bandwidth)
        grid_m, grid_value = dense_grid_minimum(self.req, step, low, high)
        if low > 0.0:
            self.assertGreater(grid_m, low)
        if high < self.req.max_bandwidth:
            self.assertLess(grid_m, high)
        # グリッド最小値は真の最小値より高々 (傾きの上界)·step だけ大きい
        slope = self.req.N / (1.0 - BETA)
        self.assertLessEqual(self.result.value, grid_value + EPSILON + 1e-9)
        self.assertGreaterEqual(self.result.value, grid_value - slope * step)

    def test_coarse_grid_over_whole_range(self):
        _, grid_value = dense_grid_minimum(self.req, 0.05)
        self.assertLessEqual(self.result.value, grid_value + EPSILON + 1e-9)

    def test_objective_is_convex(self):
        grid = np.linspace(0.0, 1.0, 41)
        values = np.array([relaxed_objective(self.req, float(m)) for m in grid])
        second = values[:-2] - 2.0 * values[1:-1] + values[2:]
        self.assertGreaterEqual(float(second.min()), -1e-7)

    def test_subgradient_sign_at_minimizer(self):
        m_star = self.result.m_star
        if m_star > 0.0 and self.result.exact:
            self.assertLess(bound_subgradient(self.req, m_star - 1e-6), 0.0)
        self.assertGreaterEqual(bound_subgradient(self.req, min(m_star + 1e-6, 1.0)), -1e-9)

    def test_bisection_agrees(self):
        bisection = upper_bound_bisection(self.req, iters=60)
        self.assertEqual(bisection.method, "bisection")
        self.assertAlmostEqual(bisection.value, self.result.value, delta=EPSILON + 1e-6)

    def test_bisection_iterations_validated(self):
        with self.assertRaises(ConfigError):
            upper_bound_bisection(self.req, iters=0)

    def test_negative_channels_are_exact(self):
        channels = (ChannelModel(0.8, 0.2), ChannelModel(0.6, 0.3), ChannelModel(0.7, 0.4, bandwidth=0.5))
        req = BoundRequest(channels, 1, Discounted(0.9))
        result = upper_bound_discounted(req)
        self.assertTrue(result.exact)
        self.assertEqual(result.skipped_intervals, 0)

        low = max(result.m_star - 0.01, 0.0)
        high = min(result.m_star + 0.01, req.max_bandwidth)
        _, grid_value = dense_grid_minimum(req, 1e-4, low, high)
        self.assertLessEqual(result.value, grid_value + 1e-9)
        # ブレークポイントは有限個なので m* で厳密に最小
        for m in (result.m_star - 1e-6, result.m_star + 1e-6):
            if 0.0 <= m <= req.max_bandwidth:
                self.assertLessEqual(result.value, relaxed_objective(req, m) + 1e-10)

    def test_to_dict(self):
        record = self.result.to_dict()
        self.assertEqual(set(record), {"m_star", "value", "exact", "criterion", "method"})
        self.assertEqual(record["criterion"], {"type": "discounted", "beta": BETA})


class TestLargeInstance(unittest.TestCase):
    def test_sixty_four_channels(self):
        rng = np.random.default_rng(64)
        channels = tuple(ChannelModel(float(p01), float(p11))
                         for p01, p11 in rng.uniform(0.05, 0.95, size=(64, 2)))
        req = BoundRequest(channels, 16, Discounted(BETA), epsilon=EPSILON)
        started = time.perf_counter()
        result = upper_bound_discounted(req)
        elapsed = time.perf_counter() - started
        self.assertLess(elapsed, 10.0)
        self.assertTrue(math.isfinite(result.value))
        self.assertLessEqual(result.value, 16 / (1.0 - BETA) + EPSILON)
        self.assertGreaterEqual(result.value, 16 / 64 * stationary_total(channels) / (1.0 - BETA) - 1e-9)


class TestRoundedStationaryBelief(unittest.TestCase):
    """定常確率が浮動小数点で丸められるチャネル (ω_o = 0.125) を含む構成"""
    CHANNELS = (ChannelModel(0.1, 0.3), ChannelModel(0.2, 0.8))

    def test_discounted_bounds_are_finite(self):
        req = BoundRequest(self.CHANNELS, 1, Discounted(0.9))
        # チャネル2を常に観測する方策の価値 ω_o/(1−β) = 5 以上
        for result in (upper_bound_discounted(req), upper_bound_bisection(req)):
            self.assertTrue(math.isfinite(result.value))
            self.assertGreaterEqual(result.value, 5.0 - 1e-9)
            self.assertLessEqual(result.value, 10.0 + EPSILON)

    def test_average_bound_is_finite(self):
        result = upper_bound_average(self.CHANNELS, 1)
        self.assertTrue(math.isfinite(result.value))
        self.assertGreaterEqual(result.value, 0.5 - 1e-6)
        self.assertLessEqual(result.value, 1.0 + 1e-6)


class TestDominatesSimulatedPolicies(unittest.TestCase):
    def test_bounds_above_whittle_and_myopic(self):
        req = BoundRequest(MIXED_CHANNELS, 4, Discounted(BETA), epsilon=EPSILON)
        bounds = (upper_bound_discounted(req).value, upper_bound_bisection(req).value)
        horizon = discounted_horizon(BETA, 4, 1.0)
        for policy in ("whittle", "myopic"):
            result = simulate(SimConfig(channels=MIXED_CHANNELS, K=4, policy=policy, criterion=Discounted(BETA),
                                        horizon=horizon, replications=200, seed=8))
            for bound in bounds:
                self.assertLessEqual(result.mean, bound + 3.0 * result.std_error, msg=policy)


class TestAverageBound(unittest.TestCase):
    def test_all_channels_sensed(self):
        result = upper_bound_average(MIXED_CHANNELS, 8)
        self.assertAlmostEqual(result.value, stationary_total(MIXED_CHANNELS), places=9)
        self.assertEqual(result.to_dict()["criterion"], {"type": "average"})

    def test_bound_brackets_simple_policies(self):
        for K in (1, 2, 4, 6):
            value = upper_bound_average(MIXED_CHANNELS, K, EPSILON).value
            total = stationary_total(MIXED_CHANNELS)
            self.assertGreaterEqual(value, K / 8 * total - 1e-6)
            self.assertLessEqual(value, min(total, K) + 1e-6)

    def test_nondecreasing_in_K(self):
        values = [upper_bound_average(MIXED_CHANNELS, K).value for K in range(1, 9)]
        self.assertTrue(all(a <= b + 1e-6 for a, b in zip(values, values[1:])))

    def test_identical_channels(self):
        channel = ChannelModel(0.2, 0.8)
        result = upper_bound_average((channel,) * 4, 1)
        self.assertGreater(result.m_star, 0.0)
        self.assertLessEqual(result.value, 4 * stationary_belief(channel) + 1e-9)
        self.assertEqual(result.criterion, Average())

    def test_identical_channels_between_closed_form_bounds(self):
        channel = ChannelModel(0.2, 0.8)
        channels = (channel,) * 4
        result = upper_bound_average(channels, 1, EPSILON)
        # Whittle 方策の報酬率の下界と、同一チャネルの上界 ω_o/(p10 + ω_o)
        self.assertGreaterEqual(result.value, 0.4352 / 0.6352 - 1e-9)
        self.assertLessEqual(result.value, 0.5 / 0.7 + EPSILON)

        step = 1e-4
        grid = np.arange(max(result.m_star - 0.01, 0.0), min(result.m_star + 0.01, 1.0) + 0.5 * step, step)
        grid_value = min(average_objective(channels, 1, float(m)) for m in grid)
        self.assertLessEqual(result.value, grid_value + EPSILON)
        self.assertGreaterEqual(result.value, grid_value - len(channels) * step)


if __name__ == '__main__':
    unittest.main()

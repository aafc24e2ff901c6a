import unittest
import sys
import os

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.core.channel_model import (
    INFINITE,
    ChannelModel,
    CorrelationSign,
    belief_bounds,
    crossing_time,
    crossing_time_by_iteration,
    k_step_update,
    one_step_update,
    stationary_belief,
    validate_channel,
)
from src.core.errors import AbsorbingChainError, BadBandwidthError, NumericalGuardError


class TestChannelModel(unittest.TestCase):
    def test_derived_probabilities(self):
        ch = ChannelModel(0.2, 0.8)
        self.assertAlmostEqual(ch.p10, 0.2)
        self.assertAlmostEqual(ch.p00, 0.8)
        self.assertEqual(ch.bandwidth, 1.0)

    def test_correlation_sign(self):
        self.assertIs(ChannelModel(0.2, 0.8).correlation_sign, CorrelationSign.POSITIVE)
        self.assertIs(ChannelModel(0.8, 0.2).correlation_sign, CorrelationSign.NEGATIVE)
        # 無記憶チャネルは正相関側
        self.assertTrue(ChannelModel(0.4, 0.4).is_positive)

    def test_absorbing_chain_rejected(self):
        for p01, p11 in [(0.0, 0.5), (0.5, 1.0), (1.0, 0.3), (0.3, 0.0)]:
            with self.assertRaises(AbsorbingChainError):
                ChannelModel(p01, p11)

    def test_bad_bandwidth_rejected(self):
        with self.assertRaises(BadBandwidthError):
            validate_channel(0.2, 0.8, 1.5)
        with self.assertRaises(NumericalGuardError):
            validate_channel(0.2, 0.8, 0.0)

    def test_exit_codes(self):
        self.assertEqual(AbsorbingChainError.exit_code, 3)
        self.assertEqual(BadBandwidthError.exit_code, 3)


class TestBeliefUpdate(unittest.TestCase):
    def test_one_step_fixed_point(self):
        ch = ChannelModel(0.3, 0.7)
        self.assertAlmostEqual(one_step_update(ch, 0.5), 0.5)
        self.assertAlmostEqual(stationary_belief(ch), 0.5)

    def test_k_step_matches_iteration(self):
        ch = ChannelModel(0.2, 0.8)
        belief = 0.2
        for k in range(1, 30):
            belief = one_step_update(ch, belief)
            self.assertAlmostEqual(k_step_update(ch, 0.2, k), belief, places=12)
        self.assertAlmostEqual(k_step_update(ch, 0.2, 3), 0.4352, places=12)

    def test_k_step_zero_and_negative(self):
        ch = ChannelModel(0.2, 0.8)
        self.assertEqual(k_step_update(ch, 0.37, 0), 0.37)
        with self.assertRaises(ValueError):
            k_step_update(ch, 0.37, -1)

    def test_positive_chain_is_monotone(self):
        ch = ChannelModel(0.1, 0.9)
        chain = [k_step_update(ch, ch.p01, k) for k in range(50)]
        self.assertTrue(all(a <= b for a, b in zip(chain, chain[1:])))
        self.assertTrue(all(b <= stationary_belief(ch) for b in chain))

    def test_negative_chain_alternates(self):
        ch = ChannelModel(0.8, 0.2)
        omega_o = stationary_belief(ch)
        chain = [k_step_update(ch, ch.p11, k) for k in range(1, 10)]
        for k, belief in enumerate(chain, start=1):
            if k % 2 == 1:
                self.assertGreater(belief, omega_o)
            else:
                self.assertLess(belief, omega_o)

    def test_belief_bounds(self):
        self.assertEqual(belief_bounds(ChannelModel(0.8, 0.2)), (0.2, 0.8))
        ch = ChannelModel(0.3, 0.6)
        low, high = belief_bounds(ch)
        for omega in np.linspace(0.0, 1.0, 11):
            self.assertTrue(low - 1e-15 <= one_step_update(ch, omega) <= high + 1e-15)


class TestCrossingTime(unittest.TestCase):
    def test_positive_cases(self):
        ch = ChannelModel(0.2, 0.8)
        self.assertEqual(crossing_time(ch, 0.2, 0.4), 3)
        self.assertEqual(crossing_time(ch, 0.6, 0.4), 0)
        self.assertIs(crossing_time(ch, 0.2, 0.5), INFINITE)
        self.assertIs(crossing_time(ch, 0.2, 0.7), INFINITE)

    def test_equal_is_not_crossed(self):
        ch = ChannelModel(0.2, 0.8)
        self.assertEqual(crossing_time(ch, 0.3, 0.3), crossing_time_by_iteration(ch, 0.3, 0.3))
        self.assertNotEqual(crossing_time(ch, 0.3, 0.3), 0)

    def test_negative_cases(self):
        ch = ChannelModel(0.8, 0.2)
        self.assertEqual(crossing_time(ch, 0.2, 0.5), 1)
        self.assertIs(crossing_time(ch, 0.3, 0.7), INFINITE)
        self.assertEqual(crossing_time(ch, 0.9, 0.7), 0)

    def test_memoryless(self):
        ch = ChannelModel(0.4, 0.4)
        self.assertEqual(crossing_time(ch, 0.1, 0.3), 1)
        self.assertIs(crossing_time(ch, 0.1, 0.5), INFINITE)

    def test_closed_form_matches_iteration(self):
        rng = np.random.default_rng(7)
        checked = 0
        for _ in range(500):
            p01, p11 = rng.uniform(0.05, 0.95, size=2)
            ch = ChannelModel(float(p01), float(p11))
            omega, omega_prime = (float(x) for x in rng.uniform(0.0, 1.0, size=2))
            reference = crossing_time_by_iteration(ch, omega, omega_prime)
            if reference is not INFINITE:
                # 境界すれすれのケースは丸め方向で結果が変わるので除く
                near = [abs(k_step_update(ch, omega, k) - omega_prime) for k in (reference - 1, reference) if k >= 0]
                if min(near) < 1e-9:
                    continue
            self.assertEqual(crossing_time(ch, omega, omega_prime), reference,
                             msg=f"p01={p01}, p11={p11}, omega={omega}, omega'={omega_prime}")
            checked += 1
        self.assertGreater(checked, 400)

    def test_target_at_rounded_stationary_belief(self):
        # ω_o = 0.125 は浮動小数点では 0.12500000000000003 になる
        ch = ChannelModel(0.1, 0.3)
        self.assertGreater(stationary_belief(ch), 0.125)
        self.assertIs(crossing_time(ch, 0.1, 0.125), INFINITE)
        self.assertIs(crossing_time(ch, ch.p01, 0.125), INFINITE)
        self.assertEqual(crossing_time(ch, 0.1, 0.12), crossing_time_by_iteration(ch, 0.1, 0.12))

    def test_targets_near_stationary_belief_on_grid(self):
        for p01 in (0.1, 0.3, 0.5, 0.7, 0.9):
            for p11 in (0.1, 0.3, 0.5, 0.7, 0.9):
                ch = ChannelModel(p01, p11)
                omega_o = stationary_belief(ch)
                for target in (omega_o, np.nextafter(omega_o, 0.0), np.nextafter(omega_o, 1.0), 0.125):
                    steps = crossing_time(ch, min(p01, p11), float(target))
                    self.assertTrue(steps is INFINITE or steps >= 0, msg=f"{ch} target={target}")

    def test_hundred_point_grid(self):
        checked = 0
        for p01 in (0.1, 0.3, 0.5, 0.7, 0.9):
            for p11 in (0.15, 0.35, 0.55, 0.75, 0.95):
                ch = ChannelModel(p01, p11)
                for omega in (0.0, 0.25, 0.6, 1.0):
                    belief = omega
                    for k in range(1, 65):
                        belief = one_step_update(ch, belief)
                        self.assertAlmostEqual(k_step_update(ch, omega, k), belief, delta=1e-12,
                                               msg=f"{ch} omega={omega} k={k}")
                    for omega_prime in (0.2, 0.45, 0.7, 0.9):
                        reference = crossing_time_by_iteration(ch, omega, omega_prime)
                        if reference is not INFINITE:
                            near = [abs(k_step_update(ch, omega, k) - omega_prime)
                                    for k in (reference - 1, reference) if k >= 0]
                            if min(near) < 1e-9:
                                continue
                        self.assertEqual(crossing_time(ch, omega, omega_prime), reference,
                                         msg=f"{ch} omega={omega} omega'={omega_prime}")
                        checked += 1
        self.assertGreater(checked, 300)


if __name__ == '__main__':
    unittest.main()

import unittest
import sys
import os

import numpy as np

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.core.channel_model import ChannelModel, one_step_update
from src.core.criteria import Average, Discounted
from src.core.errors import ConfigError, NotIdenticalError, ObservationMismatchError, TooLargeError
from src.policy.actions import (
    Action,
    BeliefVector,
    joint_belief_update,
    select_myopic,
    select_random,
    select_whittle,
)
from src.policy.policies import POLICIES, QueuePolicy, make_policy

IDENTICAL = (ChannelModel(0.2, 0.8),) * 3


class TestBeliefVector(unittest.TestCase):
    def test_channel_ids_start_at_one(self):
        beliefs = BeliefVector((0.9, 0.1, 0.5))
        self.assertEqual(len(beliefs), 3)
        self.assertEqual(beliefs.omega(1), 0.9)
        self.assertEqual(beliefs.omega(3), 0.5)

    def test_out_of_range_rejected(self):
        with self.assertRaises(ConfigError):
            BeliefVector((0.5, 1.2))
        with self.assertRaises(ConfigError):
            BeliefVector(())

    def test_stationary(self):
        for omega in BeliefVector.stationary(IDENTICAL).omegas:
            self.assertAlmostEqual(omega, 0.5)


class TestJointBeliefUpdate(unittest.TestCase):
    def test_sensed_and_unsensed(self):
        beliefs = BeliefVector((0.9, 0.1, 0.5))
        updated = joint_belief_update(IDENTICAL, beliefs, Action(frozenset({1, 2})), {1: 0, 2: 1})
        self.assertEqual(updated.omega(1), 0.2)
        self.assertEqual(updated.omega(2), 0.8)
        self.assertAlmostEqual(updated.omega(3), one_step_update(IDENTICAL[2], 0.5))

    def test_observation_mismatch(self):
        beliefs = BeliefVector((0.9, 0.1, 0.5))
        with self.assertRaises(ObservationMismatchError):
            joint_belief_update(IDENTICAL, beliefs, Action(frozenset({1, 2})), {1: 0})
        with self.assertRaises(ObservationMismatchError):
            joint_belief_update(IDENTICAL, beliefs, Action(frozenset({1})), {1: 2})

    def test_action_check(self):
        with self.assertRaises(ConfigError):
            Action(frozenset({1, 2})).check(3, 1)
        with self.assertRaises(ConfigError):
            Action(frozenset({4})).check(3, 1)
        self.assertEqual(Action(frozenset({3, 1})).ordered, (1, 3))


class TestSelection(unittest.TestCase):
    def test_myopic_worked_cases(self):
        action = select_myopic(IDENTICAL, BeliefVector((0.9, 0.1, 0.5)), 2)
        self.assertEqual(action.sensed, frozenset({1, 3}))

        channels = (ChannelModel(0.3, 0.6, bandwidth=0.5), ChannelModel(0.3, 0.6, bandwidth=1.0))
        action = select_myopic(channels, BeliefVector((0.8, 0.5)), 1)
        self.assertEqual(action.sensed, frozenset({2}))

    def test_myopic_ties_by_channel_id(self):
        action = select_myopic(IDENTICAL, BeliefVector((0.5, 0.5, 0.5)), 2)
        self.assertEqual(action.sensed, frozenset({1, 2}))
        action = select_myopic(IDENTICAL, BeliefVector((0.5, 0.5, 0.5)), 2, tie_order=(3, 1, 2))
        self.assertEqual(action.sensed, frozenset({1, 3}))

    def test_whittle_equals_myopic_for_identical_channels(self):
        rng = np.random.default_rng(11)
        negative = (ChannelModel(0.8, 0.2),) * 3
        cases = (
            (IDENTICAL, Discounted(0.9), False),
            (IDENTICAL, Average(), False),
            (negative, Discounted(0.9), False),
            # 平均基準・負相関の定数帯ではインデックスが同値になる
            (negative, Average(), True),
        )
        for models, criterion, prefer_immediate in cases:
            for _ in range(10_000):
                beliefs = BeliefVector(tuple(float(x) for x in rng.uniform(0.0, 1.0, size=3)))
                self.assertEqual(select_whittle(models, beliefs, 2, criterion, prefer_immediate=prefer_immediate),
                                 select_myopic(models, beliefs, 2),
                                 msg=f"{models[0]} {criterion} {beliefs.omegas}")

    def test_index_ties_broken_by_channel_id(self):
        models = (ChannelModel(0.8, 0.2),) * 2
        # ω_o = 0.5, T(p11) = 0.68 の間ではインデックスが一定
        beliefs = BeliefVector((0.55, 0.65))
        self.assertEqual(select_whittle(models, beliefs, 1, Average()).sensed, frozenset({1}))
        self.assertEqual(select_whittle(models, beliefs, 1, Average(), tie_order=(2, 1)).sensed, frozenset({2}))
        self.assertEqual(select_whittle(models, beliefs, 1, Average(), prefer_immediate=True).sensed,
                         frozenset({2}))

    def test_whittle_is_myopic_without_discounting(self):
        channels = (ChannelModel(0.2, 0.8), ChannelModel(0.8, 0.2, bandwidth=0.6), ChannelModel(0.4, 0.7, bandwidth=0.9))
        rng = np.random.default_rng(5)
        for _ in range(50):
            beliefs = BeliefVector(tuple(rng.uniform(0.0, 1.0, size=3)))
            self.assertEqual(select_whittle(channels, beliefs, 1, Discounted(0.0)),
                             select_myopic(channels, beliefs, 1))

    def test_whittle_prefers_exploration(self):
        # 同じ即時報酬でも、正相関チャネルの方が将来の情報価値が大きい
        channels = (ChannelModel(0.5, 0.5), ChannelModel(0.1, 0.9))
        action = select_whittle(channels, BeliefVector((0.45, 0.45)), 1, Discounted(0.9))
        self.assertEqual(action.sensed, frozenset({2}))

    def test_invalid_tie_order(self):
        with self.assertRaises(ConfigError):
            select_whittle(IDENTICAL, BeliefVector((0.5, 0.5, 0.5)), 1, Average(), tie_order=(1, 1, 2))

    def test_size_checks(self):
        with self.assertRaises(ConfigError):
            select_myopic(IDENTICAL, BeliefVector((0.5, 0.5)), 1)
        with self.assertRaises(ConfigError):
            select_myopic(IDENTICAL, BeliefVector((0.5, 0.5, 0.5)), 4)

    def test_random_selection(self):
        first = select_random(5, 2, np.random.default_rng(3))
        second = select_random(5, 2, np.random.default_rng(3))
        self.assertEqual(first, second)
        self.assertEqual(len(first.sensed), 2)
        self.assertTrue(first.sensed <= set(range(1, 6)))


class TestPolicyObjects(unittest.TestCase):
    def test_registry(self):
        self.assertEqual(set(POLICIES), {"whittle", "myopic", "queue", "optimal-oracle", "random"})
        with self.assertRaises(ConfigError):
            make_policy("greedy", IDENTICAL, 1, Average(), 10, np.random.default_rng(0))

    def test_queue_requires_identical_channels(self):
        channels = (ChannelModel(0.2, 0.8), ChannelModel(0.3, 0.8))
        with self.assertRaises(NotIdenticalError):
            make_policy("queue", channels, 1, Average(), 10, np.random.default_rng(0))

    def test_queue_policy_follows_observations(self):
        policy = make_policy("queue", IDENTICAL, 1, Average(), 10, np.random.default_rng(0))
        self.assertIsInstance(policy, QueuePolicy)
        policy.on_start(BeliefVector((0.5, 0.5, 0.5)))
        action = policy.select(1, BeliefVector((0.5, 0.5, 0.5)))
        self.assertEqual(action.sensed, frozenset({1}))
        policy.on_observe(action, {1: 0})
        self.assertEqual(policy.select(2, BeliefVector((0.2, 0.5, 0.5))).sensed, frozenset({2}))

    def test_queue_ignores_transition_values(self):
        # 同じ相関符号なら遷移確率の値が違っても、同じ観測列から同じ行動列になる
        rng = np.random.default_rng(8)
        first = make_policy("queue", (ChannelModel(0.2, 0.8),) * 4, 2, Average(), 50, rng)
        second = make_policy("queue", (ChannelModel(0.4, 0.9),) * 4, 2, Average(), 50, rng)
        beliefs = BeliefVector((0.5, 0.5, 0.5, 0.5))
        first.on_start(beliefs)
        second.on_start(beliefs)
        for slot in range(1, 51):
            action = first.select(slot, beliefs)
            self.assertEqual(action, second.select(slot, beliefs))
            observations = {i: int(rng.integers(0, 2)) for i in action.ordered}
            first.on_observe(action, observations)
            second.on_observe(action, observations)

    def test_oracle_size_limits(self):
        with self.assertRaises(TooLargeError):
            make_policy("optimal-oracle", (ChannelModel(0.2, 0.8),) * 5, 1, Average(), 5, np.random.default_rng(0))
        policy = make_policy("optimal-oracle", IDENTICAL, 1, Discounted(0.9), 20, np.random.default_rng(0))
        with self.assertRaises(TooLargeError):
            policy.on_start(BeliefVector((0.5, 0.5, 0.5)))


if __name__ == '__main__':
    unittest.main()

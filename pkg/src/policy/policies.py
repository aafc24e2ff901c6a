"""
シミュレーション用の方策オブジェクト

設計意図:
- 各方策は on_start → (select → on_observe) の繰り返しで駆動する
- 方策が参照できるのは信念ベクトルと観測だけ（真のチャネル状態は渡さない）
- 名前から方策クラスを引く POLICIES テーブルでシミュレータと CLI を切り離す
"""
from typing import Mapping, Sequence

import numpy as np

from src.core.channel_model import ChannelModel
from src.core.criteria import Criterion, Discounted
from src.core.errors import ConfigError
from src.policy.actions import Action, BeliefVector, select_myopic, select_random, select_whittle
from src.policy.bruteforce import BruteForceSolver
from src.policy.queue_policy import QueueState, check_identical, queue_init, queue_step


class SensingPolicy:
    """
    方策の基底クラス。

    Attributes:
        models: 方策が想定するチャネルモデル（シミュレータの真のモデルと異なってよい）
        K: 1スロットの観測本数
        criterion: 報酬基準
    """
    name = "base"

    def __init__(self, models: Sequence[ChannelModel], K: int, criterion: Criterion,
                 horizon: int, rng: np.random.Generator):
        self.models = tuple(models)
        self.K = K
        self.criterion = criterion
        self.horizon = horizon
        self.rng = rng

    def on_start(self, beliefs: BeliefVector) -> None:
        """初期信念を受け取る"""
        pass

    def select(self, slot: int, beliefs: BeliefVector) -> Action:
        """slot (1 始まり) で観測するチャネルを返す"""
        raise NotImplementedError

    def on_observe(self, action: Action, observations: Mapping[int, int]) -> None:
        """観測結果を受け取る"""
        pass


class WhittlePolicy(SensingPolicy):
    name = "whittle"

    def select(self, slot, beliefs):
        return select_whittle(self.models, beliefs, self.K, self.criterion)


class MyopicPolicy(SensingPolicy):
    name = "myopic"

    def select(self, slot, beliefs):
        return select_myopic(self.models, beliefs, self.K)


class RandomPolicy(SensingPolicy):
    name = "random"

    def select(self, slot, beliefs):
        return select_random(len(self.models), self.K, self.rng)


class QueuePolicy(SensingPolicy):
    """
    キュー方策。チャネルの同一性と相関符号だけを初期化時に確認し、
    以降は観測結果だけで並びを更新する。
    """
    name = "queue"

    def __init__(self, models, K, criterion, horizon, rng):
        super().__init__(models, K, criterion, horizon, rng)
        self.correlation_sign = check_identical(self.models)
        self.state: QueueState | None = None

    def on_start(self, beliefs):
        self.state = queue_init(beliefs, self.correlation_sign)

    def select(self, slot, beliefs):
        return Action(frozenset(self.state.head(self.K)))

    def on_observe(self, action, observations):
        self.state = queue_step(self.state, self.K, observations)


class OptimalOraclePolicy(SensingPolicy):
    """
    残りホライズン全体を全探索する方策。平均基準では割引なし (β=1) の総和を最大化する。
    規模制限を超えると TooLargeError がそのまま伝わる。
    """
    name = "optimal-oracle"

    def __init__(self, models, K, criterion, horizon, rng):
        super().__init__(models, K, criterion, horizon, rng)
        beta = criterion.beta if isinstance(criterion, Discounted) else 1.0
        self.solver = BruteForceSolver(self.models, K, beta)

    def on_start(self, beliefs):
        self.solver.action(beliefs, self.horizon)

    def select(self, slot, beliefs):
        return self.solver.action(beliefs, self.horizon - slot + 1)


POLICIES: dict[str, type[SensingPolicy]] = {
    cls.name: cls
    for cls in (WhittlePolicy, MyopicPolicy, QueuePolicy, OptimalOraclePolicy, RandomPolicy)
}


def make_policy(
    name: str,
    models: Sequence[ChannelModel],
    K: int,
    criterion: Criterion,
    horizon: int,
    rng: np.random.Generator
) -> SensingPolicy:
    """名前から方策を生成する"""
    policy_cls = POLICIES.get(name)
    if policy_cls is None:
        raise ConfigError(f"未知の方策です: {name} (選択肢: {', '.join(POLICIES)})")
    return policy_cls(models, K, criterion, horizon, rng)

"""
小規模問題の全探索オラクル（有限ホライズン expectimax）

設計意図:
- 行動 C(N,K) 通り × 観測 2^K 通りを全展開し、信念ノードをメモ化する
- 規模制限 (N <= 4, horizon <= 12) を超える要求は TooLargeError で拒否する
- ソルバーはメモを保持するので、同じ問題を繰り返し解くシミュレーションで使い回す
"""
import itertools
import logging
from typing import Sequence

from src.core.channel_model import ChannelModel
from src.core.errors import ConfigError, TooLargeError
from src.policy.actions import Action, BeliefVector, joint_belief_update

logger = logging.getLogger(__name__)

MAX_CHANNELS = 4
MAX_HORIZON = 12


class BruteForceSolver:
    """
    (models, K, β) を固定した有限ホライズン最適化。

    value(beliefs, h) は残り h スロットの最適期待割引報酬。
    """

    def __init__(self, models: Sequence[ChannelModel], K: int, beta: float):
        self.models = tuple(models)
        self.K = K
        self.beta = beta
        N = len(self.models)
        if not (1 <= K <= N):
            raise ConfigError(f"K は 1 <= K <= N で指定してください (K={K}, N={N})")
        if not (0.0 <= beta <= 1.0):
            raise ConfigError(f"有限ホライズンの割引率は [0, 1] で指定してください: {beta}")
        if N > MAX_CHANNELS:
            raise TooLargeError(f"全探索はチャネル数 {MAX_CHANNELS} までです (N={N})")
        self.actions = [Action(frozenset(c)) for c in itertools.combinations(range(1, N + 1), K)]
        self._memo: dict[tuple[tuple[float, ...], int], tuple[float, int]] = {}

    def _check_horizon(self, horizon: int) -> None:
        if horizon < 1:
            raise ConfigError(f"horizon は 1 以上で指定してください: {horizon}")
        if horizon > MAX_HORIZON:
            raise TooLargeError(f"全探索はホライズン {MAX_HORIZON} までです (horizon={horizon})")

    def _action_value(self, beliefs: BeliefVector, action: Action, horizon: int) -> float:
        sensed = action.ordered
        immediate = sum(beliefs.omega(i) * self.models[i - 1].bandwidth for i in sensed)
        if horizon == 1:
            return immediate

        future = 0.0
        for outcome in itertools.product((0, 1), repeat=len(sensed)):
            probability = 1.0
            for channel_id, state in zip(sensed, outcome):
                omega = beliefs.omega(channel_id)
                probability *= omega if state == 1 else 1.0 - omega
            if probability == 0.0:
                continue
            observations = dict(zip(sensed, outcome))
            following = joint_belief_update(self.models, beliefs, action, observations)
            future += probability * self._solve(following, horizon - 1)[0]
        return immediate + self.beta * future

    def _solve(self, beliefs: BeliefVector, horizon: int) -> tuple[float, int]:
        key = (beliefs.omegas, horizon)
        cached = self._memo.get(key)
        if cached is not None:
            return cached

        best_value = float("-inf")
        best_action = 0
        for position, action in enumerate(self.actions):
            value = self._action_value(beliefs, action, horizon)
            if value > best_value:
                best_value = value
                best_action = position
        self._memo[key] = (best_value, best_action)
        return best_value, best_action

    def value(self, beliefs: BeliefVector, horizon: int) -> float:
        self._check_horizon(horizon)
        return self._solve(beliefs, horizon)[0]

    def action(self, beliefs: BeliefVector, horizon: int) -> Action:
        self._check_horizon(horizon)
        return self.actions[self._solve(beliefs, horizon)[1]]

    @property
    def memo_size(self) -> int:
        return len(self._memo)


def optimal_value_bruteforce(
    models: Sequence[ChannelModel],
    beliefs: BeliefVector,
    K: int,
    beta: float,
    horizon: int
) -> float:
    """
    有限ホライズンの最適期待割引報酬。
    無限ホライズンの最適値とは β^horizon·K·max B/(1−β) 以内で一致する。

    Raises:
        TooLargeError: N > 4 または horizon > 12
    """
    solver = BruteForceSolver(models, K, beta)
    value = solver.value(beliefs, horizon)
    logger.debug("bruteforce N=%d K=%d horizon=%d nodes=%d", len(solver.models), K, horizon, solver.memo_size)
    return value


def optimal_action_bruteforce(
    models: Sequence[ChannelModel],
    beliefs: BeliefVector,
    K: int,
    beta: float,
    horizon: int
) -> Action:
    """残り horizon スロットでの最適行動（同値は組合せの辞書順で先のもの）"""
    return BruteForceSolver(models, K, beta).action(beliefs, horizon)


def tail_bound(models: Sequence[ChannelModel], K: int, beta: float, horizon: int) -> float:
    """打ち切りによる誤差上界 β^horizon·K·max B/(1−β)"""
    if beta >= 1.0:
        raise ConfigError("tail_bound は β < 1 でのみ定義されます")
    max_bandwidth = max(ch.bandwidth for ch in models)
    return beta ** horizon * K * max_bandwidth / (1.0 - beta)

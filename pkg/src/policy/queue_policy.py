"""
確率的に同一なチャネル向けのキュー方策

設計意図:
- キュー操作は信念の順序と相関符号だけを受け取り、遷移確率 (p01, p11) の値は受け取らない
- 同一性の検査は check_identical に分け、キュー操作の外で一度だけ行う
- 観測 1 / 観測 0 のグループ内の相対順序は入力順を保つ（安定）
"""
from dataclasses import dataclass
from typing import Mapping, Sequence

from src.core.channel_model import ChannelModel, CorrelationSign
from src.core.errors import ConfigError, NotIdenticalError, ObservationMismatchError
from src.policy.actions import BeliefVector


@dataclass(frozen=True)
class QueueState:
    """
    チャネルの優先順キュー。

    Attributes:
        order: チャネル ID の順列（先頭が最優先）
        correlation_sign: 全チャネル共通の相関符号
    """
    order: tuple[int, ...]
    correlation_sign: CorrelationSign

    def __post_init__(self):
        order = tuple(int(i) for i in self.order)
        if sorted(order) != list(range(1, len(order) + 1)):
            raise ConfigError(f"キューの並びが 1..N の順列ではありません: {order}")
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "correlation_sign", CorrelationSign(self.correlation_sign))

    def head(self, K: int) -> tuple[int, ...]:
        """先頭 K 本（このスロットで観測するチャネル）"""
        if not (1 <= K <= len(self.order)):
            raise ConfigError(f"K は 1 <= K <= N で指定してください (K={K}, N={len(self.order)})")
        return self.order[:K]


def check_identical(models: Sequence[ChannelModel]) -> CorrelationSign:
    """
    全チャネルが同一の (p01, p11, B) を持つことを確認し、共通の相関符号を返す。

    Raises:
        NotIdenticalError: 異なるチャネルが含まれる
    """
    if not models:
        raise ConfigError("チャネルが指定されていません")
    first = models[0]
    for channel_id, ch in enumerate(models, start=1):
        if ch != first:
            raise NotIdenticalError(
                f"チャネル {channel_id} ({ch.p01}, {ch.p11}, {ch.bandwidth}) が"
                f"チャネル 1 ({first.p01}, {first.p11}, {first.bandwidth}) と異なります"
            )
    return first.correlation_sign


def queue_init(beliefs: BeliefVector, correlation_sign: CorrelationSign = CorrelationSign.POSITIVE) -> QueueState:
    """初期信念の降順に並べる（同値はチャネル ID の小さい方が先）"""
    order = sorted(range(1, len(beliefs) + 1), key=lambda i: (-beliefs.omega(i), i))
    return QueueState(tuple(order), correlation_sign)


def queue_init_for(models: Sequence[ChannelModel], beliefs: BeliefVector) -> QueueState:
    """チャネル群の同一性を確かめてから queue_init を呼ぶ"""
    sign = check_identical(models)
    if len(models) != len(beliefs):
        raise ConfigError(f"チャネル数 {len(models)} と信念ベクトル長 {len(beliefs)} が一致しません")
    return queue_init(beliefs, sign)


def queue_step(q: QueueState, K: int, observations: Mapping[int, int]) -> QueueState:
    """
    先頭 K 本の観測結果でキューを並べ替える。

    正相関: [観測 1, 未観測, 観測 0]
    負相関: [観測 0, 未観測（逆順）, 観測 1]

    Raises:
        ObservationMismatchError: 観測のキーが先頭 K 本と一致しない
    """
    head = q.head(K)
    if set(observations) != set(head):
        raise ObservationMismatchError(
            f"観測 {sorted(observations)} がキュー先頭 {sorted(head)} と一致しません"
        )
    if any(observations[i] not in (0, 1) for i in head):
        raise ObservationMismatchError(f"観測値は 0/1 で指定してください: {dict(observations)}")

    good = [i for i in head if observations[i] == 1]
    bad = [i for i in head if observations[i] == 0]
    rest = list(q.order[K:])

    if q.correlation_sign is CorrelationSign.POSITIVE:
        order = good + rest + bad
    else:
        order = bad + rest[::-1] + good
    return QueueState(tuple(order), q.correlation_sign)

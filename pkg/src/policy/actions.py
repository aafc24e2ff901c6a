"""
信念ベクトルと行動選択

設計意図:
- チャネル ID は 1 始まり（BeliefVector の位置 + 1）
- 選択規則はすべて「キーで並べて上位 K 本」の形にそろえる
- インデックスが数値誤差の範囲で等しい場合はタイブレーク順（既定はチャネル ID 昇順）で決める
"""
import functools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from src.core.channel_model import ChannelModel, one_step_update, stationary_belief
from src.core.criteria import Criterion
from src.core.errors import ConfigError, ObservationMismatchError
from src.core.whittle_index import index_value

# インデックス同士をこの幅以内なら同値として扱う
INDEX_TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class BeliefVector:
    """
    全チャネルの信念 Ω(t)。

    Attributes:
        omegas: omegas[i − 1] がチャネル i の信念
    """
    omegas: tuple[float, ...]

    def __post_init__(self):
        omegas = tuple(float(w) for w in self.omegas)
        if not omegas:
            raise ConfigError("信念ベクトルが空です")
        for channel_id, omega in enumerate(omegas, start=1):
            if not (0.0 <= omega <= 1.0):
                raise ConfigError(f"チャネル {channel_id} の信念 {omega} が [0, 1] の範囲外です")
        object.__setattr__(self, "omegas", omegas)

    @classmethod
    def stationary(cls, models: Sequence[ChannelModel]) -> "BeliefVector":
        return cls(tuple(stationary_belief(ch) for ch in models))

    def __len__(self) -> int:
        return len(self.omegas)

    def omega(self, channel_id: int) -> float:
        return self.omegas[channel_id - 1]


@dataclass(frozen=True)
class Action:
    """1スロットで観測するチャネル集合 U(t)"""
    sensed: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "sensed", frozenset(int(i) for i in self.sensed))

    def check(self, N: int, K: int) -> None:
        if len(self.sensed) != K:
            raise ConfigError(f"選択チャネル数が K={K} と一致しません: {sorted(self.sensed)}")
        if any(not (1 <= i <= N) for i in self.sensed):
            raise ConfigError(f"チャネル ID は 1..{N} で指定してください: {sorted(self.sensed)}")

    @property
    def ordered(self) -> tuple[int, ...]:
        return tuple(sorted(self.sensed))


def _check_sizes(models: Sequence[ChannelModel], beliefs: BeliefVector, K: int) -> None:
    if len(models) != len(beliefs):
        raise ConfigError(f"チャネル数 {len(models)} と信念ベクトル長 {len(beliefs)} が一致しません")
    if not (1 <= K <= len(models)):
        raise ConfigError(f"K は 1 <= K <= N で指定してください (K={K}, N={len(models)})")


def _tie_ranks(N: int, tie_order: Sequence[int] | None) -> dict[int, int]:
    if tie_order is None:
        return {i: i for i in range(1, N + 1)}
    if sorted(tie_order) != list(range(1, N + 1)):
        raise ConfigError(f"tie_order は 1..{N} の順列で指定してください: {tuple(tie_order)}")
    return {channel_id: rank for rank, channel_id in enumerate(tie_order)}


def joint_belief_update(
    models: Sequence[ChannelModel],
    beliefs: BeliefVector,
    action: Action,
    observations: Mapping[int, int]
) -> BeliefVector:
    """
    観測したチャネルは p11 / p01 に、未観測のチャネルは T(ω) に更新する。

    Raises:
        ObservationMismatchError: 観測のキーが action.sensed と一致しない
    """
    if set(observations) != set(action.sensed):
        raise ObservationMismatchError(
            f"観測 {sorted(observations)} が選択チャネル {sorted(action.sensed)} と一致しません"
        )
    updated = []
    for channel_id, (ch, omega) in enumerate(zip(models, beliefs.omegas), start=1):
        if channel_id in action.sensed:
            state = observations[channel_id]
            if state not in (0, 1):
                raise ObservationMismatchError(f"チャネル {channel_id} の観測値 {state} は 0/1 ではありません")
            updated.append(ch.p11 if state == 1 else ch.p01)
        else:
            updated.append(one_step_update(ch, omega))
    return BeliefVector(tuple(updated))


def select_whittle(
    models: Sequence[ChannelModel],
    beliefs: BeliefVector,
    K: int,
    criterion: Criterion,
    tie_order: Sequence[int] | None = None,
    prefer_immediate: bool = False
) -> Action:
    """
    インデックス上位 K 本を選ぶ。

    同値のインデックスは tie_order（既定はチャネル ID 昇順）で決める。
    prefer_immediate=True のときは tie_order の前に即時報酬 ω·B の大きい方を優先する。
    """
    _check_sizes(models, beliefs, K)
    ranks = _tie_ranks(len(models), tie_order)
    entries = [
        (channel_id, index_value(ch, omega, criterion), omega * ch.bandwidth)
        for channel_id, (ch, omega) in enumerate(zip(models, beliefs.omegas), start=1)
    ]

    def compare(a, b) -> int:
        if abs(a[1] - b[1]) > INDEX_TIE_TOLERANCE:
            return -1 if a[1] > b[1] else 1
        if prefer_immediate and a[2] != b[2]:
            return -1 if a[2] > b[2] else 1
        return ranks[a[0]] - ranks[b[0]]

    ordered = sorted(entries, key=functools.cmp_to_key(compare))
    return Action(frozenset(channel_id for channel_id, _, _ in ordered[:K]))


def select_myopic(
    models: Sequence[ChannelModel],
    beliefs: BeliefVector,
    K: int,
    tie_order: Sequence[int] | None = None
) -> Action:
    """即時報酬 ω·B の上位 K 本。同値はチャネル ID の小さい方。"""
    _check_sizes(models, beliefs, K)
    ranks = _tie_ranks(len(models), tie_order)
    ordered = sorted(
        range(1, len(models) + 1),
        key=lambda i: (-beliefs.omega(i) * models[i - 1].bandwidth, ranks[i]),
    )
    return Action(frozenset(ordered[:K]))


def select_random(N: int, K: int, rng: np.random.Generator) -> Action:
    """一様ランダムに K 本（比較用のベースライン）"""
    if not (1 <= K <= N):
        raise ConfigError(f"K は 1 <= K <= N で指定してください (K={K}, N={N})")
    picked = rng.choice(N, size=K, replace=False)
    return Action(frozenset(int(i) + 1 for i in picked))

"""
再現可能な乱数ストリーム

設計意図:
- カウンタベースの Philox 生成器を使い、レプリケーションごとに SeedSequence から独立な子ストリームを派生させる
- 1レプリケーションにつきチャネル用・方策用の2本を持ち、方策の乱数消費がチャネル状態列を変えないようにする
- 並列実行の順序に結果が依存しない
"""
from dataclasses import dataclass

import numpy as np

from src.core.errors import ConfigError

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class ReplicationStreams:
    """
    seed から派生した全レプリケーションの乱数の種。

    Attributes:
        seed: 64bit の親シード
        replications: レプリケーション数
    """
    seed: int
    replications: int

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError(f"replications は 1 以上で指定してください: {self.replications}")
        if not (0 <= self.seed <= SEED_MASK):
            raise ConfigError(f"seed は 0 以上 2^64 未満で指定してください: {self.seed}")
        children = np.random.SeedSequence(self.seed).spawn(self.replications)
        object.__setattr__(self, "_pairs", tuple(tuple(child.spawn(2)) for child in children))

    def generators(self, replication: int) -> tuple[np.random.Generator, np.random.Generator]:
        """(チャネル用, 方策用) の生成器を新しく作って返す"""
        channel_seed, policy_seed = self._pairs[replication]
        return (
            np.random.Generator(np.random.Philox(channel_seed)),
            np.random.Generator(np.random.Philox(policy_seed)),
        )

"""
報酬基準としきい値方策の型定義

設計意図:
- 割引基準 / 平均基準を型で区別し、分岐を isinstance で書けるようにする
- しきい値は「常に能動」「常に受動」「内部しきい値」の3種を明示的に持つ
"""
from dataclasses import dataclass
from enum import Enum

from src.core.errors import ConfigError


@dataclass(frozen=True)
class Discounted:
    """割引報酬基準 (0 <= β < 1)"""
    beta: float

    def __post_init__(self):
        if not (0.0 <= self.beta < 1.0):
            raise ConfigError(f"割引率 beta は [0, 1) で指定してください: {self.beta}")


@dataclass(frozen=True)
class Average:
    """平均報酬基準"""


Criterion = Discounted | Average


class ThresholdKind(Enum):
    ALWAYS_ACTIVE = "always_active"
    ALWAYS_PASSIVE = "always_passive"
    INTERIOR = "interior"


# 内部計算で使うしきい値の代用値 (ω* = b < 0, ω* = c > 1 に相当)
ACTIVE_CUT = -1.0
PASSIVE_CUT = 2.0


@dataclass(frozen=True)
class ThresholdResult:
    """
    最適方策のしきい値 ω*。信念 ω が ω <= ω* のとき受動。

    Attributes:
        kind: しきい値の種類
        omega_star: INTERIOR のときのみ [0, 1] の値
    """
    kind: ThresholdKind
    omega_star: float | None = None

    @classmethod
    def always_active(cls) -> "ThresholdResult":
        return cls(ThresholdKind.ALWAYS_ACTIVE)

    @classmethod
    def always_passive(cls) -> "ThresholdResult":
        return cls(ThresholdKind.ALWAYS_PASSIVE)

    @classmethod
    def interior(cls, omega_star: float) -> "ThresholdResult":
        if not (0.0 <= omega_star <= 1.0):
            raise ValueError(f"interior threshold must lie in [0, 1], got {omega_star}")
        return cls(ThresholdKind.INTERIOR, omega_star)

    @property
    def cut(self) -> float:
        """受動集合 {ω : ω <= cut} を与える実数値"""
        if self.kind is ThresholdKind.ALWAYS_ACTIVE:
            return ACTIVE_CUT
        if self.kind is ThresholdKind.ALWAYS_PASSIVE:
            return PASSIVE_CUT
        return self.omega_star

    def is_passive(self, omega: float) -> bool:
        return omega <= self.cut

"""
Gilbert-Elliot チャネルモデル

設計意図:
- チャネルは不変 (frozen) な値オブジェクトとして扱い、スレッド間で共有できるようにする
- p10 / p00 は保持せず常に計算する
- 信念更新・交差時間はすべて閉形式で評価し、反復版はテスト用の参照実装として残す
"""
import math
from dataclasses import dataclass
from enum import Enum, IntEnum

from src.core.channel_validator import check_bandwidth, check_transition_probabilities
from src.core.errors import AbsorbingChainError, BadBandwidthError


class CorrelationSign(IntEnum):
    """チャネル状態の相関符号。以降の公式の分岐をすべて決める。"""
    POSITIVE = 1
    NEGATIVE = -1


class Infinite(Enum):
    """交差時間が有限にならないことを表す列挙値"""
    INFINITE = "inf"

    def __repr__(self):
        return "INFINITE"


INFINITE = Infinite.INFINITE

CrossingTime = int | Infinite


@dataclass(frozen=True)
class ChannelModel:
    """
    1本のチャネル（アーム）の遷移確率と帯域幅。

    Attributes:
        p01: 悪→良 の遷移確率
        p11: 良→良 の遷移確率
        bandwidth: 良状態で得られる報酬 B (0 < B <= 1)
    """
    p01: float
    p11: float
    bandwidth: float = 1.0

    def __post_init__(self):
        ok, reason = check_transition_probabilities(self.p01, self.p11)
        if not ok:
            raise AbsorbingChainError(reason)
        ok, reason = check_bandwidth(self.bandwidth)
        if not ok:
            raise BadBandwidthError(reason)

    @property
    def p10(self) -> float:
        return 1.0 - self.p11

    @property
    def p00(self) -> float:
        return 1.0 - self.p01

    @property
    def correlation_sign(self) -> CorrelationSign:
        # p11 == p01 (無記憶) は正相関として扱う
        if self.p11 >= self.p01:
            return CorrelationSign.POSITIVE
        return CorrelationSign.NEGATIVE

    @property
    def is_positive(self) -> bool:
        return self.correlation_sign is CorrelationSign.POSITIVE


def validate_channel(p01: float, p11: float, bandwidth: float = 1.0) -> ChannelModel:
    """
    パラメータを検証して ChannelModel を返す。

    Raises:
        AbsorbingChainError: p01 または p11 が (0, 1) の外
        BadBandwidthError: bandwidth が (0, 1] の外
    """
    return ChannelModel(p01=p01, p11=p11, bandwidth=bandwidth)


def one_step_update(ch: ChannelModel, omega: float) -> float:
    """未観測チャネルの1ステップ信念更新 T(ω) = ω·p11 + (1−ω)·p01"""
    return omega * ch.p11 + (1.0 - omega) * ch.p01


def stationary_belief(ch: ChannelModel) -> float:
    """定常確率 ω_o = p01 / (p01 + p10)。one_step_update の不動点。"""
    return ch.p01 / (ch.p01 + ch.p10)


def k_step_update(ch: ChannelModel, omega: float, k: int) -> float:
    """
    k ステップ連続で未観測のときの信念 T^k(ω) を閉形式で返す。

    T^k(ω) = ω_o − (p11 − p01)^k · (ω_o − ω)
    """
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    if k == 0:
        return omega
    omega_o = stationary_belief(ch)
    return omega_o - (ch.p11 - ch.p01) ** k * (omega_o - omega)


def crossing_time(ch: ChannelModel, omega: float, omega_prime: float) -> CrossingTime:
    """
    信念 ω から受動のまま何スロットで ω′ を超えるか: min{k : T^k(ω) > ω′}。

    正相関は対数の閉形式、負相関は {0, 1, ∞} の3分岐で評価する。
    境界との比較は厳密な不等号（等号は「まだ超えていない」）。
    """
    if omega > omega_prime:
        return 0

    if not ch.is_positive:
        if one_step_update(ch, omega) > omega_prime:
            return 1
        return INFINITE

    slope = ch.p11 - ch.p01
    # ω′ >= ω_o の判定は p01 − ω′(1 − slope) の符号で行う（丸めた ω_o と比べない）
    numerator = ch.p01 - omega_prime * (1.0 - slope)
    if numerator <= 0.0 or omega_prime >= stationary_belief(ch):
        return INFINITE

    if slope == 0.0:
        # 無記憶チャネル: 1ステップで ω_o に到達する
        return 1

    ratio = numerator / (ch.p01 - omega * (1.0 - slope))
    estimate = math.floor(math.log(ratio) / math.log(slope)) + 1
    return _adjust_crossing(ch, omega, omega_prime, max(estimate, 1))


def _adjust_crossing(ch: ChannelModel, omega: float, omega_prime: float, estimate: int) -> int:
    """floor(log) の丸め誤差を T^L(ω) > ω′ ≥ T^(L−1)(ω) になるよう1ステップずつ補正"""
    steps = estimate
    while steps > 1 and k_step_update(ch, omega, steps - 1) > omega_prime:
        steps -= 1
    while k_step_update(ch, omega, steps) <= omega_prime:
        steps += 1
    return steps


def crossing_time_by_iteration(
    ch: ChannelModel,
    omega: float,
    omega_prime: float,
    max_steps: int = 10_000
) -> CrossingTime:
    """one_step_update を素朴に反復する参照実装。max_steps 以内に超えなければ INFINITE。"""
    belief = omega
    for steps in range(max_steps + 1):
        if belief > omega_prime:
            return steps
        belief = one_step_update(ch, belief)
    return INFINITE


def belief_bounds(ch: ChannelModel) -> tuple[float, float]:
    """1回以上更新した信念が必ず収まる区間 [min{p01,p11}, max{p01,p11}]"""
    return min(ch.p01, ch.p11), max(ch.p01, ch.p11)

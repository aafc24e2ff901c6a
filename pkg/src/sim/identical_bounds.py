"""
同一チャネル時の性能の解析的な上下界と伝送期間

設計意図:
- 下界は Whittle 方策がチャネルに戻るまでの最短待ち時間から、上界は平均基準の緩和問題から得る
- 近似率 η の下界は K の特別な値では 1、それ以外は成り立つ式の最大値
- 伝送期間 τ(ω) の分布は幾何分布で、期待値は閉形式
"""
from dataclasses import dataclass

from src.core.channel_model import ChannelModel, k_step_update, one_step_update, stationary_belief
from src.core.criteria import Average, Criterion
from src.core.errors import ConfigError


@dataclass(frozen=True)
class IdenticalBounds:
    """
    Attributes:
        lower: Whittle 方策の報酬率の下界
        upper: 最適報酬率の上界
        eta_lower: 近似率 η = J_w / J の下界 (0, 1]
    """
    lower: float
    upper: float
    eta_lower: float


def identical_channel_bounds(channel: ChannelModel, N: int, K: int,
                             criterion: Criterion = Average()) -> IdenticalBounds:
    """N 本の同一チャネルから K 本選ぶときの平均報酬率の上下界"""
    if not isinstance(criterion, Average):
        raise ConfigError("identical_channel_bounds は平均基準のみ対応しています")
    if not (1 <= K <= N):
        raise ConfigError(f"K は 1 <= K <= N で指定してください (K={K}, N={N})")

    bandwidth = channel.bandwidth
    omega_o = stationary_belief(channel)
    rounds = N // K

    if channel.is_positive:
        start = k_step_update(channel, channel.p01, rounds - 1)
        lower = K * start / (channel.p10 + start)
        upper = min(K * omega_o / (channel.p10 + omega_o), N * omega_o)
    else:
        start = k_step_update(channel, channel.p11, 2 * rounds - 2)
        lower = K * channel.p01 / (1.0 - start + channel.p01)
        upper = min(K * channel.p01 / (1.0 - one_step_update(channel, channel.p11) + channel.p01),
                    N * omega_o)

    lower *= bandwidth
    upper *= bandwidth
    ratio = lower / upper if upper > 0.0 else 1.0

    if K in (N - 1, N) or (K == 1 and channel.is_positive):
        eta = 1.0
    elif channel.is_positive:
        eta = max(K / N, 1.0 - channel.p11 + omega_o, ratio)
    else:
        eta = max(0.5, K / N, ratio)

    return IdenticalBounds(lower=lower, upper=upper, eta_lower=min(eta, 1.0))


def transmission_period_pmf(channel: ChannelModel, start_omega: float, length: int) -> float:
    """Pr[τ(ω) = length]。正相関は悪状態、負相関は良状態で期間が終わる。"""
    if length < 1:
        return 0.0
    if channel.is_positive:
        if length == 1:
            return 1.0 - start_omega
        return start_omega * channel.p11 ** (length - 2) * channel.p10
    if length == 1:
        return start_omega
    return (1.0 - start_omega) * channel.p00 ** (length - 2) * channel.p01


def expected_transmission_period(channel: ChannelModel, start_omega: float) -> float:
    """E[τ(ω)]。正相関 1 + ω/p10、負相関 1 + (1−ω)/p01。"""
    if not (0.0 <= start_omega <= 1.0):
        raise ConfigError(f"start_omega は [0, 1] で指定してください: {start_omega}")
    if channel.is_positive:
        return 1.0 + start_omega / channel.p10
    return 1.0 + (1.0 - start_omega) / channel.p01


def rate_from_period(channel: ChannelModel, K: int, mean_period: float) -> float:
    """伝送期間の平均長から報酬率を得る（正相関 K(1 − 1/E[τ])、負相関 K/E[τ]）"""
    if mean_period < 1.0:
        raise ConfigError(f"伝送期間の平均は 1 以上です: {mean_period}")
    if channel.is_positive:
        return channel.bandwidth * K * (1.0 - 1.0 / mean_period)
    return channel.bandwidth * K / mean_period

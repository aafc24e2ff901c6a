"""
モンテカルロ評価ハーネス

設計意図:
- 真のチャネル状態はシミュレータだけが持ち、方策には信念と観測だけを渡す
- 各スロットで観測の有無にかかわらず N 個の一様乱数を消費し、方策間で共通乱数となるようにする
- 割引基準はホライズン打ち切り誤差 β^T·K·max B/(1−β) を結果に添える
- 平均基準は先頭 10% をバーンインとして捨てる
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from src.core.channel_model import ChannelModel, stationary_belief
from src.core.criteria import Average, Criterion, Discounted
from src.core.errors import ConfigError
from src.policy.actions import BeliefVector, joint_belief_update
from src.policy.policies import POLICIES, make_policy
from src.sim.rng import ReplicationStreams

logger = logging.getLogger(__name__)

DEFAULT_TRUNCATION_TOLERANCE = 1e-4
DEFAULT_BURN_IN_FRACTION = 0.1


@dataclass(frozen=True)
class SimConfig:
    """
    シミュレーション1回分の設定。

    Attributes:
        channels: チャネル列
        K: 1スロットの観測本数
        policy: 方策名 (whittle / myopic / queue / optimal-oracle / random)
        criterion: Discounted(β) または Average()
        horizon: スロット数
        replications: レプリケーション数
        seed: 64bit シード
        initial_beliefs: 初期信念（None なら定常確率）
        switch_slot: このスロット以降の状態遷移を switch_channels で行う（方策側のモデルは変えない）
    """
    channels: tuple[ChannelModel, ...]
    K: int
    policy: str
    criterion: Criterion
    horizon: int
    replications: int
    seed: int
    initial_beliefs: tuple[float, ...] | None = None
    burn_in_fraction: float = DEFAULT_BURN_IN_FRACTION
    workers: int = 1
    record_trace: bool = False
    switch_slot: int | None = None
    switch_channels: tuple[ChannelModel, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        N = len(self.channels)
        if N == 0:
            raise ConfigError("channels が空です")
        if not (1 <= self.K <= N):
            raise ConfigError(f"K は 1 <= K <= N で指定してください (K={self.K}, N={N})")
        if self.policy not in POLICIES:
            raise ConfigError(f"未知の方策です: {self.policy}")
        if self.horizon < 1:
            raise ConfigError(f"horizon は 1 以上で指定してください: {self.horizon}")
        if self.replications < 1:
            raise ConfigError(f"replications は 1 以上で指定してください: {self.replications}")
        if not (0.0 <= self.burn_in_fraction < 1.0):
            raise ConfigError(f"burn_in_fraction は [0, 1) で指定してください: {self.burn_in_fraction}")
        if self.workers < 1:
            raise ConfigError(f"workers は 1 以上で指定してください: {self.workers}")
        if self.initial_beliefs is not None:
            BeliefVector(tuple(self.initial_beliefs))
            if len(self.initial_beliefs) != N:
                raise ConfigError("initial_beliefs の長さがチャネル数と一致しません")
            object.__setattr__(self, "initial_beliefs", tuple(float(b) for b in self.initial_beliefs))
        if self.switch_channels is not None:
            object.__setattr__(self, "switch_channels", tuple(self.switch_channels))
            if len(self.switch_channels) != N or self.switch_slot is None:
                raise ConfigError("switch_channels にはチャネル数分のモデルと switch_slot が必要です")

    @property
    def N(self) -> int:
        return len(self.channels)

    @property
    def beliefs(self) -> BeliefVector:
        if self.initial_beliefs is None:
            return BeliefVector.stationary(self.channels)
        return BeliefVector(self.initial_beliefs)

    @property
    def max_bandwidth(self) -> float:
        return max(ch.bandwidth for ch in self.channels)

    @property
    def burn_in(self) -> int:
        if isinstance(self.criterion, Average):
            return int(math.floor(self.burn_in_fraction * self.horizon))
        return 0

    def transition_models(self, slot: int) -> tuple[ChannelModel, ...]:
        """slot（1 始まり）の状態へ遷移するときに使う真のモデル"""
        if self.switch_slot is not None and slot >= self.switch_slot:
            return self.switch_channels
        return self.channels


@dataclass(frozen=True)
class SlotRecord:
    """1スロット分の記録"""
    slot: int
    sensed: tuple[int, ...]
    states: tuple[int, ...]
    reward: float


@dataclass(frozen=True)
class SimResult:
    """
    シミュレーション結果。

    Attributes:
        mean: レプリケーション平均
        std_error: 標準誤差（正規近似）
        values: レプリケーションごとの値（レプリケーション番号順）
        config: 入力設定
        truncation_bound: 割引基準の打ち切り誤差上界（平均基準では 0）
        traces: record_trace=True のときのスロット記録
    """
    mean: float
    std_error: float
    values: tuple[float, ...]
    config: SimConfig
    truncation_bound: float
    traces: tuple[tuple[SlotRecord, ...], ...] = field(default=(), repr=False)


def discounted_horizon(beta: float, K: int, max_bandwidth: float,
                       tolerance: float = DEFAULT_TRUNCATION_TOLERANCE) -> int:
    """β^T·K·max B/(1−β) < tolerance となる最小の T"""
    if not (0.0 <= beta < 1.0):
        raise ConfigError(f"beta は [0, 1) で指定してください: {beta}")
    if beta == 0.0:
        return 1
    scale = K * max_bandwidth / (1.0 - beta)
    if scale < tolerance:
        return 1
    horizon = int(math.floor(math.log(tolerance / scale) / math.log(beta))) + 1
    while beta ** horizon * scale >= tolerance:
        horizon += 1
    return max(horizon, 1)


def truncation_bound(cfg: SimConfig) -> float:
    if isinstance(cfg.criterion, Discounted):
        beta = cfg.criterion.beta
        return beta ** cfg.horizon * cfg.K * cfg.max_bandwidth / (1.0 - beta)
    return 0.0


def _run_replication(cfg: SimConfig, streams: ReplicationStreams, replication: int) -> tuple[float, tuple[SlotRecord, ...]]:
    channel_rng, policy_rng = streams.generators(replication)
    beliefs = cfg.beliefs
    states = (channel_rng.random(cfg.N) < np.array(beliefs.omegas)).astype(int)

    policy = make_policy(cfg.policy, cfg.channels, cfg.K, cfg.criterion, cfg.horizon, policy_rng)
    policy.on_start(beliefs)

    discount = cfg.criterion.beta if isinstance(cfg.criterion, Discounted) else 1.0
    weight = 1.0
    total = 0.0
    trace = []

    for slot in range(1, cfg.horizon + 1):
        action = policy.select(slot, beliefs)
        action.check(cfg.N, cfg.K)
        sensed = action.ordered
        observations = {i: int(states[i - 1]) for i in sensed}
        reward = sum(cfg.channels[i - 1].bandwidth * observations[i] for i in sensed)

        if isinstance(cfg.criterion, Discounted):
            total += weight * reward
            weight *= discount
        elif slot > cfg.burn_in:
            total += reward
        if cfg.record_trace:
            trace.append(SlotRecord(slot, sensed, tuple(int(s) for s in states), float(reward)))

        policy.on_observe(action, observations)
        beliefs = joint_belief_update(cfg.channels, beliefs, action, observations)

        models = cfg.transition_models(slot + 1)
        p_good = np.where(states == 1,
                          np.array([ch.p11 for ch in models]),
                          np.array([ch.p01 for ch in models]))
        states = (channel_rng.random(cfg.N) < p_good).astype(int)

    if isinstance(cfg.criterion, Average):
        total /= cfg.horizon - cfg.burn_in
    return float(total), tuple(trace)


def simulate(cfg: SimConfig) -> SimResult:
    """
    方策を cfg.replications 回シミュレートする。同じ cfg からは常に同じ値列が得られる。

    Raises:
        TooLargeError: optimal-oracle 方策の規模制限を超えた
    """
    streams = ReplicationStreams(cfg.seed, cfg.replications)
    indices = range(cfg.replications)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            outcomes = list(executor.map(lambda r: _run_replication(cfg, streams, r), indices))
    else:
        outcomes = [_run_replication(cfg, streams, r) for r in indices]

    values = np.array([value for value, _ in outcomes])
    mean = float(np.mean(values))
    std_error = 0.0
    if len(values) > 1:
        std_error = float(np.std(values, ddof=1) / math.sqrt(len(values)))

    logger.info("simulate policy=%s N=%d K=%d horizon=%d reps=%d mean=%.6f se=%.6f",
                cfg.policy, cfg.N, cfg.K, cfg.horizon, cfg.replications, mean, std_error)
    return SimResult(
        mean=mean,
        std_error=std_error,
        values=tuple(float(v) for v in values),
        config=cfg,
        truncation_bound=truncation_bound(cfg),
        traces=tuple(trace for _, trace in outcomes) if cfg.record_trace else (),
    )


def transmission_periods(trace: Sequence[SlotRecord], N: int) -> list[int]:
    """
    各チャネルが連続して選ばれ続けたスロット数（完了した期間のみ）。
    最終スロットまで続いている期間は数えない。
    """
    periods = []
    running = [0] * (N + 1)
    for record in trace:
        sensed = set(record.sensed)
        for channel_id in range(1, N + 1):
            if channel_id in sensed:
                running[channel_id] += 1
            elif running[channel_id] > 0:
                periods.append(running[channel_id])
                running[channel_id] = 0
    return periods


def cumulative_rewards(trace: Sequence[SlotRecord]) -> list[float]:
    """スロットごとの累積報酬"""
    return [float(v) for v in np.cumsum([record.reward for record in trace])]


def action_stream(trace: Sequence[SlotRecord]) -> list[tuple[int, ...]]:
    return [record.sensed for record in trace]


def stationary_rate(channels: Sequence[ChannelModel]) -> float:
    """全チャネルを常に観測したときの報酬率 Σ ω_o·B"""
    return sum(stationary_belief(ch) * ch.bandwidth for ch in channels)

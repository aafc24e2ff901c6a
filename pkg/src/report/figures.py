"""
組み込みプリセットから図のプロットデータ（表）を作る

設計意図:
- 描画はせず、列名つきの表だけを返す
- プリセット名から表作成関数を引く FIGURES テーブルで CLI と切り離す
- シミュレーションはすべて同じシードから始め、方策間で共通乱数になるようにする
"""
import logging
from typing import Callable

import numpy as np

from src.core.criteria import Average, Discounted
from src.core.errors import ConfigError
from src.core.relaxation_bound import (
    BoundRequest,
    relaxed_objective,
    upper_bound_average,
    upper_bound_discounted,
)
from src.core.run_config import ExperimentOptions, RunConfig
from src.report.writer import Table
from src.sim.harness import SimConfig, cumulative_rewards, discounted_horizon, simulate
from src.sim.identical_bounds import identical_channel_bounds

logger = logging.getLogger(__name__)

DEFAULT_AVERAGE_HORIZON = 1000


def resolve_horizon(config: RunConfig, options: ExperimentOptions, K: int | None = None) -> int:
    """指定がなければ割引基準は打ち切り誤差から、平均基準は固定長で決める"""
    if config.horizon is not None:
        return int(config.horizon)
    if isinstance(config.criterion, Discounted):
        max_bandwidth = max(ch.bandwidth for ch in config.channels)
        return discounted_horizon(config.criterion.beta, K or config.K, max_bandwidth,
                                  options.truncation_tolerance)
    return DEFAULT_AVERAGE_HORIZON


def sim_config(config: RunConfig, options: ExperimentOptions, policy: str, **overrides) -> SimConfig:
    fields = dict(
        channels=config.channels,
        K=config.K,
        policy=policy,
        criterion=config.criterion,
        horizon=resolve_horizon(config, options, overrides.get("K")),
        replications=options.replications,
        seed=options.seed,
        initial_beliefs=config.initial_beliefs,
        burn_in_fraction=options.burn_in_fraction,
        workers=options.workers,
    )
    fields.update(overrides)
    return SimConfig(**fields)


def bound_value(config: RunConfig, options: ExperimentOptions, K: int | None = None) -> float:
    K = K or config.K
    if isinstance(config.criterion, Average):
        return upper_bound_average(config.channels, K, options.epsilon).value
    request = BoundRequest(config.channels, K, config.criterion, config.initial_beliefs, options.epsilon)
    return upper_bound_discounted(request).value


def _provenance(config: RunConfig, options: ExperimentOptions, **extra) -> dict:
    return {"preset": config.preset, "seed": options.seed, "command": "figure", **extra}


def fig2_table(config: RunConfig, options: ExperimentOptions) -> Table:
    """方策ごと・ホライズンごとの平均報酬率と、緩和問題の上界"""
    horizons = config.extras.get("horizons") or [resolve_horizon(config, options)]
    bound = bound_value(config, options)
    table = Table(("policy", "horizon", "mean", "se"),
                  provenance=_provenance(config, options, bound=bound))
    for policy in config.policies:
        for horizon in horizons:
            result = simulate(sim_config(config, options, policy, horizon=int(horizon)))
            table.add(policy, int(horizon), result.mean, result.std_error)
    for horizon in horizons:
        table.add("bound", int(horizon), bound, 0.0)
    return table


def fig8_table(config: RunConfig, options: ExperimentOptions) -> Table:
    """G(m) を m グリッド上で評価した表。来歴に上界アルゴリズムの結果を添える。"""
    if not isinstance(config.criterion, Discounted):
        raise ConfigError("fig8 は割引基準のプリセットが必要です")
    request = BoundRequest(config.channels, config.K, config.criterion, config.initial_beliefs, options.epsilon)
    result = upper_bound_discounted(request)
    points = int(config.extras.get("m_grid", options.grid))
    table = Table(("m", "G"), provenance=_provenance(
        config, options, m_star=result.m_star, value=result.value, exact=result.exact))
    for m in np.linspace(0.0, request.max_bandwidth, points):
        table.add(float(m), relaxed_objective(request, float(m)))
    return table


def fig9_table(config: RunConfig, options: ExperimentOptions) -> Table:
    """K を変えたときの Whittle 方策の割引報酬と上界"""
    table = Table(("K", "policy", "mean", "se", "truncation_bound", "bound"),
                  provenance=_provenance(config, options))
    for K in config.extras.get("K_values", [config.K]):
        K = int(K)
        bound = bound_value(config, options, K)
        for policy in config.policies:
            result = simulate(sim_config(config, options, policy, K=K))
            table.add(K, policy, result.mean, result.std_error, result.truncation_bound, bound)
    return table


def fig11_table(config: RunConfig, options: ExperimentOptions) -> Table:
    """同一チャネル (正相関・負相関) の上下界と近似率の下界"""
    positive = config.channels[0]
    negative = config.extras.get("negative_channel")
    if negative is None:
        raise ConfigError("fig11 には negative_channel が必要です")
    N = len(config.channels)
    table = Table(("K", "correlation", "lower", "upper", "eta_lower"),
                  provenance=_provenance(config, options, N=N))
    for K in config.extras.get("K_values", range(1, N + 1)):
        for label, channel in (("positive", positive), ("negative", negative)):
            bounds = identical_channel_bounds(channel, N, int(K), Average())
            table.add(int(K), label, bounds.lower, bounds.upper, bounds.eta_lower)
    return table


def fig12_table(config: RunConfig, options: ExperimentOptions) -> Table:
    """遷移確率が途中で変わる場合と変わらない場合の、スロットごとの累積報酬（平均）"""
    switch_channel = config.extras.get("switch_channel")
    switch_slot = config.extras.get("switch_slot")
    if switch_channel is None or switch_slot is None:
        raise ConfigError("fig12 には switch_channel と switch_slot が必要です")
    policy = config.policies[0]
    switched = simulate(sim_config(
        config, options, policy, record_trace=True, switch_slot=int(switch_slot),
        switch_channels=(switch_channel,) * len(config.channels)))
    unchanged = simulate(sim_config(config, options, policy, record_trace=True))

    def mean_curve(result) -> np.ndarray:
        return np.mean([cumulative_rewards(trace) for trace in result.traces], axis=0)

    table = Table(("slot", "cumulative_switched", "cumulative_unchanged"),
                  provenance=_provenance(config, options, switch_slot=int(switch_slot)))
    for slot, (a, b) in enumerate(zip(mean_curve(switched), mean_curve(unchanged)), start=1):
        table.add(slot, float(a), float(b))
    return table


FIGURES: dict[str, Callable[[RunConfig, ExperimentOptions], Table]] = {
    "fig2": fig2_table,
    "fig8": fig8_table,
    "fig9": fig9_table,
    "fig11": fig11_table,
    "fig12": fig12_table,
}


def figure_table(config: RunConfig, options: ExperimentOptions) -> Table:
    builder = FIGURES.get(config.preset or "")
    if builder is None:
        raise ConfigError(f"figure コマンドはプリセット ({', '.join(FIGURES)}) を指定してください")
    logger.info("building figure data for %s", config.preset)
    return builder(config, options)

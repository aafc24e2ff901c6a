"""
実験コントローラー

設計意図:
- 設定ファイル (whittle_config.yml) の読み込みとログ設定を一か所にまとめる
- サブコマンドごとの処理を run_<command> メソッドに分け、CLI はディスパッチだけを行う
- 計算結果は表 (Table) か1件のレコードとして返し、書き出しは writer に任せる
"""
import logging

import numpy as np

from src.core.channel_model import ChannelModel
from src.core.criteria import Average, Discounted
from src.core.errors import ConfigError, NumericalGuardError
from src.core.oracle import oracle_index
from src.core.relaxation_bound import (
    BoundRequest,
    upper_bound_average,
    upper_bound_bisection,
    upper_bound_discounted,
)
from src.core.run_config import ExperimentOptions, RunConfig, load_preset, load_settings, preset_names
from src.core.whittle_index import index_value, verify_indexability
from src.report.figures import figure_table, resolve_horizon, sim_config
from src.report.writer import Table
from src.sim.harness import simulate

logger = logging.getLogger(__name__)

# 平均基準の設定を verify するときに使う割引率
VERIFY_BETAS = (0.5, 0.9)
BOUND_METHODS = ("breakpoints", "bisection")


def setup_logging(settings: dict, level: str | None = None) -> None:
    """設定ファイルの logging.level / logging.format でルートロガーを設定する"""
    logging_conf = settings.get("logging", {})
    name = (level or logging_conf.get("level", "INFO")).upper()
    numeric = getattr(logging, name, None)
    if not isinstance(numeric, int):
        raise ConfigError(f"未知のログレベルです: {name}")
    logging.basicConfig(
        level=numeric,
        format=logging_conf.get("format", "%(asctime)s %(levelname)s %(name)s: %(message)s"),
        force=True,
    )


class ExperimentController:
    """
    サブコマンドの実処理を担当するクラス。

    Attributes:
        settings: 設定ファイルの内容
        options: 設定ファイルの既定値から作った実行オプション
    """

    def __init__(self, settings: dict | None = None):
        self.settings = load_settings() if settings is None else settings
        self.options = ExperimentOptions.from_settings(self.settings)

    def _provenance(self, config: RunConfig, options: ExperimentOptions, command: str) -> dict:
        return {"preset": config.preset, "seed": options.seed, "command": command}

    def run_index(self, config: RunConfig, options: ExperimentOptions) -> Table:
        """チャネルごとに ω グリッド上のインデックス W(ω) を並べる"""
        table = Table(("channel_id", "omega", "W"), provenance=self._provenance(config, options, "index"))
        for channel_id, ch in enumerate(config.channels, start=1):
            for omega in np.linspace(0.0, 1.0, options.grid):
                table.add(channel_id, float(omega), index_value(ch, float(omega), config.criterion))
        return table

    def run_bound(self, config: RunConfig, options: ExperimentOptions, method: str = "breakpoints") -> dict:
        """緩和問題の上界 {m_star, value, exact, ...}"""
        if isinstance(config.criterion, Average):
            result = upper_bound_average(config.channels, config.K, options.epsilon)
        else:
            request = BoundRequest(config.channels, config.K, config.criterion,
                                   config.initial_beliefs, options.epsilon)
            if method == "bisection":
                result = upper_bound_bisection(request, options.bisection_iterations)
            elif method == "breakpoints":
                result = upper_bound_discounted(request)
            else:
                raise ConfigError(f"未知の上界計算法です: {method} (選択肢: {', '.join(BOUND_METHODS)})")
        record = result.to_dict()
        record["epsilon"] = options.epsilon
        return record

    def run_simulate(self, config: RunConfig, options: ExperimentOptions) -> Table:
        """方策ごとのモンテカルロ評価"""
        table = Table(("policy", "horizon", "mean", "se", "truncation_bound"),
                      provenance=self._provenance(config, options, "simulate"))
        horizon = resolve_horizon(config, options)
        for policy in config.policies:
            result = simulate(sim_config(config, options, policy, horizon=horizon))
            table.add(policy, horizon, result.mean, result.std_error, result.truncation_bound)
        return table

    def _verify_channel(self, table: Table, label: str, channel_id: int, ch: ChannelModel,
                        beta: float, options: ExperimentOptions) -> bool:
        report = verify_indexability(ch, beta, options.m_grid_step)
        table.add(label, channel_id, beta, "indexability", report.max_violation, report.passed)

        worst = 0.0
        for omega in np.linspace(0.0, 1.0, options.omega_points):
            closed = index_value(ch, float(omega), Discounted(beta))
            reference = oracle_index(ch, float(omega), beta, options.oracle_tolerance)
            worst = max(worst, abs(closed - reference))
        passed = worst <= options.index_tolerance
        table.add(label, channel_id, beta, "oracle_index", worst, passed)
        return report.passed and passed

    def run_verify(self, configs: list[RunConfig], options: ExperimentOptions) -> tuple[Table, bool]:
        """
        インデックス可能性（m グリッド上の単調性）と、閉形式インデックスと価値反復オラクルの一致を検査する。
        """
        table = Table(("source", "channel_id", "beta", "check", "max_error", "passed"),
                      provenance={"preset": ",".join(c.preset or "config" for c in configs),
                                  "seed": options.seed, "command": "verify"})
        all_passed = True
        for config in configs:
            label = config.preset or "config"
            betas = (config.criterion.beta,) if isinstance(config.criterion, Discounted) else VERIFY_BETAS
            seen = set()
            for channel_id, ch in enumerate(config.channels, start=1):
                for beta in betas:
                    # 同一チャネルのプリセットは1本分だけ検査する
                    if (ch, beta) in seen:
                        continue
                    seen.add((ch, beta))
                    all_passed &= self._verify_channel(table, label, channel_id, ch, beta, options)
        logger.info("verify finished: %s", "passed" if all_passed else "FAILED")
        return table, all_passed

    def run_figure(self, config: RunConfig, options: ExperimentOptions) -> Table:
        return figure_table(config, options)

    def all_presets(self) -> list[RunConfig]:
        return [load_preset(name) for name in preset_names()]


def require_passed(passed: bool) -> None:
    if not passed:
        raise NumericalGuardError("verify で検査に失敗した項目があります")

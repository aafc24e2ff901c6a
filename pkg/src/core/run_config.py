"""
実行設定（JSON）と組み込みプリセット（YAML）の読み込み

設計意図:
- JSON 実行設定は JSON Schema で検証してから値オブジェクトに変換する（未知のキーは拒否）
- 検証エラーはすべて ConfigError にまとめ、CLI で終了コード 2 になるようにする
- プリセットは resources/config/presets.yml から読み、同じ RunConfig に変換する
"""
import json
import logging
from dataclasses import dataclass, field, replace
from typing import Any

import yaml
from jsonschema import Draft202012Validator

from src.core.channel_model import ChannelModel
from src.core.criteria import Average, Criterion, Discounted
from src.core.errors import ConfigError
from src.paths import get_resource_path

logger = logging.getLogger(__name__)

PRESETS_FILE = "config/presets.yml"
SETTINGS_FILE = "config/whittle_config.yml"
POLICY_NAMES = ("whittle", "myopic", "queue", "optimal-oracle", "random")

_CHANNEL_SCHEMA = {
    "type": "object",
    "properties": {
        "p01": {"type": "number"},
        "p11": {"type": "number"},
        "bandwidth": {"type": "number"},
    },
    "required": ["p01", "p11"],
    "additionalProperties": False,
}

_CRITERION_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"type": {"const": "discounted"}, "beta": {"type": "number"}},
            "required": ["type", "beta"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"type": {"const": "average"}},
            "required": ["type"],
            "additionalProperties": False,
        },
    ]
}

RUN_CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "channels": {"type": "array", "items": _CHANNEL_SCHEMA, "minItems": 1},
        "K": {"type": "integer", "minimum": 1},
        "criterion": _CRITERION_SCHEMA,
        "initial_beliefs": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}},
        "horizon": {"type": "integer", "minimum": 1},
        "replications": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 18446744073709551615},
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "policies": {"type": "array", "items": {"enum": list(POLICY_NAMES)}, "minItems": 1},
        "output": {"type": "string"},
        "format": {"enum": ["csv", "json"]},
    },
    "required": ["channels", "K", "criterion"],
    "additionalProperties": False,
}

_VALIDATOR = Draft202012Validator(RUN_CONFIG_SCHEMA)


@dataclass(frozen=True)
class RunConfig:
    """
    検証済みの実行設定。

    Attributes:
        channels: チャネル列
        K: 1スロットの観測本数
        criterion: 報酬基準
        initial_beliefs: 初期信念（None なら定常確率）
        horizon: シミュレーションのスロット数（None なら基準に応じて決める）
        replications / seed / epsilon: 省略時は None（設定ファイルの既定値を使う）
        policies: 比較する方策名
        output: 出力先パス（None なら標準出力）
        format: "csv" / "json"
        preset: プリセット名（JSON 由来なら None）
        extras: プリセット固有の追加項目
    """
    channels: tuple[ChannelModel, ...]
    K: int
    criterion: Criterion
    initial_beliefs: tuple[float, ...] | None = None
    horizon: int | None = None
    replications: int | None = None
    seed: int | None = None
    epsilon: float | None = None
    policies: tuple[str, ...] = ("whittle", "myopic")
    output: str | None = None
    format: str | None = None
    preset: str | None = None
    extras: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not (1 <= self.K <= len(self.channels)):
            raise ConfigError(f"K は 1 <= K <= N で指定してください (K={self.K}, N={len(self.channels)})")
        if self.initial_beliefs is not None and len(self.initial_beliefs) != len(self.channels):
            raise ConfigError("initial_beliefs の長さがチャネル数と一致しません")

    def with_overrides(self, **overrides) -> "RunConfig":
        """None でない値だけ差し替えた RunConfig を返す"""
        changes = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **changes) if changes else self


def parse_criterion(document: dict) -> Criterion:
    if document.get("type") == "discounted":
        return Discounted(float(document["beta"]))
    if document.get("type") == "average":
        return Average()
    raise ConfigError(f"criterion の type が不正です: {document}")


def parse_channel(document: dict) -> ChannelModel:
    """
    チャネル定義を ChannelModel に変換する。
    吸収状態や帯域幅の範囲外は NumericalGuardError のまま伝える。
    """
    try:
        return ChannelModel(
            float(document["p01"]),
            float(document["p11"]),
            float(document.get("bandwidth", 1.0)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"チャネル定義が不正です: {document} ({e})") from e


def validate_document(document: Any) -> None:
    errors = sorted(_VALIDATOR.iter_errors(document), key=lambda e: list(e.path))
    if errors:
        details = "; ".join(
            f"{'/'.join(str(p) for p in error.path) or '<root>'}: {error.message}" for error in errors
        )
        raise ConfigError(f"実行設定がスキーマに違反しています: {details}")


def run_config_from_dict(document: Any) -> RunConfig:
    validate_document(document)
    return RunConfig(
        channels=tuple(parse_channel(ch) for ch in document["channels"]),
        K=document["K"],
        criterion=parse_criterion(document["criterion"]),
        initial_beliefs=tuple(document["initial_beliefs"]) if "initial_beliefs" in document else None,
        horizon=document.get("horizon"),
        replications=document.get("replications"),
        seed=document.get("seed"),
        epsilon=document.get("epsilon"),
        policies=tuple(document.get("policies", ("whittle", "myopic"))),
        output=document.get("output"),
        format=document.get("format"),
    )


def load_run_config(path: str) -> RunConfig:
    """JSON ファイルを読み込み、スキーマ検証して RunConfig を返す"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except OSError as e:
        raise ConfigError(f"設定ファイルを開けません: {path} ({e})") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"設定ファイルが JSON として読めません: {path} ({e})") from e
    config = run_config_from_dict(document)
    logger.info("loaded run config %s: N=%d K=%d", path, len(config.channels), config.K)
    return config


def _load_yaml(relative_path: str) -> dict:
    path = get_resource_path(relative_path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return yaml.safe_load(f) or {}
    except OSError as e:
        raise ConfigError(f"設定ファイルの読み込みに失敗しました: {path} ({e})") from e


def load_settings() -> dict:
    """既定値の設定ファイル (whittle_config.yml)"""
    return _load_yaml(SETTINGS_FILE)


def load_presets() -> dict:
    return _load_yaml(PRESETS_FILE)


def preset_names() -> tuple[str, ...]:
    return tuple(load_presets())


def _expand_channels(entry: dict) -> tuple[ChannelModel, ...]:
    channels = tuple(parse_channel(ch) for ch in entry["channels"])
    # 同一チャネルのプリセットは1本だけ書き、N 本に複製する
    if "N" in entry and len(channels) == 1:
        channels = channels * int(entry["N"])
    return channels


def load_preset(name: str) -> RunConfig:
    """組み込みプリセットを RunConfig に変換する"""
    presets = load_presets()
    entry = presets.get(name)
    if entry is None:
        raise ConfigError(f"未知のプリセットです: {name} (選択肢: {', '.join(presets)})")

    known = {"channels", "K", "criterion", "replications", "policies", "horizon", "N"}
    extras = {key: value for key, value in entry.items() if key not in known}
    if "switch_channel" in extras:
        extras["switch_channel"] = parse_channel(extras["switch_channel"])
    if "negative_channel" in extras:
        extras["negative_channel"] = parse_channel(extras["negative_channel"])

    return RunConfig(
        channels=_expand_channels(entry),
        K=int(entry["K"]),
        criterion=parse_criterion(entry["criterion"]),
        horizon=entry.get("horizon"),
        replications=entry.get("replications"),
        policies=tuple(entry.get("policies", ("whittle", "myopic"))),
        preset=name,
        extras=extras,
    )


@dataclass(frozen=True)
class ExperimentOptions:
    """設定ファイルの既定値にコマンドライン引数を重ねた実行オプション"""
    replications: int = 1000
    seed: int = 0
    workers: int = 1
    epsilon: float = 1e-3
    bisection_iterations: int = 60
    truncation_tolerance: float = 1e-4
    burn_in_fraction: float = 0.1
    grid: int = 101
    m_grid_step: float = 1e-2
    omega_points: int = 11
    oracle_tolerance: float = 1e-9
    index_tolerance: float = 1e-4
    format: str = "csv"

    @classmethod
    def from_settings(cls, settings: dict) -> "ExperimentOptions":
        simulation = settings.get("simulation", {})
        bound = settings.get("bound", {})
        verify = settings.get("verify", {})
        defaults = cls()
        try:
            return cls(
                replications=int(simulation.get("replications", defaults.replications)),
                seed=int(simulation.get("seed", defaults.seed)),
                workers=int(simulation.get("workers", defaults.workers)),
                epsilon=float(bound.get("epsilon", defaults.epsilon)),
                bisection_iterations=int(bound.get("bisection_iterations", defaults.bisection_iterations)),
                truncation_tolerance=float(simulation.get("truncation_tolerance", defaults.truncation_tolerance)),
                burn_in_fraction=float(simulation.get("burn_in_fraction", defaults.burn_in_fraction)),
                grid=int(settings.get("index", {}).get("grid", defaults.grid)),
                m_grid_step=float(verify.get("m_grid_step", defaults.m_grid_step)),
                omega_points=int(verify.get("omega_points", defaults.omega_points)),
                oracle_tolerance=float(verify.get("oracle_tolerance", defaults.oracle_tolerance)),
                index_tolerance=float(verify.get("index_tolerance", defaults.index_tolerance)),
                format=str(settings.get("output", {}).get("format", defaults.format)),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"設定ファイルの値が不正です: {e}") from e

    def merged(self, config: RunConfig | None = None, **overrides) -> "ExperimentOptions":
        """
        優先順位: コマンドライン引数 > 実行設定 (JSON / プリセット) > 設定ファイル
        """
        changes = {}
        if config is not None:
            for key in ("replications", "seed", "epsilon", "format"):
                value = getattr(config, key)
                if value is not None:
                    changes[key] = value
        changes.update({key: value for key, value in overrides.items() if value is not None})
        if "grid" in changes and changes["grid"] < 2:
            raise ConfigError(f"grid は 2 以上で指定してください: {changes['grid']}")
        if "epsilon" in changes and not changes["epsilon"] > 0.0:
            raise ConfigError(f"epsilon は正の値で指定してください: {changes['epsilon']}")
        return replace(self, **changes)

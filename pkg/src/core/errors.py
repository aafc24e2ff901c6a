"""
例外定義モジュール

設計意図:
- ライブラリ層はすべてこのモジュールの例外を送出する
- CLI は exit_code 属性だけを見て終了コードを決める
"""


class WhittleAccessError(Exception):
    """本パッケージの基底例外"""
    exit_code = 1


class ConfigError(WhittleAccessError):
    """実行設定（JSON / プリセット）がスキーマに違反している"""
    exit_code = 2


class NotIdenticalError(WhittleAccessError):
    """キュー方策に確率的に同一でないチャネル群が渡された"""
    exit_code = 2


class NumericalGuardError(WhittleAccessError):
    """数値的な前提条件の違反"""
    exit_code = 3


class AbsorbingChainError(NumericalGuardError):
    """p01 または p11 が 0 か 1 で、マルコフ連鎖が吸収状態を持つ"""


class BadBandwidthError(NumericalGuardError):
    """帯域幅 B が (0, 1] の範囲外"""


class InconsistentThresholdError(NumericalGuardError):
    """しきい値が補助金問題のパラメータと整合しない"""


class ObservationMismatchError(NumericalGuardError):
    """観測のキー集合が選択チャネル集合と一致しない"""


class TooLargeError(WhittleAccessError):
    """全探索オラクルの規模制限を超えた"""
    exit_code = 4

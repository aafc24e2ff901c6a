"""
チャネルパラメータ妥当性チェックモジュール

Gilbert-Elliot チャネルの遷移確率と帯域幅が解析の前提を満たすかを判定します。
"""
import math


def check_transition_probabilities(p01: float, p11: float) -> tuple[bool, str]:
    """
    遷移確率 (p01, p11) をチェックします。

    Args:
        p01 (float): 悪→良 の遷移確率
        p11 (float): 良→良 の遷移確率

    Returns:
        tuple[bool, str]: (判定結果, NG理由)
            - 判定結果: 使用可能なら True
            - NG理由: 使用できない場合のメッセージ。使用可能な場合は空文字列。
    """
    for name, value in (("p01", p01), ("p11", p11)):
        # 前提チェック: 有限の実数であること
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            return False, f"{name} は有限の実数で指定してください"

        # 0 または 1 は吸収状態を生み、値関数の有界性が崩れる
        if not (0.0 < value < 1.0):
            return False, f"{name}={value} は吸収状態を持つため使用できません (0 < {name} < 1)"

    return True, ""


def check_bandwidth(bandwidth: float) -> tuple[bool, str]:
    """
    帯域幅 B をチェックします。最大帯域幅を 1 に正規化しているため (0, 1] のみ許可。

    Returns:
        tuple[bool, str]: (判定結果, NG理由)
    """
    if not isinstance(bandwidth, (int, float)) or isinstance(bandwidth, bool) or not math.isfinite(bandwidth):
        return False, "bandwidth は有限の実数で指定してください"

    if not (0.0 < bandwidth <= 1.0):
        return False, f"bandwidth={bandwidth} は範囲外です (0 < B <= 1)"

    return True, ""

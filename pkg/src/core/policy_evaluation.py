"""
しきい値方策の評価（単位帯域幅）

設計意図:
- しきい値 cut を固定すると、価値関数は補助金 m について線形 V = B·R + m·D になる
- R（報酬部分）と D（割引受動時間）をアンカー信念 p01 / p11 上の 2x2 連立方程式として同時に解く
- 交差時間が有限か無限かで分岐が自動的に選ばれるため、場合ごとの公式を個別に持たない
"""
from dataclasses import dataclass

import numpy as np

from src.core.channel_model import (
    INFINITE,
    ChannelModel,
    CrossingTime,
    crossing_time,
    k_step_update,
)


@dataclass(frozen=True)
class AnchorSolution:
    """
    アンカー信念での (R, D)。V(x) = B·reward_x + m·passive_x。

    region はアンカーごとの挙動（active / crossing / passive）を表すラベル。
    """
    reward_p01: float
    reward_p11: float
    passive_p01: float
    passive_p11: float
    region: str


def geometric_sum(beta: float, steps: int) -> float:
    """1 + β + ... + β^(steps−1)"""
    if steps == 0:
        return 0.0
    if beta == 0.0:
        return 1.0
    return (1.0 - beta ** steps) / (1.0 - beta)


def _label(steps: CrossingTime) -> str:
    if steps is INFINITE:
        return "passive"
    if steps == 0:
        return "active"
    return "crossing"


def anchor_solution(ch: ChannelModel, beta: float, cut: float) -> AnchorSolution:
    """
    受動集合 {ω <= cut} の方策について、アンカー p01 / p11 の (R, D) を解く。

    アンカー x ごとに交差時間 L = crossing_time(x, cut) で3通りに分かれる。
        active   (L = 0): x > cut。すぐ観測する。
            R(x) = x + β·(x·R(p11) + (1−x)·R(p01)),  D(x) = β·(x·D(p11) + (1−x)·D(p01))
        crossing (0 < L < ∞): L スロット受動の後、y = T^L(x) で観測する。
            R(x) = β^L·y + β^(L+1)·(y·R(p11) + (1−y)·R(p01))
            D(x) = (1 + β + ... + β^(L−1)) + β^(L+1)·(y·D(p11) + (1−y)·D(p01))
        passive  (L = ∞): 二度と観測しない。R(x) = 0, D(x) = 1/(1−β)

    しきい値の位置とアンカーの組み合わせは次のとおり。
        正相関: cut < p01 は両方 active、p01 <= cut < ω_o は p01 が crossing、
                ω_o <= cut < p11 は p01 が passive、p11 <= cut は両方 passive
        負相関: cut < p11 は両方 active、p11 <= cut < T(p11) は p11 が L = 1 の crossing、
                T(p11) <= cut < p01 は p11 が passive、p01 <= cut は両方 passive
    どの組み合わせも同じ 2x2 連立方程式で解けるので、場合ごとの公式は持たない。
    """
    anchors = (ch.p01, ch.p11)
    matrix = np.eye(2)
    rhs = np.zeros((2, 2))
    labels = []

    for row, anchor in enumerate(anchors):
        steps = crossing_time(ch, anchor, cut)
        labels.append(_label(steps))
        if steps is INFINITE:
            rhs[row] = (0.0, 1.0 / (1.0 - beta))
            continue
        landing = k_step_update(ch, anchor, steps)
        weight = beta ** (steps + 1)
        matrix[row, 0] -= weight * (1.0 - landing)
        matrix[row, 1] -= weight * landing
        rhs[row] = (beta ** steps * landing, geometric_sum(beta, steps))

    solution = np.linalg.solve(matrix, rhs)
    return AnchorSolution(
        reward_p01=float(solution[0, 0]),
        reward_p11=float(solution[1, 0]),
        passive_p01=float(solution[0, 1]),
        passive_p11=float(solution[1, 1]),
        region=f"p01:{labels[0]}/p11:{labels[1]}",
    )


def active_terms(beta: float, sol: AnchorSolution, omega: float) -> tuple[float, float]:
    """ω で能動を選んだときの (R, D)"""
    reward = omega + beta * (omega * sol.reward_p11 + (1.0 - omega) * sol.reward_p01)
    passive = beta * (omega * sol.passive_p11 + (1.0 - omega) * sol.passive_p01)
    return reward, passive


def evaluate_at(
    ch: ChannelModel,
    beta: float,
    cut: float,
    sol: AnchorSolution,
    omega: float
) -> tuple[float, float]:
    """
    任意の信念 ω での (R, D)。
    ω が cut を超えるまで L スロット受動、その後 T^L(ω) で能動。
    """
    steps = crossing_time(ch, omega, cut)
    if steps is INFINITE:
        return 0.0, 1.0 / (1.0 - beta)
    landing = k_step_update(ch, omega, steps)
    reward, passive = active_terms(beta, sol, landing)
    discount = beta ** steps
    return discount * reward, geometric_sum(beta, steps) + discount * passive

"""
価値反復オラクル

設計意図:
- 閉形式とは独立に Bellman 方程式を解き、テストと verify コマンドの正解値を作る
- 信念空間を離散化せず、{ω, p01, p11} から受動で到達する信念列だけを状態にする
- 打ち切った末尾の状態は最も近い到達可能状態へ写す
"""
import logging
import math

import numpy as np
from scipy.optimize import brentq

from src.core.channel_model import ChannelModel, k_step_update, one_step_update
from src.core.criteria import Discounted
from src.core.subsidy_bandit import SubsidyProblem

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-9
MAX_SWEEPS = 1_000_000


def _chain_length(beta: float, tol: float) -> int:
    """β^K / (1−β) < tol となる最小の K"""
    if beta == 0.0:
        return 1
    bound = math.log(tol * (1.0 - beta)) / math.log(beta)
    return max(int(math.ceil(bound)) + 1, 1)


def _reachable_states(ch: ChannelModel, omega: float, length: int) -> tuple[np.ndarray, np.ndarray]:
    """
    3本の受動連鎖 (ω, p01, p11 始点) の信念と、受動遷移先のインデックスを返す。

    Returns:
        (beliefs, successor): どちらも長さ 3*(length+1) の1次元配列
    """
    starts = (omega, ch.p01, ch.p11)
    width = length + 1
    beliefs = np.array([k_step_update(ch, start, k) for start in starts for k in range(width)])

    successor = np.arange(len(beliefs)) + 1
    for chain in range(len(starts)):
        tail = chain * width + length
        target = one_step_update(ch, beliefs[tail])
        successor[tail] = int(np.argmin(np.abs(beliefs - target)))
    return beliefs, successor


def _solve(p: SubsidyProblem, omega: float, tol: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    if not isinstance(p.criterion, Discounted):
        raise TypeError("the value-iteration oracle covers the discounted criterion only")
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")

    ch = p.channel
    beta = p.criterion.beta
    length = _chain_length(beta, tol)
    beliefs, successor = _reachable_states(ch, omega, length)
    index_p01 = length + 1
    index_p11 = 2 * (length + 1)

    values = np.zeros_like(beliefs)
    for sweep in range(MAX_SWEEPS):
        active = ch.bandwidth * beliefs + beta * (
            beliefs * values[index_p11] + (1.0 - beliefs) * values[index_p01]
        )
        passive = p.m + beta * values[successor]
        updated = np.maximum(active, passive)
        change = float(np.max(np.abs(updated - values)))
        values = updated
        # 縮小写像の誤差評価 ||V − V*|| <= β/(1−β)·change
        if beta == 0.0 or change * beta / (1.0 - beta) < tol:
            break
    logger.debug("oracle converged after %d sweeps over %d states", sweep + 1, len(beliefs))
    return beliefs, successor, values, index_p01


def oracle_value_iteration(p: SubsidyProblem, omega: float, tol: float = DEFAULT_TOLERANCE) -> float:
    """V_{β,m}(ω) を価値反復で求める（誤差 tol 以内）"""
    _, _, values, _ = _solve(p, omega, tol)
    return float(values[0])


def oracle_action_values(p: SubsidyProblem, omega: float, tol: float = DEFAULT_TOLERANCE) -> tuple[float, float]:
    """価値反復の結果から (V(ω; u=0), V(ω; u=1)) を返す"""
    _, successor, values, index_p01 = _solve(p, omega, tol)
    ch = p.channel
    beta = p.criterion.beta
    index_p11 = 2 * index_p01
    passive = p.m + beta * values[successor[0]]
    active = ch.bandwidth * omega + beta * (omega * values[index_p11] + (1.0 - omega) * values[index_p01])
    return float(passive), float(active)


def oracle_index(ch: ChannelModel, omega: float, beta: float, tol: float = DEFAULT_TOLERANCE) -> float:
    """
    能動と受動が等価になる補助金 m を、価値反復オラクル上の求根で求める。
    """
    criterion = Discounted(beta)

    def advantage(m: float) -> float:
        passive, active = oracle_action_values(SubsidyProblem(ch, m, criterion), omega, tol)
        return active - passive

    if advantage(0.0) <= 0.0:
        return 0.0
    if advantage(ch.bandwidth) >= 0.0:
        return ch.bandwidth
    return float(brentq(advantage, 0.0, ch.bandwidth, xtol=1e-12))

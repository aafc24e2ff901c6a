"""
Whittle インデックス

設計意図:
- 割引基準・平均基準ともに閉形式で評価する（反復なし）
- 割引基準の中間領域は、しきい値を ω に固定した方策評価が m について線形であることを使い、
  能動と受動が等価になる m を一次方程式として直接解く
- しきい値 ω*(m) はインデックスの単調性を使った二分法で逆算する
"""
import functools
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from src.core.channel_model import (
    INFINITE,
    ChannelModel,
    k_step_update,
    crossing_time,
    one_step_update,
    stationary_belief,
)
from src.core.criteria import Average, Criterion, Discounted, ThresholdResult
from src.core.policy_evaluation import active_terms, anchor_solution, evaluate_at

logger = logging.getLogger(__name__)

THRESHOLD_TOLERANCE = 1e-10
OMEGA_BAR_ITERATIONS = 64
INDEXABILITY_TOLERANCE = 1e-9
MAX_CHAIN_LENGTH = 100_000


@dataclass(frozen=True)
class IndexQuery:
    channel: ChannelModel
    omega: float
    criterion: Criterion


@dataclass(frozen=True)
class BreakpointSet:
    """
    1チャネル分の補助金ブレークポイント。

    Attributes:
        points: W(c) の昇順列
        beliefs: points に対応する信念 c
        gray_area: 正相関チャネルで無限個のブレークポイントが集積する区間 (low, high)
    """
    points: tuple[float, ...]
    beliefs: tuple[float, ...]
    gray_area: tuple[float, float] | None = None
    gray_beliefs: tuple[float, float] | None = None


@dataclass(frozen=True)
class IndexabilityReport:
    channel: ChannelModel
    beta: float
    m_grid_step: float
    grid_points: int
    max_violation: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= INDEXABILITY_TOLERANCE


def sup_bisect(
    predicate: Callable[[float], bool],
    lo: float,
    hi: float,
    tolerance: float = 0.0,
    max_iterations: int = 200
) -> tuple[float, float]:
    """
    predicate(lo) が真・predicate(hi) が偽である区間を縮め、境界を挟む (lo, hi) を返す。
    predicate は単調（ある点まで真、以降偽）であること。
    """
    for _ in range(max_iterations):
        if hi - lo <= tolerance:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi


def unit_index_discounted(ch: ChannelModel, omega: float, beta: float) -> float:
    """帯域幅 1 に正規化した割引基準インデックス W_β(ω)"""
    low, high = min(ch.p01, ch.p11), max(ch.p01, ch.p11)
    if beta == 0.0 or omega <= low or omega >= high:
        return omega

    omega_o = stationary_belief(ch)
    if ch.is_positive and omega >= omega_o:
        return omega / (1.0 - beta * ch.p11 + beta * omega)
    if not ch.is_positive and omega >= one_step_update(ch, ch.p11):
        return (beta * ch.p01 + omega * (1.0 - beta)) / (1.0 + beta * (ch.p01 - omega))

    # 中間領域: しきい値 ω の方策で V(ω;u=1) = V(ω;u=0) を m について解く
    sol = anchor_solution(ch, beta, omega)
    reward_active, passive_active = active_terms(beta, sol, omega)
    reward_next, passive_next = evaluate_at(ch, beta, omega, sol, one_step_update(ch, omega))
    reward_passive = beta * reward_next
    passive_passive = 1.0 + beta * passive_next
    return (reward_active - reward_passive) / (passive_passive - passive_active)


def unit_index_average(ch: ChannelModel, omega: float) -> float:
    """帯域幅 1 に正規化した平均基準インデックス W(ω)"""
    low, high = min(ch.p01, ch.p11), max(ch.p01, ch.p11)
    if omega <= low or omega >= high:
        return omega

    omega_o = stationary_belief(ch)
    drift = omega - one_step_update(ch, omega)

    if ch.is_positive:
        steps = crossing_time(ch, ch.p01, omega) if omega < omega_o else INFINITE
        if steps is INFINITE:
            return omega / (1.0 - ch.p11 + omega)
        landing = k_step_update(ch, ch.p01, steps)
        return (drift * (steps + 1) + landing) / (1.0 - ch.p11 + drift * steps + landing)

    after_good = one_step_update(ch, ch.p11)
    if omega < omega_o:
        return (omega + ch.p01 - one_step_update(ch, omega)) / (
            1.0 + ch.p01 - after_good + one_step_update(ch, omega) - omega
        )
    if omega < after_good:
        # [ω_o, T(p11)) ではインデックスは一定
        return ch.p01 / (1.0 + ch.p01 - after_good)
    return ch.p01 / (1.0 + ch.p01 - omega)


def _unit_index(ch: ChannelModel, criterion: Criterion) -> Callable[[float], float]:
    if isinstance(criterion, Discounted):
        return lambda omega: unit_index_discounted(ch, omega, criterion.beta)
    return lambda omega: unit_index_average(ch, omega)


def index_discounted(q: IndexQuery) -> float:
    if not isinstance(q.criterion, Discounted):
        raise TypeError("index_discounted requires a Discounted criterion")
    return q.channel.bandwidth * unit_index_discounted(q.channel, q.omega, q.criterion.beta)


def index_average(q: IndexQuery) -> float:
    if not isinstance(q.criterion, Average):
        raise TypeError("index_average requires the Average criterion")
    return q.channel.bandwidth * unit_index_average(q.channel, q.omega)


@functools.lru_cache(maxsize=1 << 16)
def index_value(ch: ChannelModel, omega: float, criterion: Criterion) -> float:
    """基準に応じたインデックス（帯域幅込み）。同じ引数の再計算はキャッシュから返す。"""
    query = IndexQuery(ch, omega, criterion)
    if isinstance(criterion, Discounted):
        return index_discounted(query)
    return index_average(query)


def _snap_candidates(ch: ChannelModel) -> tuple[float, ...]:
    return (
        ch.p01,
        ch.p11,
        stationary_belief(ch),
        one_step_update(ch, ch.p01),
        one_step_update(ch, ch.p11),
    )


def invert_index(
    ch: ChannelModel,
    m: float,
    criterion: Criterion,
    tolerance: float = THRESHOLD_TOLERANCE
) -> ThresholdResult:
    """
    ω*(m) = sup{ω : W(ω) <= m} を二分法で求める。
    インデックスが m と等しい信念は受動側に含める。
    """
    if m < 0.0:
        return ThresholdResult.always_active()
    if m >= ch.bandwidth:
        return ThresholdResult.always_passive()

    target = m / ch.bandwidth
    unit = _unit_index(ch, criterion)

    def passive(omega: float) -> bool:
        return unit(omega) <= target

    lo, hi = sup_bisect(passive, 0.0, 1.0, tolerance=tolerance)

    # 構造的な境界点（p01, p11, ω_o, T(p01), T(p11)）に丁度乗る場合はその点に合わせる
    omega_star = lo
    for point in _snap_candidates(ch):
        if omega_star < point <= hi and passive(point):
            omega_star = point
    return ThresholdResult.interior(omega_star)


def search_omega_bar(ch: ChannelModel, beta: float, width: float) -> float:
    """
    W(ω_o) − W(ω̄) <= width を満たす ω̄ ∈ [ω_o − width, ω_o) を探す（単位帯域幅）。
    """
    omega_o = stationary_belief(ch)
    top = unit_index_discounted(ch, omega_o, beta)

    def close_enough(omega: float) -> bool:
        return top - unit_index_discounted(ch, omega, beta) <= width

    low = max(omega_o - width, 0.0)
    if close_enough(low):
        return low
    _, hi = sup_bisect(lambda omega: not close_enough(omega), low, omega_o,
                       max_iterations=OMEGA_BAR_ITERATIONS)
    return hi


def _chain_until(ch: ChannelModel, start: float, bound: float) -> list[float]:
    """start, T(start), ... を bound を超える最初の点まで列挙"""
    chain = [start]
    while chain[-1] <= bound:
        if len(chain) > MAX_CHAIN_LENGTH:
            raise RuntimeError(f"belief chain from {start} did not exceed {bound}")
        chain.append(k_step_update(ch, start, len(chain)))
    return chain


def index_breakpoints(
    ch: ChannelModel,
    beta: float,
    initial_omega: float,
    delta: float
) -> BreakpointSet:
    """
    割引受動時間 D(ω(1)) が m について区分定数になる区間の端点を列挙する。

    負相関は有限個。正相関は T^k(p01) が ω_o に集積するため、幅 delta 以下の
    グレー領域 [W(下端), W(ω_o)) を残して打ち切る。
    """
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")

    omega_o = stationary_belief(ch)
    beliefs = {ch.p01, ch.p11}
    gray_beliefs = None

    if not ch.is_positive:
        beliefs.update({one_step_update(ch, ch.p11), initial_omega})
        if initial_omega < omega_o:
            beliefs.add(one_step_update(ch, initial_omega))
    else:
        beliefs.add(omega_o)
        omega_bar = search_omega_bar(ch, beta, delta / ch.bandwidth)
        from_p01 = _chain_until(ch, ch.p01, omega_bar)
        beliefs.update(from_p01)
        gray_low = from_p01[-1]
        if initial_omega < omega_o:
            from_initial = _chain_until(ch, initial_omega, omega_bar)
            beliefs.update(from_initial)
            gray_low = min(gray_low, from_initial[-1])
        else:
            beliefs.add(initial_omega)
        if gray_low < omega_o:
            gray_beliefs = (gray_low, omega_o)

    ordered_beliefs = []
    points = []
    for belief in sorted(beliefs):
        value = ch.bandwidth * unit_index_discounted(ch, belief, beta)
        if points and value <= points[-1]:
            continue
        ordered_beliefs.append(belief)
        points.append(value)

    gray_area = None
    if gray_beliefs is not None:
        gray_area = tuple(ch.bandwidth * unit_index_discounted(ch, b, beta) for b in gray_beliefs)

    return BreakpointSet(
        points=tuple(points),
        beliefs=tuple(ordered_beliefs),
        gray_area=gray_area,
        gray_beliefs=gray_beliefs,
    )


def verify_indexability(ch: ChannelModel, beta: float, m_grid_step: float) -> IndexabilityReport:
    """m ↦ ω*_β(m) の単調性を m グリッド上で検査する"""
    if m_grid_step <= 0.0:
        raise ValueError(f"m_grid_step must be positive, got {m_grid_step}")

    criterion = Discounted(beta)
    grid = np.arange(-0.1, ch.bandwidth + 0.1 + 0.5 * m_grid_step, m_grid_step)
    cuts = np.array([invert_index(ch, float(m), criterion).cut for m in grid])
    running = np.maximum.accumulate(cuts)
    violation = float(np.max(running - cuts)) if len(cuts) else 0.0

    report = IndexabilityReport(
        channel=ch,
        beta=beta,
        m_grid_step=m_grid_step,
        grid_points=len(grid),
        max_violation=violation,
    )
    logger.debug("indexability p01=%.4f p11=%.4f beta=%.4f violation=%.3e",
                 ch.p01, ch.p11, beta, violation)
    return report

"""
補助金 m 付き単一アームバンディット

設計意図:
- しきい値 → アンカー値 → 任意信念の値、という順で閉形式を組み立てる
- 値関数は V = B·R + m·D の形で扱い、D は m についての右微分そのもの
- 平均基準は区分定数の受動時間割合 D_m と報酬率 J_m を閉形式で返す
"""
from dataclasses import dataclass

from src.core.channel_model import (
    INFINITE,
    ChannelModel,
    crossing_time,
    k_step_update,
    one_step_update,
    stationary_belief,
)
from src.core.criteria import (
    Average,
    Criterion,
    Discounted,
    ThresholdKind,
    ThresholdResult,
)
from src.core.errors import InconsistentThresholdError
from src.core.policy_evaluation import AnchorSolution, anchor_solution, evaluate_at
from src.core.whittle_index import THRESHOLD_TOLERANCE, invert_index, unit_index_average, unit_index_discounted

# しきい値とパラメータの整合チェックに使う許容誤差
CONSISTENCY_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SubsidyProblem:
    """
    (チャネル, 補助金 m, 報酬基準) の組。

    Attributes:
        channel: 対象チャネル
        m: 受動時に得られる補助金（符号・大きさに制限なし）
        criterion: Discounted(β) または Average()
    """
    channel: ChannelModel
    m: float
    criterion: Criterion

    @property
    def beta(self) -> float:
        if not isinstance(self.criterion, Discounted):
            raise TypeError("beta is only defined for the discounted criterion")
        return self.criterion.beta


@dataclass(frozen=True)
class AnchorValues:
    """アンカー信念 p01 / p11 での価値 V と割引受動時間 D"""
    v_p01: float
    v_p11: float
    d_p01: float
    d_p11: float
    region: str = ""


def _require_discounted(p: SubsidyProblem) -> float:
    if not isinstance(p.criterion, Discounted):
        raise TypeError("discounted operation called with a non-discounted problem")
    return p.criterion.beta


def threshold_discounted(p: SubsidyProblem, tolerance: float = THRESHOLD_TOLERANCE) -> ThresholdResult:
    """最適しきい値 ω*_β(m)。m < 0 で常に能動、m >= B で常に受動。"""
    _require_discounted(p)
    return invert_index(p.channel, p.m, p.criterion, tolerance)


def threshold_average(p: SubsidyProblem, tolerance: float = THRESHOLD_TOLERANCE) -> ThresholdResult:
    """平均基準のしきい値 ω*(m)。負相関の定数帯では T(p11) になる。"""
    if not isinstance(p.criterion, Average):
        raise TypeError("threshold_average requires the Average criterion")
    return invert_index(p.channel, p.m, p.criterion, tolerance)


def _check_consistency(p: SubsidyProblem, th: ThresholdResult, unit_index) -> None:
    ch = p.channel
    if th.kind is ThresholdKind.ALWAYS_ACTIVE and p.m >= 0.0:
        raise InconsistentThresholdError(f"常に能動のしきい値は m < 0 でのみ有効です (m={p.m})")
    if th.kind is ThresholdKind.ALWAYS_PASSIVE and p.m < ch.bandwidth:
        raise InconsistentThresholdError(f"常に受動のしきい値は m >= B でのみ有効です (m={p.m})")
    if th.kind is ThresholdKind.INTERIOR:
        if not (0.0 <= p.m < ch.bandwidth):
            raise InconsistentThresholdError(f"内部しきい値は 0 <= m < B でのみ有効です (m={p.m})")
        # ω* のインデックスは m 以下、ω* より少し右では m を超える
        at_star = ch.bandwidth * unit_index(th.omega_star)
        if at_star > p.m + CONSISTENCY_TOLERANCE:
            raise InconsistentThresholdError(
                f"しきい値 {th.omega_star} のインデックス {at_star} が m={p.m} を超えています"
            )
        right = min(th.omega_star + CONSISTENCY_TOLERANCE, 1.0)
        if right > th.omega_star and ch.bandwidth * unit_index(right) < p.m - CONSISTENCY_TOLERANCE:
            raise InconsistentThresholdError(
                f"しきい値 {th.omega_star} は m={p.m} に対して小さすぎます"
            )


def anchor_values_discounted(p: SubsidyProblem, th: ThresholdResult) -> AnchorValues:
    """
    しきい値 th の下での V(p01), V(p11), D(p01), D(p11)。

    Raises:
        InconsistentThresholdError: th が p の m と矛盾する
    """
    beta = _require_discounted(p)
    ch = p.channel
    _check_consistency(p, th, lambda omega: unit_index_discounted(ch, omega, beta))

    sol = anchor_solution(ch, beta, th.cut)
    return AnchorValues(
        v_p01=ch.bandwidth * sol.reward_p01 + p.m * sol.passive_p01,
        v_p11=ch.bandwidth * sol.reward_p11 + p.m * sol.passive_p11,
        d_p01=sol.passive_p01,
        d_p11=sol.passive_p11,
        region=sol.region,
    )


def _reward_parts(p: SubsidyProblem, anchors: AnchorValues) -> tuple[float, float]:
    """アンカー値から m 成分を除いた単位報酬部分 R(p01), R(p11)"""
    bandwidth = p.channel.bandwidth
    return (
        (anchors.v_p01 - p.m * anchors.d_p01) / bandwidth,
        (anchors.v_p11 - p.m * anchors.d_p11) / bandwidth,
    )


def _evaluate(p: SubsidyProblem, th: ThresholdResult, anchors: AnchorValues, omega: float) -> tuple[float, float]:
    beta = _require_discounted(p)
    reward_p01, reward_p11 = _reward_parts(p, anchors)
    sol = AnchorSolution(reward_p01, reward_p11, anchors.d_p01, anchors.d_p11, anchors.region)
    return evaluate_at(p.channel, beta, th.cut, sol, omega)


def value_at(p: SubsidyProblem, th: ThresholdResult, anchors: AnchorValues, omega: float) -> float:
    """
    V_{β,m}(ω)。しきい値を超えるまでの補助金の等比和と、超えた時点での能動価値の和。
    """
    reward, passive = _evaluate(p, th, anchors, omega)
    return p.channel.bandwidth * reward + p.m * passive


def passive_time_at(p: SubsidyProblem, th: ThresholdResult, anchors: AnchorValues, omega: float) -> float:
    """D_{β,m}(ω) ∈ [0, 1/(1−β)]。V の m についての右微分。"""
    _, passive = _evaluate(p, th, anchors, omega)
    return passive


def action_values_discounted(
    p: SubsidyProblem,
    th: ThresholdResult,
    anchors: AnchorValues,
    omega: float
) -> tuple[float, float]:
    """(V(ω; u=0), V(ω; u=1))。インデックスの定義式の残差確認に使う。"""
    beta = _require_discounted(p)
    ch = p.channel
    passive = p.m + beta * value_at(p, th, anchors, one_step_update(ch, omega))
    active = ch.bandwidth * omega + beta * (omega * anchors.v_p11 + (1.0 - omega) * anchors.v_p01)
    return passive, active


def solve_discounted(p: SubsidyProblem) -> tuple[ThresholdResult, AnchorValues]:
    """しきい値とアンカー値をまとめて求める"""
    th = threshold_discounted(p)
    return th, anchor_values_discounted(p, th)


def average_value_passive(p: SubsidyProblem, th: ThresholdResult) -> tuple[float, float]:
    """
    平均基準の (J_m, D_m)。

    Returns:
        tuple[float, float]: (報酬率 J_m, 受動時間割合 D_m ∈ [0, 1])
    """
    if not isinstance(p.criterion, Average):
        raise TypeError("average_value_passive requires the Average criterion")
    ch = p.channel
    _check_consistency(p, th, lambda omega: unit_index_average(ch, omega))

    bandwidth = ch.bandwidth
    omega_o = stationary_belief(ch)
    if th.kind is ThresholdKind.ALWAYS_ACTIVE:
        return omega_o * bandwidth, 0.0
    if th.kind is ThresholdKind.ALWAYS_PASSIVE:
        return p.m, 1.0

    omega_star = th.omega_star
    subsidy = p.m / bandwidth
    if ch.is_positive:
        if omega_star < ch.p01:
            return omega_o * bandwidth, 0.0
        steps = crossing_time(ch, ch.p01, omega_star) if omega_star < omega_o else INFINITE
        if steps is not INFINITE:
            escape = 1.0 - ch.p11
            landing = k_step_update(ch, ch.p01, steps)
            denominator = escape * (steps + 1) + landing
            rate = (escape * steps * subsidy + landing) / denominator
            return bandwidth * rate, escape * steps / denominator
        return p.m, 1.0

    if omega_star < ch.p11:
        return omega_o * bandwidth, 0.0
    after_good = one_step_update(ch, ch.p11)
    if omega_star < after_good:
        denominator = 1.0 + 2.0 * ch.p01 - after_good
        return bandwidth * ch.p01 * (subsidy + 1.0) / denominator, ch.p01 / denominator
    return p.m, 1.0


def value_bound_constant(ch: ChannelModel) -> float:
    """|V(ω) − V(ω′)| の上界 c + 1, c = max{2/(1−p11), 2/p01}"""
    return max(2.0 / (1.0 - ch.p11), 2.0 / ch.p01) + 1.0

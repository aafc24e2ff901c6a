"""
ラグランジュ緩和による最適性能の上界

設計意図:
- 緩和問題の双対関数 G(m) は m について区分線形・凸で、その傾き（劣勾配）は各チャネルの受動時間の和
- 割引基準はブレークポイントを列挙して走査する（正相関チャネルのグレー領域は飛ばす）
- 同じ上界を劣勾配の符号による二分法でも求められるようにし、相互検証に使う
- 平均基準は受動時間割合 D_m の和が N−K 以下となる m の上限で最小化する
"""
import bisect
import logging
from dataclasses import dataclass, field

import numpy as np

from src.core.channel_model import ChannelModel, stationary_belief
from src.core.criteria import Average, Criterion, Discounted
from src.core.errors import ConfigError
from src.core.policy_evaluation import anchor_solution, evaluate_at
from src.core.subsidy_bandit import (
    SubsidyProblem,
    average_value_passive,
    passive_time_at,
    solve_discounted,
    threshold_average,
    value_at,
)
from src.core.whittle_index import index_breakpoints, sup_bisect

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-3
BISECTION_ITERATIONS = 60


@dataclass(frozen=True)
class BoundRequest:
    """
    上界計算の入力。

    Attributes:
        channels: チャネル列（チャネル ID は 1 始まりの位置）
        K: 1スロットで選択するチャネル数
        criterion: Discounted(β) または Average()
        initial_beliefs: 初期信念（割引基準のみ使用、None なら定常確率）
        epsilon: 要求精度
    """
    channels: tuple[ChannelModel, ...]
    K: int
    criterion: Criterion
    initial_beliefs: tuple[float, ...] | None = None
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        if not self.channels:
            raise ConfigError("channels が空です")
        if not (1 <= self.K <= len(self.channels)):
            raise ConfigError(f"K は 1 <= K <= N で指定してください (K={self.K}, N={len(self.channels)})")
        if not self.epsilon > 0.0:
            raise ConfigError(f"epsilon は正の値で指定してください: {self.epsilon}")
        if self.initial_beliefs is not None:
            beliefs = tuple(float(b) for b in self.initial_beliefs)
            if len(beliefs) != len(self.channels):
                raise ConfigError("initial_beliefs の長さがチャネル数と一致しません")
            if any(not (0.0 <= b <= 1.0) for b in beliefs):
                raise ConfigError("initial_beliefs は [0, 1] の値で指定してください")
            object.__setattr__(self, "initial_beliefs", beliefs)

    @property
    def N(self) -> int:
        return len(self.channels)

    @property
    def max_bandwidth(self) -> float:
        return max(ch.bandwidth for ch in self.channels)

    @property
    def beliefs(self) -> tuple[float, ...]:
        if self.initial_beliefs is None:
            return tuple(stationary_belief(ch) for ch in self.channels)
        return self.initial_beliefs

    @property
    def beta(self) -> float:
        if not isinstance(self.criterion, Discounted):
            raise TypeError("beta is only defined for the discounted criterion")
        return self.criterion.beta


@dataclass(frozen=True)
class BoundResult:
    """
    緩和問題の最適値。

    Attributes:
        m_star: 報告する最小化点 m′
        value: G(m′)
        exact: m* がどのグレー領域にも入らないことが確定している場合 True
        criterion: 入力の報酬基準
        method: "breakpoints" / "bisection" / "average"
    """
    m_star: float
    value: float
    exact: bool
    criterion: Criterion
    method: str = "breakpoints"
    skipped_intervals: int = field(default=0, compare=False)

    def to_dict(self) -> dict:
        criterion = {"type": "average"}
        if isinstance(self.criterion, Discounted):
            criterion = {"type": "discounted", "beta": self.criterion.beta}
        return {
            "m_star": self.m_star,
            "value": self.value,
            "exact": self.exact,
            "criterion": criterion,
            "method": self.method,
        }


def _channel_problems(req: BoundRequest, m: float):
    for ch, omega in zip(req.channels, req.beliefs):
        yield SubsidyProblem(ch, m, req.criterion), omega


def relaxed_objective(req: BoundRequest, m: float) -> float:
    """G(m) = Σ V_i(ω_i(1)) − m(N−K)/(1−β)"""
    beta = req.beta
    total = 0.0
    for problem, omega in _channel_problems(req, m):
        th, anchors = solve_discounted(problem)
        total += value_at(problem, th, anchors, omega)
    return total - m * (req.N - req.K) / (1.0 - beta)


def bound_subgradient(req: BoundRequest, m: float) -> float:
    """dG/dm（右微分）= Σ D_i(ω_i(1)) − (N−K)/(1−β)"""
    beta = req.beta
    total = 0.0
    for problem, omega in _channel_problems(req, m):
        th, anchors = solve_discounted(problem)
        total += passive_time_at(problem, th, anchors, omega)
    return total - (req.N - req.K) / (1.0 - beta)


def _passive_table(ch: ChannelModel, beta: float, omega: float, beliefs: tuple[float, ...],
                   points: tuple[float, ...]) -> tuple[list[float], list[float]]:
    """
    1チャネルの D(ω(1)) を m の区間ごとに並べた表。

    しきい値が隣り合う構造的信念 [c_k, c_{k+1}) にある間は交差時間が変わらないため、
    区間の中点をしきい値として1回だけ評価すればよい。

    Returns:
        (edges, passive): m >= edges[j−1] かつ m < edges[j] のとき passive[j]
    """
    cuts = [0.5 * beliefs[0]]
    cuts += [0.5 * (a + b) for a, b in zip(beliefs, beliefs[1:])]
    cuts.append(0.5 * (beliefs[-1] + 1.0))

    passive = []
    for cut in cuts:
        sol = anchor_solution(ch, beta, cut)
        passive.append(evaluate_at(ch, beta, cut, sol, omega)[1])
    passive.append(1.0 / (1.0 - beta))
    return list(points) + [ch.bandwidth], passive


def upper_bound_discounted(req: BoundRequest) -> BoundResult:
    """
    ブレークポイント走査による ε 精度の上界。

    δ = ε(1−β)/K とし、正相関チャネルごとに幅 δ/N のグレー領域を残して区間を列挙する。
    グレー領域に触れない区間を左から走査し、劣勾配が初めて非負になる区間の左端を m′ とする。
    """
    beta = req.beta
    delta = req.epsilon * (1.0 - beta) / req.K
    per_channel = delta / req.N
    max_bandwidth = req.max_bandwidth

    tables = []
    gray_areas = []
    edges_all = {0.0, max_bandwidth}
    for ch, omega in zip(req.channels, req.beliefs):
        bps = index_breakpoints(ch, beta, omega, per_channel)
        tables.append(_passive_table(ch, beta, omega, bps.beliefs, bps.points))
        edges_all.update(bps.points)
        edges_all.add(ch.bandwidth)
        if bps.gray_area is not None and bps.gray_area[0] < bps.gray_area[1]:
            gray_areas.append(bps.gray_area)

    edges = sorted(e for e in edges_all if 0.0 <= e <= max_bandwidth)
    slack = (req.N - req.K) / (1.0 - beta)
    logger.info("relaxation bound: %d breakpoints, %d gray areas", len(edges), len(gray_areas))

    m_prime = max_bandwidth
    skipped_since_negative = False
    skipped = 0
    for left, right in zip(edges, edges[1:]):
        if right <= left:
            continue
        if any(left < high and low < right for low, high in gray_areas):
            skipped_since_negative = True
            skipped += 1
            continue
        gradient = -slack
        for table_edges, passive in tables:
            gradient += passive[bisect.bisect_right(table_edges, left)]
        if gradient >= 0.0:
            m_prime = left
            break
        skipped_since_negative = False

    # 非負の区間が見つからなければ m′ は右端 max B のまま
    value = relaxed_objective(req, m_prime)
    return BoundResult(
        m_star=m_prime,
        value=value,
        exact=not skipped_since_negative,
        criterion=req.criterion,
        method="breakpoints",
        skipped_intervals=skipped,
    )


def upper_bound_bisection(req: BoundRequest, iters: int = BISECTION_ITERATIONS) -> BoundResult:
    """劣勾配の符号による二分法。subgradient(lo) < 0 <= subgradient(hi) を保つ。"""
    if iters < 1:
        raise ConfigError(f"iters は 1 以上で指定してください: {iters}")

    if bound_subgradient(req, 0.0) >= 0.0:
        return BoundResult(0.0, relaxed_objective(req, 0.0), False, req.criterion, "bisection")

    lo, hi = sup_bisect(lambda m: bound_subgradient(req, m) < 0.0, 0.0, req.max_bandwidth,
                        max_iterations=iters)
    return BoundResult(hi, relaxed_objective(req, hi), False, req.criterion, "bisection")


def _average_terms(channels, m: float) -> tuple[float, float]:
    rate = 0.0
    passive = 0.0
    for ch in channels:
        problem = SubsidyProblem(ch, m, Average())
        j_m, d_m = average_value_passive(problem, threshold_average(problem))
        rate += j_m
        passive += d_m
    return rate, passive


def average_objective(channels, K: int, m: float) -> float:
    """平均基準の双対関数 Σ J_m − m(N−K)"""
    rate, _ = _average_terms(channels, m)
    return rate - m * (len(channels) - K)


def upper_bound_average(channels, K: int, epsilon: float = DEFAULT_EPSILON) -> BoundResult:
    """
    平均基準の上界。m* = sup{m : Σ D_m <= N−K} で Σ J_m − m(N−K) が最小になる。
    初期信念には依存しない。
    """
    req = BoundRequest(tuple(channels), K, Average(), epsilon=epsilon)
    slack = req.N - req.K

    def under_budget(m: float) -> bool:
        return _average_terms(req.channels, m)[1] <= slack

    lo, _ = sup_bisect(under_budget, 0.0, req.max_bandwidth,
                       tolerance=epsilon * 1e-6 / req.N)
    value = average_objective(req.channels, req.K, lo)
    return BoundResult(lo, value, False, req.criterion, "average")


def dense_grid_minimum(req: BoundRequest, step: float, low: float = 0.0,
                       high: float | None = None) -> tuple[float, float]:
    """
    G(m) を等間隔グリッドで評価した最小値 (m, G)。検証用。

    既定の範囲は [0, max B]。G は凸なので、最小点を含む窓 [low, high] だけを細かく調べてもよい。
    """
    if high is None:
        high = req.max_bandwidth
    grid = np.arange(low, high + 0.5 * step, step)
    values = np.array([relaxed_objective(req, float(m)) for m in grid])
    best = int(np.argmin(values))
    return float(grid[best]), float(values[best])

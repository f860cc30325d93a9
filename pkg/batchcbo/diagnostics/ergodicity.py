# 遍历系数工具箱
#
# 转移矩阵 A_n, B_n^l 的构造, 遍历系数 α, 混合范数 ‖·‖₁,∞, 有序乘积,
# 以及对记录下来的轨迹逐窗口数值验证各条收缩不等式.

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from batchcbo.core.batching import PartitionSchedule, connectivity_count
from batchcbo.core.ensemble import diameter
from batchcbo.core.transitions import TransitionRecord
from batchcbo.utils.assets import (
    BOUND_TOLERANCE,
    ROW_SUM_TOLERANCE,
    ConfigurationError,
    PreconditionError,
    UsageError,
)
from batchcbo.utils.logger import get_log

LOG = get_log("Ergodicity")


def ergodicity_coefficient(A) -> float:
    """
    α(A) = min_{i,j} Σ_k min{a_ik, a_jk}

    i = j 也参与取最小 (此时为行和).
    """
    A = np.asarray(A, dtype=float)
    return float(np.minimum(A[:, None, :], A[None, :, :]).sum(axis=-1).min())


def mixed_norm_1_inf(A) -> float:
    """‖A‖₁,∞ = max_i Σ_j |a_ij|"""
    A = np.asarray(A, dtype=float)
    return float(np.abs(A).sum(axis=1).max())


def ordered_product(matrices: Sequence[np.ndarray]) -> np.ndarray:
    """按时间顺序给出 M_n, …, M_{n+m−1}, 返回 M_{n+m−1}···M_n (最早的在最右)"""
    if len(matrices) == 0:
        raise UsageError("空的矩阵序列没有乘积")
    out = np.array(matrices[0], dtype=float)
    for M in matrices[1:]:
        out = np.asarray(M, dtype=float) @ out
    return out


@dataclass(frozen=True)
class BoundReport:
    """一条不等式在一个窗口上的检查结果"""

    name: str
    window: Tuple[int, int]
    lhs: float
    rhs: float
    relation: str = "<="
    coordinate: Optional[int] = None
    tolerance: float = BOUND_TOLERANCE

    @property
    def slack(self) -> float:
        """正数表示不等式成立且有余量"""
        return self.rhs - self.lhs if self.relation == "<=" else self.lhs - self.rhs

    @property
    def passed(self) -> bool:
        return self.slack >= -self.tolerance

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "window": list(self.window),
            "coordinate": self.coordinate,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": self.passed,
        }


def diameter_contraction_check(
    A, z, window: Tuple[int, int] = (0, 0), coordinate: Optional[int] = None, tol: float = BOUND_TOLERANCE
) -> BoundReport:
    """等行和矩阵的直径收缩: 𝒟(Az) ≤ (a − α(A))·𝒟(z)"""
    A = np.asarray(A, dtype=float)
    z = np.asarray(z, dtype=float)
    sums = A.sum(axis=1)
    if sums.max() - sums.min() > ROW_SUM_TOLERANCE:
        raise PreconditionError(f"行和不相等 (跨度 {sums.max() - sums.min():.3e})")
    a = float(sums.mean())
    return BoundReport(
        "diameter_contraction",
        tuple(window),
        diameter(A @ z),
        (a - ergodicity_coefficient(A)) * diameter(z),
        "<=",
        coordinate,
        tol,
    )


def _window_records(records: Sequence[TransitionRecord], start: int, m: int) -> List[TransitionRecord]:
    by_step = {r.step: r for r in records}
    missing = [n for n in range(start, start + m) if n not in by_step]
    if missing:
        raise UsageError(f"窗口 [{start}, {start + m}) 缺少第 {missing[0]} 步的转移记录")
    return [by_step[n] for n in range(start, start + m)]


def _connectivity(schedule: Optional[PartitionSchedule], start: int, m: int) -> int:
    if schedule is None:
        raise UsageError("需要记录批划分调度才能计算 𝒢")
    return connectivity_count(schedule, start, m)


def product_alpha_lower_bound_noise_free(
    records: Sequence[TransitionRecord],
    gamma: float,
    schedule: PartitionSchedule,
    start: int,
    m: int,
    tol: float = BOUND_TOLERANCE,
) -> BoundReport:
    """无噪声乘积的遍历系数下界: α(A_{n+m−1}···A_n) ≥ γ(1−γ)^{m−1}·𝒢_{[n,n+m)}"""
    if m < 1:
        raise UsageError(f"窗口长度必须 ≥ 1, 收到 {m}")
    window = _window_records(records, start, m)
    product = ordered_product([r.A() for r in window])
    G = _connectivity(schedule, start, m)
    return BoundReport(
        "product_alpha_noise_free",
        (start, start + m),
        ergodicity_coefficient(product),
        gamma * (1.0 - gamma) ** (m - 1) * G,
        ">=",
        None,
        tol,
    )


def noise_statistic_H(records: Sequence[TransitionRecord], start: int, m: int, l: int) -> float:
    """ℋ_{[n,n+m)} = 2[Π_r (1 + 2 max_i |η_r^{i,l}|) − 1]; 空窗口为 0"""
    if m <= 0:
        return 0.0
    window = _window_records(records, start, m)
    factors = [1.0 + 2.0 * float(np.abs(r.eta[:, l]).max()) for r in window]
    return 2.0 * (float(np.prod(factors)) - 1.0)


def perturbed_product_alpha_bound(
    records: Sequence[TransitionRecord],
    gamma: float,
    schedule: PartitionSchedule,
    start: int,
    m: int,
    l: int,
    tol: float = BOUND_TOLERANCE,
) -> List[BoundReport]:
    """
    带噪声乘积的遍历系数下界, 以及它依赖的两条不等式

    返回三条报告:
        perturbed_product_alpha: α(Π(A_r+B_r)) ≥ γ(1−γ)^{m−1}𝒢 − ℋ
        alpha_norm_lower_bound: α(Π(A+B) − ΠA) ≥ −2‖Π(A+B) − ΠA‖₁,∞
        product_difference_norm: ‖Π(A+B) − ΠA‖₁,∞ ≤ Π(‖A_r‖+‖B_r‖) − Π‖A_r‖
    """
    if m < 1:
        raise UsageError(f"窗口长度必须 ≥ 1, 收到 {m}")
    window = _window_records(records, start, m)
    As = [r.A() for r in window]
    Bs = [r.B(l) for r in window]
    full = ordered_product([a + b for a, b in zip(As, Bs)])
    base = ordered_product(As)
    diff = full - base
    G = _connectivity(schedule, start, m)
    H = noise_statistic_H(records, start, m, l)
    bounds = (start, start + m)
    diff_norm = mixed_norm_1_inf(diff)
    norm_bound = float(np.prod([mixed_norm_1_inf(a) + mixed_norm_1_inf(b) for a, b in zip(As, Bs)])) - float(
        np.prod([mixed_norm_1_inf(a) for a in As])
    )
    return [
        BoundReport(
            "perturbed_product_alpha",
            bounds,
            ergodicity_coefficient(full),
            gamma * (1.0 - gamma) ** (m - 1) * G - H,
            ">=",
            l,
            tol,
        ),
        BoundReport("alpha_norm_lower_bound", bounds, ergodicity_coefficient(diff), -2.0 * diff_norm, ">=", l, tol),
        BoundReport("product_difference_norm", bounds, diff_norm, norm_bound, "<=", l, tol),
    ]


def _require_recorded(result):
    if not result.transitions:
        raise UsageError("运行没有记录转移矩阵 (record.transitions)")
    if result.diameters is None:
        raise UsageError("运行没有记录直径序列 (record.diameters)")


def window_diameter_bound_check(result, start: int, m: int, l: int, tol: float = BOUND_TOLERANCE) -> List[BoundReport]:
    """
    用记录下来的直径检查两条界

    one_window_diameter: 𝒟(𝔵_{n+m}^l) ≤ (1 − α(Π_{[n,n+m)}(A+B)))·𝒟(𝔵_n^l)
    pathwise_diameter: 在 t = n+m 处,
        𝒟(𝔵_t^l) ≤ 𝒟(𝔵_0^l)(1 + ℋ_{[km,t)}) Π_{s=1}^{k}(1 − γ(1−γ)^{m−1}𝒢_s + ℋ_s), k = ⌊t/m⌋
    """
    _require_recorded(result)
    if m < 1:
        raise UsageError(f"窗口长度必须 ≥ 1, 收到 {m}")
    end = start + m
    if end > result.steps:
        raise UsageError(f"窗口 [{start}, {end}) 超出轨迹长度 {result.steps}")
    records = result.transitions
    gamma = result.gamma
    D = result.diameters[:, l]
    product = ordered_product([r.perturbed(l) for r in _window_records(records, start, m)])
    one_window = BoundReport(
        "one_window_diameter", (start, end), float(D[end]), (1.0 - ergodicity_coefficient(product)) * float(D[start]),
        "<=", l, tol,
    )

    k = end // m
    factor = 1.0 + noise_statistic_H(records, k * m, end - k * m, l)
    for s in range(1, k + 1):
        G = _connectivity(result.schedule, (s - 1) * m, m)
        H = noise_statistic_H(records, (s - 1) * m, m, l)
        factor *= 1.0 - gamma * (1.0 - gamma) ** (m - 1) * G + H
    pathwise = BoundReport("pathwise_diameter", (0, end), float(D[end]), float(D[0]) * factor, "<=", l, tol)
    return [one_window, pathwise]


@dataclass(frozen=True)
class DiagnosticsSummary:
    reports: Tuple[BoundReport, ...]
    window_length: int
    h_range: Tuple[float, float] = (0.0, 0.0)

    @property
    def total(self) -> int:
        return len(self.reports)

    @property
    def passed(self) -> int:
        return sum(1 for r in self.reports if r.passed)

    @property
    def all_passed(self) -> bool:
        return self.passed == self.total

    def by_name(self) -> Dict[str, Dict[str, int]]:
        out: Dict[str, Dict[str, int]] = {}
        for r in self.reports:
            entry = out.setdefault(r.name, {"total": 0, "passed": 0})
            entry["total"] += 1
            entry["passed"] += int(r.passed)
        return out

    def to_dict(self) -> Dict:
        return {
            "window_length": self.window_length,
            "total": self.total,
            "passed": self.passed,
            "h_range": list(self.h_range),
            "by_name": self.by_name(),
            "reports": [r.to_dict() for r in self.reports],
        }


def _product_row_stochastic(records, start: int, m: int, tol: float) -> BoundReport:
    product = ordered_product([r.A() for r in _window_records(records, start, m)])
    deviation = max(float(np.abs(product.sum(axis=1) - 1.0).max()), float(max(0.0, -product.min())))
    return BoundReport("product_row_stochastic", (start, start + m), deviation, 0.0, "<=", None, tol)


def _replay_columns(result) -> np.ndarray:
    """按 x_{n+1}^l = (A_n + B_n^l)x_n^l 重放, 得到各步状态 (steps+1, N, d)"""
    states = [np.array(result.initial.states)]
    for record in result.transitions[: result.steps]:
        x = states[-1]
        nxt = np.column_stack([record.perturbed(l) @ x[:, l] for l in range(x.shape[1])])
        states.append(nxt)
    return np.stack(states)


def verify_trajectory(result, m: int, tol: float = BOUND_TOLERANCE) -> DiagnosticsSummary:
    """
    对所有完整的长度 m 窗口和所有坐标做全部窗口检查

    ζ = 0 时额外检查无噪声乘积下界. 状态列由转移矩阵重放得到.
    """
    _require_recorded(result)
    if m < 1:
        raise UsageError(f"窗口长度必须 ≥ 1, 收到 {m}")
    n_windows = result.steps // m
    if n_windows == 0:
        raise UsageError(f"轨迹只有 {result.steps} 步, 不足一个长度为 {m} 的窗口")
    records = result.transitions
    noise_free = result.noise.effective_zeta == 0.0
    columns = _replay_columns(result)
    reports: List[BoundReport] = []
    H_values: List[float] = []
    for w in range(n_windows):
        start = w * m
        reports.append(_product_row_stochastic(records, start, m, 1e-9))
        if noise_free:
            reports.append(product_alpha_lower_bound_noise_free(records, result.gamma, result.schedule, start, m, tol))
        for l in range(result.dimension):
            product = ordered_product([r.perturbed(l) for r in _window_records(records, start, m)])
            reports.append(diameter_contraction_check(product, columns[start, :, l], (start, start + m), l, tol))
            reports.extend(perturbed_product_alpha_bound(records, result.gamma, result.schedule, start, m, l, tol))
            reports.extend(window_diameter_bound_check(result, start, m, l, tol))
            H_values.append(noise_statistic_H(records, start, m, l))
    summary = DiagnosticsSummary(tuple(reports), m, (min(H_values), max(H_values)))
    if not summary.all_passed:
        LOG.warning(f"{summary.total - summary.passed}/{summary.total} 条窗口检查未通过")
    return summary


@dataclass(frozen=True)
class PropertySuiteReport:
    """随机矩阵性质检查: 每条性质的违反次数与最大违反量"""

    cases: int
    violations: Dict[str, int] = field(default_factory=dict)
    worst: Dict[str, float] = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(v == 0 for v in self.violations.values())

    def to_dict(self) -> Dict:
        return {"cases": self.cases, "violations": dict(self.violations), "worst": dict(self.worst)}


def _equal_row_sum_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    A = rng.uniform(-1.0, 1.0, size=(n, n))
    a = rng.uniform(-1.0, 2.0)
    A[:, -1] += a - A.sum(axis=1)
    return A


def matrix_property_suite(
    rng: np.random.Generator, cases: int = 10_000, max_size: int = 8, tol: float = BOUND_TOLERANCE
) -> PropertySuiteReport:
    """
    在随机矩阵上检查遍历系数的基本性质

    超可加性, 正齐次性, 单调性, α ≥ −2‖·‖₁,∞, 乘积差的范数界, 等行和直径收缩.
    矩阵元素取自 [−1, 1], 阶数 2..max_size; 乘积差的范数界用长度 ≤ 5, 阶数 ≤ 6 的序列.
    """
    if max_size < 2 or cases < 1:
        raise ConfigurationError(f"需要 max_size ≥ 2 且 cases ≥ 1, 收到 {max_size}, {cases}")
    names = (
        "super_additivity",
        "homogeneity",
        "monotonicity",
        "alpha_norm_lower_bound",
        "product_difference_norm",
        "diameter_contraction",
    )
    violations = {name: 0 for name in names}
    worst = {name: 0.0 for name in names}

    def record(name: str, slack: float):
        if slack < -tol:
            violations[name] += 1
        worst[name] = min(worst[name], slack)

    for _ in range(cases):
        n = int(rng.integers(2, max_size + 1))
        A = rng.uniform(-1.0, 1.0, size=(n, n))
        B = rng.uniform(-1.0, 1.0, size=(n, n))
        alpha_A = ergodicity_coefficient(A)

        record("super_additivity", ergodicity_coefficient(A + B) - alpha_A - ergodicity_coefficient(B))
        t = float(rng.uniform(0.0, 5.0))
        record("homogeneity", -abs(ergodicity_coefficient(t * A) - t * alpha_A))
        lower = A - rng.uniform(0.0, 1.0, size=(n, n))
        record("monotonicity", alpha_A - ergodicity_coefficient(lower))
        record("alpha_norm_lower_bound", alpha_A + 2.0 * mixed_norm_1_inf(A))

        k = int(rng.integers(1, 6))
        size = min(n, 6)
        As = [rng.uniform(-1.0, 1.0, size=(size, size)) for _ in range(k)]
        Bs = [rng.uniform(-1.0, 1.0, size=(size, size)) for _ in range(k)]
        lhs = mixed_norm_1_inf(ordered_product([a + b for a, b in zip(As, Bs)]) - ordered_product(As))
        rhs = float(np.prod([mixed_norm_1_inf(a) + mixed_norm_1_inf(b) for a, b in zip(As, Bs)])) - float(
            np.prod([mixed_norm_1_inf(a) for a in As])
        )
        record("product_difference_norm", rhs - lhs)

        E = _equal_row_sum_matrix(rng, n)
        z = rng.uniform(-1.0, 1.0, size=n)
        report = diameter_contraction_check(E, z, tol=tol)
        record("diameter_contraction", report.slack)

    return PropertySuiteReport(cases, violations, worst)


__all__ = [
    "TransitionRecord",
    "BoundReport",
    "DiagnosticsSummary",
    "PropertySuiteReport",
    "ergodicity_coefficient",
    "mixed_norm_1_inf",
    "ordered_product",
    "diameter_contraction_check",
    "product_alpha_lower_bound_noise_free",
    "noise_statistic_H",
    "perturbed_product_alpha_bound",
    "window_diameter_bound_check",
    "verify_trajectory",
    "matrix_property_suite",
]

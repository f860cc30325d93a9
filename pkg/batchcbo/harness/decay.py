# 衰减指数估计
#
# 对 log 𝒟(𝔵_n^l) 关于 n 做最小二乘拟合, 并与理论下界对比.

from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import linregress

from batchcbo.core.batching import connectivity_count, estimate_p_m0, search_m0
from batchcbo.core.dynamics import RunResult
from batchcbo.diagnostics.ergodicity import verify_trajectory
from batchcbo.diagnostics.rates import lambda0_limit, lambda0_path, lambda1, lambda2_sup
from batchcbo.utils.assets import (
    DIAMETER_FLOOR,
    MIN_FIT_POINTS,
    CBOError,
    DecayMode,
    EstimationError,
    ResourceLimitError,
    UsageError,
)
from batchcbo.utils.logger import get_log

LOG = get_log("Decay")


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    r_squared: float
    points: int
    stderr: float = 0.0


def fit_log_decay(series) -> DecayFit:
    """
    拟合 log s_n = a + b·n

    只使用第一次低于 DIAMETER_FLOOR 之前的点. 可用点少于 3 个时抛出 EstimationError.
    """
    series = np.asarray(series, dtype=float)
    below = np.flatnonzero(~(series >= DIAMETER_FLOOR))
    usable = series[: below[0]] if below.size else series
    if usable.size < MIN_FIT_POINTS:
        raise EstimationError(f"只有 {usable.size} 个不低于 {DIAMETER_FLOOR:g} 的点, 至少需要 {MIN_FIT_POINTS} 个")
    n = np.arange(usable.size, dtype=float)
    fit = linregress(n, np.log(usable))
    return DecayFit(float(fit.slope), float(fit.intercept), float(fit.rvalue**2), int(usable.size), float(fit.stderr))


@dataclass(frozen=True)
class DecayReport:
    """
    单坐标的衰减估计

    slope 为负表示衰减; pathwise 模式下 slope 是各次运行斜率的均值, slopes 为逐次结果.
    theoretical_rate 是理论衰减率下界 Λ, 与 −slope 比较.
    path_rates 只在无噪声 pathwise 模式且记录了批划分调度时给出, 每次运行一个 Λ₀.
    slope_stderr: expectation 模式为回归斜率的标准误, pathwise 模式为各次斜率均值的标准误.
    """

    coordinate: int
    mode: DecayMode
    slope: float
    intercept: float
    r_squared: float
    points: int
    replicates: int
    slopes: Tuple[float, ...] = ()
    rate_name: Optional[str] = None
    theoretical_rate: Optional[float] = None
    m0: Optional[int] = None
    p_m0: Optional[float] = None
    zeta: float = 0.0
    bound_checks: Optional[Dict[str, int]] = None
    path_rates: Tuple[float, ...] = ()
    slope_stderr: float = 0.0

    @property
    def consistent(self) -> Optional[bool]:
        """经验衰减是否不慢于理论下界; 没有理论值时为 None"""
        if self.theoretical_rate is None:
            return None
        return -self.slope >= self.theoretical_rate

    def to_dict(self) -> Dict[str, Any]:
        return {
            "coordinate": self.coordinate,
            "mode": self.mode.value,
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "points": self.points,
            "replicates": self.replicates,
            "slopes": list(self.slopes),
            "rate_name": self.rate_name,
            "theoretical_rate": self.theoretical_rate,
            "m0": self.m0,
            "p_m0": self.p_m0,
            "zeta": self.zeta,
            "bound_checks": self.bound_checks,
            "path_rates": list(self.path_rates),
            "slope_stderr": self.slope_stderr,
        }


def _diameter_column(result: RunResult, l: int) -> np.ndarray:
    if result.diameters is None:
        raise UsageError("本次运行没有记录直径序列 (record.diameters)")
    if not 0 <= l < result.dimension:
        raise UsageError(f"坐标 {l} 超出 [0, {result.dimension})")
    return result.diameters[:, l]


def _theory(result: RunResult, mode: DecayMode, m0: Optional[int], p: Optional[float]):
    N, P = result.config.n_particles, result.config.batch_size
    zeta = result.noise.effective_zeta
    if m0 is None:
        try:
            m0 = search_m0(N, P).m0
        except CBOError as e:
            LOG.info(f"未计算理论衰减率: {e}")
            return None, None, None, None
    if p is None:
        try:
            # 只在能精确枚举时自动计算
            p = estimate_p_m0(N, P, m0, 1, np.random.default_rng(0), exact=True).value
        except ResourceLimitError as e:
            LOG.info(f"未计算理论衰减率: {e}")
            return None, None, m0, None
    if mode is DecayMode.EXPECTATION:
        return "lambda1", lambda1(result.gamma, N, m0, zeta, p), m0, p
    if zeta == 0:
        return "lambda0", lambda0_limit(result.gamma, m0, p), m0, p
    return "lambda2_sup", lambda2_sup(result.gamma, N, m0, zeta, p), m0, p


def _bound_checks(results: Sequence[RunResult], m0: Optional[int]) -> Optional[Dict[str, int]]:
    if m0 is None or not all(r.transitions for r in results):
        return None
    total = passed = 0
    for r in results:
        summary = verify_trajectory(r, m0)
        total += summary.total
        passed += summary.passed
    return {"total": total, "passed": passed}


def _path_rates(results: Sequence[RunResult], m0: Optional[int]) -> Tuple[float, ...]:
    """无噪声时每条轨迹按各完整窗口的 𝒢_s 算出的 Λ₀"""
    if m0 is None or any(r.schedule is None or r.noise.effective_zeta > 0 for r in results):
        return ()
    rates = []
    for r in results:
        schedule = r.schedule
        G = [connectivity_count(schedule, schedule.start + s * m0, m0) for s in range(len(schedule) // m0)]
        rates.append(lambda0_path(r.gamma, m0, G))
    return tuple(rates)


def estimate_decay(
    results: Union[RunResult, Sequence[RunResult]],
    l: int = 0,
    mode: Union[str, DecayMode] = DecayMode.PATHWISE,
    m0: Optional[int] = None,
    p: Optional[float] = None,
) -> DecayReport:
    """
    估计坐标 l 的直径衰减指数

    参数:
        results: 一次运行或一组同配置的重复运行
        mode: pathwise 逐次拟合后取均值; expectation 先在每个 n 上平均 𝒟 再拟合
        m0, p: 理论下界所需的 m0 与 p_{m0}; 缺省时在小规模下自动精确计算
    """
    mode = DecayMode(mode)
    if isinstance(results, RunResult):
        results = [results]
    results = list(results)
    if not results:
        raise UsageError("至少需要一次运行")
    columns = [_diameter_column(r, l) for r in results]

    if mode is DecayMode.EXPECTATION:
        length = min(c.size for c in columns)
        mean = np.mean([c[:length] for c in columns], axis=0)
        fit = fit_log_decay(mean)
        slopes = (fit.slope,)
    else:
        fits = [fit_log_decay(c) for c in columns]
        slopes = tuple(f.slope for f in fits)
        fit = DecayFit(
            float(np.mean(slopes)),
            float(np.mean([f.intercept for f in fits])),
            float(np.mean([f.r_squared for f in fits])),
            min(f.points for f in fits),
            float(np.std(slopes, ddof=1) / np.sqrt(len(slopes))) if len(slopes) > 1 else fits[0].stderr,
        )

    rate_name, rate, m0, p = _theory(results[0], mode, m0, p)
    report = DecayReport(
        coordinate=l,
        mode=mode,
        slope=fit.slope,
        intercept=fit.intercept,
        r_squared=fit.r_squared,
        points=fit.points,
        replicates=len(results),
        slopes=slopes,
        rate_name=rate_name,
        theoretical_rate=rate,
        m0=m0,
        p_m0=p,
        zeta=results[0].noise.effective_zeta,
        bound_checks=_bound_checks(results, m0),
        path_rates=_path_rates(results, m0) if mode is DecayMode.PATHWISE else (),
        slope_stderr=fit.stderr,
    )
    LOG.info(
        f"坐标 {l} ({mode.value}): 斜率 {report.slope:.6g}, R²={report.r_squared:.4f}"
        + (f", {rate_name}={rate:.6g}" if rate is not None else "")
    )
    return report


__all__ = ["DecayFit", "DecayReport", "fit_log_decay", "estimate_decay"]

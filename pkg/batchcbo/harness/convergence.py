# 收敛检查
#
# 用快照检验轨迹是否为 Cauchy 列: 相邻快照间的最大位移应指数衰减.

import math
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from batchcbo.core.dynamics import RunResult, best_particle
from batchcbo.core.ensemble import max_pairwise_inf_distance
from batchcbo.harness.decay import fit_log_decay
from batchcbo.utils.assets import DIAMETER_FLOOR, EstimationError, UsageError
from batchcbo.utils.logger import get_log

LOG = get_log("Convergence")


@dataclass(frozen=True)
class ConvergenceReport:
    """
    尾部窗口上的收敛报告

    displacements[k] = max_i ‖x^i(s_{k+1}) − x^i(s_k)‖_∞, s_k 为尾部第 k 个快照的步数.
    位移恒为 0 时 slope 为 None 且 cauchy 为 True.
    residual_drift 是按拟合的几何衰减外推的剩余位移上界 d_last·r/(1−r), r = e^{slope};
    不衰减时为 inf.
    """

    tail_steps: np.ndarray
    displacements: np.ndarray
    slope: Optional[float]
    r_squared: Optional[float]
    limit_index: int
    limit_point: np.ndarray
    limit_value: float
    final_diameter: float
    max_distance_to_limit: float
    residual_drift: float

    @property
    def cauchy(self) -> bool:
        if not self.displacements.any():
            return True
        return self.slope is not None and self.slope < 0

    @property
    def particles_agree(self) -> bool:
        """所有粒子到外推极限的距离上界不超过 10 倍终态直径"""
        return self.max_distance_to_limit + self.residual_drift <= 10.0 * self.final_diameter

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tail_steps": self.tail_steps.tolist(),
            "displacements": self.displacements.tolist(),
            "slope": self.slope,
            "r_squared": self.r_squared,
            "cauchy": self.cauchy,
            "limit_index": self.limit_index,
            "limit_point": self.limit_point.tolist(),
            "limit_value": self.limit_value,
            "final_diameter": self.final_diameter,
            "max_distance_to_limit": self.max_distance_to_limit,
            "residual_drift": self.residual_drift,
            "particles_agree": self.particles_agree,
        }


def _residual_drift(displacements: np.ndarray, slope: Optional[float]) -> float:
    if not displacements.any():
        return 0.0
    last = float(displacements[-1])
    if slope is None:
        # 位移太快跌到截断线以下, 拟合点不足
        return last if last < DIAMETER_FLOOR else math.inf
    if slope >= 0:
        return math.inf
    r = math.exp(slope)
    return last * r / (1.0 - r)


def convergence_check(result: RunResult, tail: Optional[int] = None) -> ConvergenceReport:
    """
    参数:
        tail: 使用最后 tail 个快照; 缺省用全部快照
    """
    snapshots = list(result.snapshots)
    if tail is not None:
        if tail < 2:
            raise UsageError(f"尾部窗口至少包含 2 个快照, 收到 {tail}")
        snapshots = snapshots[-tail:]
    if len(snapshots) < 2:
        raise UsageError(f"只记录了 {len(snapshots)} 个快照, 无法检验收敛 (record.snapshots)")

    steps = np.array([s.step for s in snapshots], dtype=int)
    displacements = np.array(
        [float(np.abs(b.states - a.states).max()) for a, b in zip(snapshots, snapshots[1:])]
    )
    slope = r_squared = None
    if displacements.any():
        try:
            fit = fit_log_decay(displacements)
            slope, r_squared = fit.slope, fit.r_squared
        except EstimationError as e:
            LOG.warning(f"尾部位移无法拟合: {e}")

    final = result.final
    index, point, value = best_particle(final, result.config.objective)
    report = ConvergenceReport(
        tail_steps=steps,
        displacements=displacements,
        slope=slope,
        r_squared=r_squared,
        limit_index=index,
        limit_point=point,
        limit_value=value,
        final_diameter=max_pairwise_inf_distance(final),
        max_distance_to_limit=float(np.abs(final.states - point).max()),
        residual_drift=_residual_drift(displacements, slope),
    )
    LOG.info(f"收敛检查: {len(snapshots)} 个快照, 斜率 {slope}, 极限值 {value:.6g}")
    return report


__all__ = ["ConvergenceReport", "convergence_check"]

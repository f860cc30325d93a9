# 单调性审计

from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from batchcbo.core.dynamics import RunResult, best_objective_series
from batchcbo.utils.assets import InapplicableError, UsageError


@dataclass(frozen=True)
class AuditReport:
    passed: bool
    first_violation: Optional[int]
    checked: int

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "first_violation": self.first_violation, "checked": self.checked}


def audit_series(series) -> AuditReport:
    """严格检查序列不增, 不设容差; first_violation 为第一个 s[n] > s[n−1] 的 n"""
    series = np.asarray(series, dtype=float)
    increases = np.flatnonzero(series[1:] > series[:-1])
    if increases.size:
        return AuditReport(False, int(increases[0]) + 1, int(series.size))
    return AuditReport(True, None, int(series.size))


def monotonicity_audit(result: RunResult) -> AuditReport:
    """argmin 规则下 min_j L(x_n^j) 逐步不增"""
    if not result.config.rule.is_argmin:
        raise InapplicableError("单调性审计", f"代表点规则为 {result.config.rule.kind.value}, 只适用于 argmin")
    return audit_series(best_objective_series(result))


def diameter_violation_frequency(result: RunResult) -> float:
    """有任一坐标直径变大的步所占比例 (只记录, 不断言)"""
    if result.diameters is None:
        raise UsageError("本次运行没有记录直径序列 (record.diameters)")
    if result.steps == 0:
        return 0.0
    grew = (result.diameters[1:] > result.diameters[:-1]).any(axis=1)
    return float(grew.mean())


__all__ = ["AuditReport", "audit_series", "monotonicity_audit", "diameter_violation_frequency"]

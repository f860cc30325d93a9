# 一致点
#
# 批内权重与代表点 x̄^{S,*}: Gibbs 加权平均或批内最优粒子 (argmin).

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import softmax

from batchcbo.core.batching import BatchPartition
from batchcbo.core.ensemble import ParticleEnsemble
from batchcbo.core.objectives import ObjectiveFunction
from batchcbo.utils.assets import DEFAULT_BETA, ConfigurationError, RuleKind, UsageError


@dataclass(frozen=True)
class RepresentativeRule:
    """代表点规则: gibbs(β) 或 argmin"""

    kind: RuleKind
    beta: float = 0.0

    def __post_init__(self):
        kind = RuleKind(self.kind)
        beta = float(self.beta)
        if not np.isfinite(beta) or beta < 0:
            raise ConfigurationError(f"β 必须是非负有限数, 收到 {self.beta}", key="rule.beta")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "beta", beta if kind is RuleKind.GIBBS else 0.0)

    @classmethod
    def gibbs(cls, beta: float = DEFAULT_BETA) -> "RepresentativeRule":
        return cls(RuleKind.GIBBS, beta)

    @classmethod
    def argmin(cls) -> "RepresentativeRule":
        return cls(RuleKind.ARGMIN)

    @property
    def is_argmin(self) -> bool:
        return self.kind is RuleKind.ARGMIN

    def describe(self):
        if self.is_argmin:
            return {"name": self.kind.value}
        return {"name": self.kind.value, "beta": self.beta}


def gibbs_weights(values, beta: float) -> np.ndarray:
    """
    ω_j = e^{−β(L_j − L_min)} / Σ_k e^{−β(L_k − L_min)}

    先减去批内最小值, 大 β 时不会整体下溢.
    """
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise UsageError("权重需要非空的一维目标值向量")
    if beta < 0:
        raise ConfigurationError(f"β 必须非负, 收到 {beta}")
    return softmax(-beta * (values - values.min()))


def _argmin_index(indices: np.ndarray, values: np.ndarray) -> int:
    # indices 升序, np.argmin 返回第一个最小值, 即下标最小者 (严格相等判定平局)
    return int(indices[np.argmin(values[indices])])


def batch_weights(indices: Sequence[int], values: np.ndarray, rule: RepresentativeRule) -> np.ndarray:
    """批 S 上的权重向量 (与 S 的升序下标一一对应)"""
    indices = np.asarray(sorted(indices), dtype=np.int64)
    if indices.size == 0:
        raise UsageError("批不能为空")
    if rule.is_argmin:
        weights = np.zeros(indices.size)
        weights[np.searchsorted(indices, _argmin_index(indices, values))] = 1.0
        return weights
    return gibbs_weights(values[indices], rule.beta)


def representative(
    ensemble: ParticleEnsemble,
    S: Sequence[int],
    rule: RepresentativeRule,
    objective: Optional[ObjectiveFunction] = None,
    values: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    批 S 的代表点 x̄^{S,*}

    参数:
        values: 所有粒子的目标值, 已经算好时直接传入, 否则用 objective 计算
    返回:
        gibbs 为加权凸组合; argmin 为最优粒子状态的原样拷贝 (不做任何算术)
    """
    indices = np.asarray(sorted(int(i) for i in S), dtype=np.int64)
    if indices.size == 0:
        raise UsageError("代表点需要非空的批")
    if indices[0] < 0 or indices[-1] >= ensemble.n_particles:
        raise UsageError(f"批下标超出范围 [0, {ensemble.n_particles})")
    if values is None:
        if objective is None:
            raise UsageError("需要目标函数或预先计算的目标值")
        values = objective.evaluate_many(ensemble.states)
    values = np.asarray(values, dtype=float)
    if rule.is_argmin:
        return ensemble.states[_argmin_index(indices, values)].copy()
    weights = gibbs_weights(values[indices], rule.beta)
    return weights @ ensemble.states[indices]


def representatives(
    ensemble: ParticleEnsemble, partition: BatchPartition, rule: RepresentativeRule, values: np.ndarray
) -> np.ndarray:
    """每个粒子所在批的代表点, N×d; 同一批只算一次, 全部基于更新前的状态"""
    if partition.n_particles != ensemble.n_particles:
        raise ConfigurationError(
            f"划分覆盖 {partition.n_particles} 个粒子, 系综有 {ensemble.n_particles} 个"
        )
    out = np.empty_like(ensemble.states)
    for batch in partition.batches:
        out[list(batch)] = representative(ensemble, batch, rule, values=values)
    return out


def weight_matrix(partition: BatchPartition, values, rule: RepresentativeRule) -> np.ndarray:
    """W_n: 第 i 行是 [i]_n 上的权重, 批外元素恰为 0"""
    values = np.asarray(values, dtype=float)
    n = partition.n_particles
    W = np.zeros((n, n))
    for batch in partition.batches:
        idx = list(batch)
        W[np.ix_(idx, idx)] = batch_weights(batch, values, rule)[None, :]
    return W


def build_rule(name: str, beta: Optional[float] = None) -> RepresentativeRule:
    """配置文件里的 `rule` 段"""
    key = str(name).lower()
    if key == RuleKind.ARGMIN.value:
        return RepresentativeRule.argmin()
    if key == RuleKind.GIBBS.value:
        return RepresentativeRule.gibbs(DEFAULT_BETA if beta is None else beta)
    raise ConfigurationError(f"未知代表点规则: {name}", key="rule.name")


__all__ = [
    "RepresentativeRule",
    "gibbs_weights",
    "batch_weights",
    "representative",
    "representatives",
    "weight_matrix",
    "build_rule",
]

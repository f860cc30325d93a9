# 理论衰减率
#
# 由 (γ, N, m0, ζ, p_{m0}) 给出的一致性衰减指数下界和小噪声条件.

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from batchcbo.utils.assets import ConfigurationError


def _check(gamma: float, m0: int, zeta: float = 0.0, p: float = 0.0):
    if not 0.0 < gamma < 1.0:
        raise ConfigurationError(f"γ 必须在 (0, 1) 内, 收到 {gamma}")
    if m0 < 1:
        raise ConfigurationError(f"m0 必须 ≥ 1, 收到 {m0}")
    if zeta < 0 or p < 0:
        raise ConfigurationError(f"ζ 与 p_m0 必须非负, 收到 ζ={zeta}, p={p}")


def _drift_gain(gamma: float, m0: int, p: float) -> float:
    return gamma * (1.0 - gamma) ** (m0 - 1) * p


def _noise_cost(n_particles: int, m0: int, zeta: float) -> float:
    return 2.0 * ((1.0 + 2.0 * math.sqrt(n_particles) * zeta) ** m0 - 1.0)


def lambda0_limit(gamma: float, m0: int, p: float) -> float:
    """无噪声时路径衰减指数的极限 p_{m0}·γ(1−γ)^{m0−1}"""
    _check(gamma, m0, p=p)
    return _drift_gain(gamma, m0, p)


def lambda0_path(gamma: float, m0: int, G_values: Sequence[float]) -> float:
    """由一条轨迹的各窗口 𝒢_s 算出的随机指数 γ(1−γ)^{m0−1}·mean(𝒢_s)"""
    _check(gamma, m0)
    G_values = np.asarray(G_values, dtype=float)
    if G_values.size == 0:
        return 0.0
    return gamma * (1.0 - gamma) ** (m0 - 1) * float(G_values.mean())


def lambda1(gamma: float, n_particles: int, m0: int, zeta: float, p: float) -> float:
    """期望意义下的衰减率 (1/m0²)(γ(1−γ)^{m0−1}p − 2[(1+2√Nζ)^{m0} − 1])"""
    _check(gamma, m0, zeta, p)
    return (_drift_gain(gamma, m0, p) - _noise_cost(n_particles, m0, zeta)) / m0**2


def lambda2_sup(gamma: float, n_particles: int, m0: int, zeta: float, p: float) -> float:
    """几乎必然衰减率允许取值的上确界 (1/m0)(γ(1−γ)^{m0−1}p − 2[(1+2√Nζ)^{m0} − 1])"""
    _check(gamma, m0, zeta, p)
    return (_drift_gain(gamma, m0, p) - _noise_cost(n_particles, m0, zeta)) / m0


def positivity_condition(gamma: float, n_particles: int, m0: int, zeta: float, p: float) -> bool:
    """小噪声条件 γ(1−γ)^{m0−1}p > 2[(1+2√Nζ)^{m0} − 1]"""
    _check(gamma, m0, zeta, p)
    return _drift_gain(gamma, m0, p) > _noise_cost(n_particles, m0, zeta)


def critical_zeta(gamma: float, n_particles: int, m0: int, p: float, xtol: float = 1e-14) -> float:
    """小噪声条件恰好失效的 ζ (二分法); p = 0 时条件从不成立, 返回 0"""
    _check(gamma, m0, p=p)
    gain = _drift_gain(gamma, m0, p)
    if gain <= 0:
        return 0.0

    def margin(zeta: float) -> float:
        return gain - _noise_cost(n_particles, m0, zeta)

    upper = 1.0
    while margin(upper) > 0:
        upper *= 2.0
    return float(bisect(margin, 0.0, upper, xtol=xtol))


def homogeneous_rate(gamma: float, zeta: float) -> float:
    """全批同质噪声下的二阶矩收缩率 1 − (γ−1)² − ζ²"""
    return 1.0 - (gamma - 1.0) ** 2 - zeta**2


def homogeneous_condition(gamma: float, zeta: float) -> bool:
    """(γ−1)² + ζ² < 1"""
    return homogeneous_rate(gamma, zeta) > 0.0


@dataclass(frozen=True)
class RateReport:
    gamma: float
    n_particles: int
    m0: int
    zeta: float
    p_m0: float
    lambda0: float
    lambda1: float
    lambda2_sup: float
    condition_holds: bool
    critical_zeta: float
    homogeneous_rate: float
    homogeneous_condition: bool


def theoretical_rates(gamma: float, n_particles: int, m0: int, zeta: float, p: float) -> RateReport:
    """把所有理论量汇总成一份报告"""
    return RateReport(
        gamma=gamma,
        n_particles=n_particles,
        m0=m0,
        zeta=zeta,
        p_m0=p,
        lambda0=lambda0_limit(gamma, m0, p),
        lambda1=lambda1(gamma, n_particles, m0, zeta, p),
        lambda2_sup=lambda2_sup(gamma, n_particles, m0, zeta, p),
        condition_holds=positivity_condition(gamma, n_particles, m0, zeta, p),
        critical_zeta=critical_zeta(gamma, n_particles, m0, p),
        homogeneous_rate=homogeneous_rate(gamma, zeta),
        homogeneous_condition=homogeneous_condition(gamma, zeta),
    )


__all__ = [
    "RateReport",
    "lambda0_limit",
    "lambda0_path",
    "lambda1",
    "lambda2_sup",
    "positivity_condition",
    "critical_zeta",
    "homogeneous_rate",
    "homogeneous_condition",
    "theoretical_rates",
]

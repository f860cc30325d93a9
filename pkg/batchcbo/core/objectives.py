# 目标函数
#
# 求最小值的目标函数抽象, 以及基准测试用到的 Rastrigin / 球函数.

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from batchcbo.utils.assets import (
    DEFAULT_RASTRIGIN_OFFSET,
    DEFAULT_RASTRIGIN_SHIFT,
    ConfigurationError,
)


def _as_vector(x, dimension: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != dimension:
        raise ConfigurationError(f"{what} 维度为 {x.shape}, 期望 ({dimension},)")
    return x


def _check_pair(x, shift):
    x = np.asarray(x, dtype=float)
    shift = np.asarray(shift, dtype=float)
    if x.shape[-1] != shift.shape[-1] or shift.ndim != 1:
        raise ConfigurationError(f"维度不匹配: x{x.shape} 与平移向量 {shift.shape}")
    return x, shift


@dataclass(frozen=True)
class RastriginSpec:
    """Rastrigin 参数: 全局极小点 B 与偏移 C"""

    dimension: int
    shift: np.ndarray
    offset: float = DEFAULT_RASTRIGIN_OFFSET

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigurationError(f"维度必须为正, 收到 {self.dimension}")
        shift = _as_vector(self.shift, self.dimension, "Rastrigin 平移 B")
        shift.setflags(write=False)
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def default(cls, dimension: int) -> "RastriginSpec":
        """B_i = 1, C = 0"""
        return cls(dimension, np.full(dimension, DEFAULT_RASTRIGIN_SHIFT))


def rastrigin(x, spec: RastriginSpec):
    """
    L(x) = (1/d) Σ_i [(x_i − B_i)² − 10 cos(2π(x_i − B_i)) + 10] + C

    x 可以是单个 d 维向量, 也可以是每行一个点的 (N, d) 矩阵.
    """
    x, shift = _check_pair(x, spec.shift)
    z = x - shift
    terms = z**2 - 10.0 * np.cos(2.0 * np.pi * z) + 10.0
    values = terms.mean(axis=-1) + spec.offset
    return float(values) if values.ndim == 0 else values


def sphere(x, shift):
    """Σ_i (x_i − shift_i)²"""
    x, shift = _check_pair(x, shift)
    values = ((x - shift) ** 2).sum(axis=-1)
    return float(values) if values.ndim == 0 else values


class ObjectiveFunction(ABC):
    """
    目标函数基类

    子类实现 `_evaluate_rows`, 对 (N, d) 矩阵逐行求值.
    `evaluations` 统计求值次数 (只用于成本报告, 不参与算法).
    """

    name: str = "objective"

    def __init__(self, dimension: int):
        if int(dimension) < 1:
            raise ConfigurationError(f"维度必须为正, 收到 {dimension}")
        self.dimension = int(dimension)
        self.evaluations = 0

    @abstractmethod
    def _evaluate_rows(self, points: np.ndarray) -> np.ndarray: ...

    @property
    def minimizer(self) -> Optional[np.ndarray]:
        """已知的全局极小点, 未知时为 None"""
        return None

    def __call__(self, x) -> float:
        x = _as_vector(x, self.dimension, "输入点")
        return float(self.evaluate_many(x[None, :])[0])

    def evaluate_many(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[1] != self.dimension:
            raise ConfigurationError(
                f"输入矩阵形状为 {points.shape}, 期望 (N, {self.dimension})"
            )
        self.evaluations += points.shape[0]
        return np.asarray(self._evaluate_rows(points), dtype=float)

    def describe(self) -> Dict[str, Any]:
        return {"name": self.name, "dimension": self.dimension}


class Rastrigin(ObjectiveFunction):
    name = "rastrigin"

    def __init__(self, spec: RastriginSpec):
        super().__init__(spec.dimension)
        self.spec = spec

    @property
    def minimizer(self) -> np.ndarray:
        return self.spec.shift

    def _evaluate_rows(self, points):
        return rastrigin(points, self.spec)

    def describe(self):
        return {
            **super().describe(),
            "shift": self.spec.shift.tolist(),
            "offset": self.spec.offset,
        }


class Sphere(ObjectiveFunction):
    name = "sphere"

    def __init__(self, dimension: int, shift=None):
        super().__init__(dimension)
        shift = np.zeros(self.dimension) if shift is None else shift
        self.shift = _as_vector(shift, self.dimension, "球函数平移")
        self.shift.setflags(write=False)

    @property
    def minimizer(self) -> np.ndarray:
        return self.shift

    def _evaluate_rows(self, points):
        return sphere(points, self.shift)

    def describe(self):
        return {**super().describe(), "shift": self.shift.tolist()}


def _broadcast_shift(value, dimension: int) -> np.ndarray:
    if np.isscalar(value):
        return np.full(dimension, float(value))
    return _as_vector(value, dimension, "shift")


def build_objective(name: str, dimension: int, params: Optional[Dict[str, Any]] = None) -> ObjectiveFunction:
    """
    按名字和参数构造目标函数 (配置文件里的 `objective` 段)

    参数:
        name: "rastrigin" 或 "sphere"
        dimension: 维度 d
        params: rastrigin 接受 shift (标量或向量) 与 offset; sphere 接受 shift
    """
    params = dict(params or {})
    key = str(name).lower()
    if key == "rastrigin":
        shift = _broadcast_shift(params.pop("shift", DEFAULT_RASTRIGIN_SHIFT), dimension)
        offset = params.pop("offset", DEFAULT_RASTRIGIN_OFFSET)
        objective = Rastrigin(RastriginSpec(dimension, shift, offset))
    elif key == "sphere":
        shift = _broadcast_shift(params.pop("shift", 0.0), dimension)
        objective = Sphere(dimension, shift)
    else:
        raise ConfigurationError(f"未知目标函数: {name}", key="objective.name")
    if params:
        raise ConfigurationError(
            f"目标函数 {key} 不认识的参数: {', '.join(sorted(params))}", key="objective"
        )
    return objective


__all__ = [
    "ObjectiveFunction",
    "RastriginSpec",
    "Rastrigin",
    "Sphere",
    "rastrigin",
    "sphere",
    "build_objective",
]

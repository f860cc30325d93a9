# 粒子系综
#
# 状态矩阵 X_n (行 = 粒子, 列 = 坐标), 列视图与直径, 以及可复现的随机流.

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Tuple, Union

import numpy as np

from batchcbo.utils.assets import ConfigurationError, UsageError
from batchcbo.utils.file_io import read_csv, write_csv


@dataclass(frozen=True)
class RngStream:
    """
    由 (基础种子, 流编号) 确定的随机流

    用 numpy 的 SeedSequence 计数式派生: 同样的 (seed, stream_id, namespace)
    总是给出相同的样本序列, 不同流编号之间统计独立, 与执行顺序无关.
    namespace 用来区分基准表中的 (d, P) 单元.
    """

    base_seed: int
    stream_id: int = 0
    namespace: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.stream_id < 0:
            raise ConfigurationError(f"流编号必须非负, 收到 {self.stream_id}")
        object.__setattr__(self, "base_seed", int(self.base_seed) & 0xFFFFFFFFFFFFFFFF)
        object.__setattr__(self, "namespace", tuple(int(k) for k in self.namespace))

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            self.base_seed, spawn_key=(*self.namespace, int(self.stream_id))
        )

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))

    def child(self, stream_id: int) -> "RngStream":
        """同一命名空间下的另一条流"""
        return RngStream(self.base_seed, stream_id, self.namespace)


@dataclass(frozen=True)
class ParticleEnsemble:
    """N 个粒子在 R^d 中的状态, 以及当前步数 n"""

    states: np.ndarray
    step: int = 0

    def __post_init__(self):
        states = np.array(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] < 1 or states.shape[1] < 1:
            raise ConfigurationError(f"状态矩阵必须是 N×d (N, d ≥ 1), 收到形状 {states.shape}")
        if not np.all(np.isfinite(states)):
            raise ConfigurationError("状态矩阵包含非有限值")
        if self.step < 0:
            raise ConfigurationError(f"步数必须非负, 收到 {self.step}")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def n_particles(self) -> int:
        return self.states.shape[0]

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    def column(self, l: int) -> np.ndarray:
        return column(self, l)

    def with_states(self, states: np.ndarray, step: int) -> "ParticleEnsemble":
        return ParticleEnsemble(states, step)

    def save_csv(self, path: Union[str, Path], metadata=None) -> Path:
        """一行一个粒子, d 列, 元数据行中带步数"""
        header = [f"x{k}" for k in range(self.dimension)]
        meta = {"step": self.step, **(metadata or {})}
        return write_csv(path, header, self.states.tolist(), meta)

    @classmethod
    def load_csv(cls, path: Union[str, Path]) -> "ParticleEnsemble":
        metadata, _, values = read_csv(path)
        return cls(values, int(metadata.get("step", 0)))


def column(ensemble: ParticleEnsemble, l: int) -> np.ndarray:
    """第 l 个坐标在所有粒子上的取值 (x^{0,l}, …, x^{N-1,l})"""
    if not 0 <= l < ensemble.dimension:
        raise UsageError(f"坐标下标 {l} 超出范围 [0, {ensemble.dimension})")
    return ensemble.states[:, l].copy()


def diameter(v) -> float:
    """𝒟(v) = max_i v_i − min_i v_i"""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise UsageError("空向量没有直径")
    return float(v.max() - v.min())


def column_diameters(ensemble_or_states) -> np.ndarray:
    """每个坐标列的直径, 长度为 d"""
    states = getattr(ensemble_or_states, "states", ensemble_or_states)
    states = np.asarray(states, dtype=float)
    return states.max(axis=0) - states.min(axis=0)


def max_pairwise_inf_distance(ensemble: ParticleEnsemble) -> float:
    """max_{i,j} ‖x^i − x^j‖_∞, 等于各坐标直径的最大值"""
    return float(column_diameters(ensemble).max())


def sample_initial(
    n_particles: int,
    dimension: int,
    lower: Union[float, Sequence[float]],
    upper: Union[float, Sequence[float]],
    rng: np.random.Generator,
) -> ParticleEnsemble:
    """在盒子 [lower, upper] 上逐坐标独立均匀采样初始系综"""
    if n_particles < 1 or dimension < 1:
        raise ConfigurationError(f"N 与 d 必须为正, 收到 N={n_particles}, d={dimension}")
    try:
        lower = np.broadcast_to(np.asarray(lower, dtype=float), (dimension,))
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (dimension,))
    except ValueError:
        raise ConfigurationError(f"初始盒子的维度与 d={dimension} 不一致")
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))) or np.any(lower >= upper):
        raise ConfigurationError(f"初始盒子无效: lower={lower.tolist()}, upper={upper.tolist()}")
    states = rng.uniform(lower, upper, size=(n_particles, dimension))
    return ParticleEnsemble(states, 0)


__all__ = [
    "RngStream",
    "ParticleEnsemble",
    "column",
    "diameter",
    "column_diameters",
    "max_pairwise_inf_distance",
    "sample_initial",
]

# 动力学
#
# 噪声模型, 广义离散 CBO 更新步, 三种离散格式的参数映射, 运行循环与停止准则.

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from batchcbo.core.batching import BatchPartition, PartitionSchedule, sample_partition
from batchcbo.core.consensus import RepresentativeRule, representatives, weight_matrix
from batchcbo.core.ensemble import (
    ParticleEnsemble,
    RngStream,
    column_diameters,
    sample_initial,
)
from batchcbo.core.objectives import ObjectiveFunction
from batchcbo.core.transitions import TransitionRecord
from batchcbo.utils.assets import (
    DEFAULT_BASE_SEED,
    DEFAULT_BOX,
    DEFAULT_MAX_STEPS,
    DEFAULT_TOLERANCE,
    TRANSITION_RECORDING_CAP,
    ConfigurationError,
    DivergenceError,
    NoiseKind,
    ResourceLimitError,
    SchemeKind,
    Termination,
    UsageError,
)
from batchcbo.utils.file_io import write_csv
from batchcbo.utils.logger import get_log

LOG = get_log("Dynamics")


@dataclass(frozen=True)
class NoiseModel:
    """
    η_n^{i,l} 的生成器

    所有变体都由标准正态 Z 变换得到, 均值为 0.
    heterogeneous 为 True 时 (i, l) 各自独立; 否则每个坐标 l 一份, 所有粒子共享.
    """

    kind: NoiseKind = NoiseKind.NONE
    zeta: float = 0.0
    lam: float = 0.0
    sigma: float = 0.0
    h: float = 0.0
    heterogeneous: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        for name in ("zeta", "lam", "sigma", "h"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise ConfigurationError(f"{name} 必须是非负有限数, 收到 {value}", key=f"scheme.{name}")
            object.__setattr__(self, name, value)
        if self.kind in (NoiseKind.SCHEME_A, NoiseKind.SCHEME_B, NoiseKind.SCHEME_C) and self.h <= 0:
            raise ConfigurationError(f"步长 h 必须为正, 收到 {self.h}", key="scheme.h")

    @classmethod
    def none(cls) -> "NoiseModel":
        return cls(NoiseKind.NONE)

    @classmethod
    def gaussian(cls, zeta: float, heterogeneous: bool = True) -> "NoiseModel":
        return cls(NoiseKind.GAUSSIAN, zeta=zeta, heterogeneous=heterogeneous)

    @property
    def effective_zeta(self) -> float:
        """η 的标准差 (即满足 𝔼|η|² ≤ ζ² 的最小 ζ)"""
        if self.kind is NoiseKind.GAUSSIAN:
            return self.zeta
        if self.kind is NoiseKind.SCHEME_A:
            return self.sigma * math.sqrt(self.h)
        if self.kind is NoiseKind.SCHEME_B:
            return math.exp(-self.lam * self.h) * self.sigma * math.sqrt(self.h)
        if self.kind is NoiseKind.SCHEME_C:
            return math.exp(-self.lam * self.h) * math.sqrt(math.expm1(self.sigma**2 * self.h))
        return 0.0

    def from_normals(self, Z) -> np.ndarray:
        """把标准正态样本映射为 η; 直接格式与广义格式共用同一组 Z 时轨迹一致"""
        Z = np.asarray(Z, dtype=float)
        if self.kind is NoiseKind.GAUSSIAN:
            return self.zeta * Z
        root_h = math.sqrt(self.h)
        if self.kind is NoiseKind.SCHEME_A:
            return self.sigma * root_h * Z
        decay = math.exp(-self.lam * self.h)
        if self.kind is NoiseKind.SCHEME_B:
            return decay * self.sigma * root_h * Z
        if self.kind is NoiseKind.SCHEME_C:
            # 𝔼 exp(σ√h Z) = e^{σ²h/2} 与漂移修正相消, 均值为 0
            return decay - np.exp(-(self.lam + 0.5 * self.sigma**2) * self.h + self.sigma * root_h * Z)
        return np.zeros_like(Z)

    def normals(self, rng: np.random.Generator, n_particles: int, dimension: int) -> np.ndarray:
        """按异质/同质约定抽取 N×d 的标准正态矩阵"""
        if self.heterogeneous:
            return rng.standard_normal((n_particles, dimension))
        return np.broadcast_to(rng.standard_normal(dimension), (n_particles, dimension)).copy()

    def draw(self, rng: np.random.Generator, n_particles: int, dimension: int) -> np.ndarray:
        if self.kind is NoiseKind.NONE or self.effective_zeta == 0.0:
            return np.zeros((n_particles, dimension))
        return self.from_normals(self.normals(rng, n_particles, dimension))

    def describe(self):
        out = {"kind": self.kind.value, "heterogeneous": self.heterogeneous}
        if self.kind is NoiseKind.GAUSSIAN:
            out["zeta"] = self.zeta
        elif self.kind is not NoiseKind.NONE:
            out.update(lam=self.lam, sigma=self.sigma, h=self.h)
        out["effective_zeta"] = self.effective_zeta
        return out


@dataclass(frozen=True)
class SchemeConfig:
    """离散格式: 广义形式 (γ, 噪声) 或 Model A/B/C (λ, σ, h)"""

    kind: SchemeKind = SchemeKind.GENERALIZED
    gamma: Optional[float] = None
    noise: NoiseModel = field(default_factory=NoiseModel.none)
    lam: float = 0.0
    sigma: float = 0.0
    h: float = 0.0
    heterogeneous: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        if self.kind is SchemeKind.GENERALIZED and self.gamma is None:
            raise ConfigurationError("广义格式需要给出 γ", key="scheme.gamma")

    @classmethod
    def generalized(cls, gamma: float, noise: Optional[NoiseModel] = None) -> "SchemeConfig":
        return cls(SchemeKind.GENERALIZED, gamma=gamma, noise=noise or NoiseModel.none())

    @classmethod
    def model(cls, kind: Union[str, SchemeKind], lam: float, sigma: float, h: float, heterogeneous: bool = True):
        return cls(SchemeKind(kind), lam=lam, sigma=sigma, h=h, heterogeneous=heterogeneous)

    def describe(self):
        gamma, noise = step_params(self)
        out = {"kind": self.kind.value, "gamma": gamma, "noise": noise.describe()}
        if self.kind is not SchemeKind.GENERALIZED:
            out.update(lam=self.lam, sigma=self.sigma, h=self.h)
        return out


_SCHEME_NOISE = {
    SchemeKind.MODEL_A: NoiseKind.SCHEME_A,
    SchemeKind.MODEL_B: NoiseKind.SCHEME_B,
    SchemeKind.MODEL_C: NoiseKind.SCHEME_C,
}


def step_params(scheme: SchemeConfig) -> Tuple[float, NoiseModel]:
    """
    把格式映射为 (γ, 噪声模型)

    model_a: γ = λh, η = σ√h Z
    model_b: γ = 1 − e^{−λh}, η = e^{−λh}σ√h Z
    model_c: γ = 1 − e^{−λh}, η = e^{−λh} − exp(−(λ+σ²/2)h + σ√h Z)
    """
    if scheme.kind is SchemeKind.GENERALIZED:
        gamma, noise = float(scheme.gamma), scheme.noise
    else:
        noise = NoiseModel(
            _SCHEME_NOISE[scheme.kind],
            lam=scheme.lam,
            sigma=scheme.sigma,
            h=scheme.h,
            heterogeneous=scheme.heterogeneous,
        )
        if scheme.kind is SchemeKind.MODEL_A:
            gamma = noise.lam * noise.h
        else:
            gamma = -math.expm1(-noise.lam * noise.h)
    if not 0.0 < gamma < 1.0:
        raise ConfigurationError(f"映射后的 γ={gamma} 不在 (0, 1) 内", key="scheme")
    return gamma, noise


def _evaluate(objective: ObjectiveFunction, ensemble: ParticleEnsemble, values) -> np.ndarray:
    if values is None:
        return objective.evaluate_many(ensemble.states)
    return np.asarray(values, dtype=float)


def _check_gamma(gamma: float):
    if not 0.0 < gamma < 1.0:
        raise ConfigurationError(f"γ 必须在 (0, 1) 内, 收到 {gamma}")


def _finish_step(ensemble: ParticleEnsemble, states: np.ndarray) -> ParticleEnsemble:
    if not np.all(np.isfinite(states)):
        raise DivergenceError(ensemble.step + 1)
    return ParticleEnsemble(states, ensemble.step + 1)


def step(
    ensemble: ParticleEnsemble,
    partition: BatchPartition,
    rule: RepresentativeRule,
    objective: ObjectiveFunction,
    gamma: float,
    eta,
    values: Optional[np.ndarray] = None,
) -> ParticleEnsemble:
    """
    同步地执行一步

    x_{n+1}^{i,l} = x_n^{i,l} − (γ + η_n^{i,l})(x_n^{i,l} − x̄_n^{[i],l})

    写成差分形式: 代表点就是自身时 (argmin 批最优粒子, N=1) 状态逐位不变.
    """
    _check_gamma(gamma)
    eta = np.broadcast_to(np.asarray(eta, dtype=float), ensemble.states.shape)
    values = _evaluate(objective, ensemble, values)
    xbar = representatives(ensemble, partition, rule, values)
    states = ensemble.states - (gamma + eta) * (ensemble.states - xbar)
    return _finish_step(ensemble, states)


def scheme_step(
    ensemble: ParticleEnsemble,
    partition: BatchPartition,
    rule: RepresentativeRule,
    objective: ObjectiveFunction,
    scheme: SchemeConfig,
    Z,
    values: Optional[np.ndarray] = None,
) -> ParticleEnsemble:
    """按 Model A/B/C 的原始写法执行一步, Z 为标准正态样本 (N×d, 或 d 维共享)"""
    if scheme.kind is SchemeKind.GENERALIZED:
        raise UsageError("广义格式没有单独的原始写法, 请用 step")
    step_params(scheme)
    Z = np.broadcast_to(np.asarray(Z, dtype=float), ensemble.states.shape)
    values = _evaluate(objective, ensemble, values)
    x = ensemble.states
    xbar = representatives(ensemble, partition, rule, values)
    lam, sigma, h = scheme.lam, scheme.sigma, scheme.h
    if scheme.kind is SchemeKind.MODEL_A:
        states = x - lam * h * (x - xbar) - (x - xbar) * sigma * math.sqrt(h) * Z
    elif scheme.kind is SchemeKind.MODEL_B:
        x_hat = xbar + math.exp(-lam * h) * (x - xbar)
        states = x_hat - (x_hat - xbar) * sigma * math.sqrt(h) * Z
    else:
        states = xbar + (x - xbar) * np.exp(-(lam + 0.5 * sigma**2) * h + sigma * math.sqrt(h) * Z)
    return _finish_step(ensemble, states)


@dataclass(frozen=True)
class RecordOptions:
    """运行中记录哪些序列"""

    diameters: bool = True
    best_objective: bool = True
    displacement: bool = True
    snapshots: bool = False
    snapshot_every: int = 1
    transitions: bool = False
    schedule: bool = False

    def __post_init__(self):
        if self.snapshot_every < 1:
            raise ConfigurationError(f"snapshot_every 必须 ≥ 1, 收到 {self.snapshot_every}", key="record")


@dataclass(frozen=True, eq=False)
class RunConfig:
    n_particles: int
    dimension: int
    objective: ObjectiveFunction
    rule: RepresentativeRule
    scheme: SchemeConfig
    batch_size: int
    max_steps: int = DEFAULT_MAX_STEPS
    tolerance: float = DEFAULT_TOLERANCE
    seed: int = DEFAULT_BASE_SEED
    record: RecordOptions = field(default_factory=RecordOptions)
    box: Tuple = DEFAULT_BOX
    initial: Optional[np.ndarray] = None
    stream_id: int = 0
    namespace: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.n_particles < 1 or self.dimension < 1:
            raise ConfigurationError(f"N 与 d 必须为正, 收到 N={self.n_particles}, d={self.dimension}")
        if not 1 <= self.batch_size <= self.n_particles:
            raise ConfigurationError(
                f"批大小必须满足 1 ≤ P ≤ N, 收到 P={self.batch_size}, N={self.n_particles}", key="run.batch_size"
            )
        if self.max_steps < 1:
            raise ConfigurationError(f"最大步数必须 ≥ 1, 收到 {self.max_steps}", key="run.max_steps")
        if not self.tolerance > 0:
            raise ConfigurationError(f"停止容差 ε 必须为正, 收到 {self.tolerance}", key="run.tolerance")
        if self.objective.dimension != self.dimension:
            raise ConfigurationError(
                f"目标函数维度 {self.objective.dimension} 与 d={self.dimension} 不一致", key="objective"
            )
        if self.initial is not None:
            initial = np.asarray(self.initial, dtype=float)
            if initial.shape != (self.n_particles, self.dimension):
                raise ConfigurationError(
                    f"初始状态形状 {initial.shape} 与 (N, d)=({self.n_particles}, {self.dimension}) 不一致",
                    key="run.initial",
                )
        if self.record.transitions and self.n_particles > TRANSITION_RECORDING_CAP:
            raise ResourceLimitError(
                "记录转移矩阵", f"N={self.n_particles}", TRANSITION_RECORDING_CAP, "TRANSITION_RECORDING_CAP"
            )
        step_params(self.scheme)

    def stream(self) -> RngStream:
        return RngStream(self.seed, self.stream_id, self.namespace)

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class RunResult:
    """
    一次运行的结果, 完成后不可修改

    序列约定 (未记录时为 None):
        diameters: (steps+1, d), 第 n 行为 𝒟(𝔵_n^l)
        best_values: (steps+1,), min_j L(x_n^j)
        displacements: (steps,), Σ_i ‖x_{n+1}^i − x_n^i‖²
        sup_displacements: (steps,), max_i ‖x_{n+1}^i − x_n^i‖_∞
    """

    config: RunConfig
    initial: ParticleEnsemble
    final: ParticleEnsemble
    steps: int
    reason: Termination
    gamma: float
    noise: NoiseModel
    diameters: Optional[np.ndarray] = None
    best_values: Optional[np.ndarray] = None
    displacements: Optional[np.ndarray] = None
    sup_displacements: Optional[np.ndarray] = None
    snapshots: Tuple[ParticleEnsemble, ...] = ()
    schedule: Optional[PartitionSchedule] = None
    transitions: Tuple[TransitionRecord, ...] = ()
    evaluations: int = 0

    @property
    def diverged(self) -> bool:
        return self.reason is Termination.DIVERGED

    @property
    def n_particles(self) -> int:
        return self.final.n_particles

    @property
    def dimension(self) -> int:
        return self.final.dimension


class _Recorder:
    """运行期间的可变缓冲, 结束时冻结为 RunResult"""

    def __init__(self, config: RunConfig, initial: ParticleEnsemble, values: np.ndarray):
        self.options = config.record
        self.diameters = [column_diameters(initial)] if self.options.diameters else None
        self.best = [float(values.min())] if self.options.best_objective else None
        self.displacements = [] if self.options.displacement else None
        self.sup_displacements = [] if self.options.displacement else None
        self.snapshots = [initial] if self.options.snapshots else None
        self.partitions = [] if (self.options.schedule or self.options.transitions) else None
        self.transitions = [] if self.options.transitions else None

    def before_step(self, partition: BatchPartition, record: Optional[TransitionRecord]):
        if self.partitions is not None:
            self.partitions.append(partition)
        if self.transitions is not None:
            self.transitions.append(record)

    def after_step(self, old: ParticleEnsemble, new: ParticleEnsemble, values: np.ndarray):
        delta = new.states - old.states
        if self.diameters is not None:
            self.diameters.append(column_diameters(new))
        if self.best is not None:
            self.best.append(float(values.min()))
        if self.displacements is not None:
            self.displacements.append(float(np.sum(delta**2)))
            self.sup_displacements.append(float(np.abs(delta).max()))
        if self.snapshots is not None and new.step % self.options.snapshot_every == 0:
            self.snapshots.append(new)

    def freeze(self, config, initial, final, steps, reason, gamma, noise, evaluations) -> RunResult:
        def arr(series):
            if series is None:
                return None
            out = np.array(series, dtype=float)
            out.setflags(write=False)
            return out

        return RunResult(
            config=config,
            initial=initial,
            final=final,
            steps=steps,
            reason=reason,
            gamma=gamma,
            noise=noise,
            diameters=arr(self.diameters),
            best_values=arr(self.best),
            displacements=arr(self.displacements),
            sup_displacements=arr(self.sup_displacements),
            snapshots=tuple(self.snapshots or ()),
            schedule=PartitionSchedule(tuple(self.partitions), 0) if self.partitions is not None else None,
            transitions=tuple(self.transitions or ()),
            evaluations=evaluations,
        )


def run(config: RunConfig, rng: Optional[np.random.Generator] = None) -> RunResult:
    """
    迭代 采样划分 → 抽噪声 → 更新, 直到 Σ_i ‖x_{n+1}^i − x_n^i‖² < ε 或 n = T

    rng 缺省时由 (seed, stream_id, namespace) 派生. 发散时抛出 DivergenceError,
    其 partial 字段带有发散前的结果.
    """
    rng = rng if rng is not None else config.stream().generator()
    objective = config.objective
    evaluations_before = objective.evaluations
    gamma, noise = step_params(config.scheme)
    N, d, P = config.n_particles, config.dimension, config.batch_size

    if config.initial is not None:
        ensemble = ParticleEnsemble(config.initial, 0)
    else:
        ensemble = sample_initial(N, d, config.box[0], config.box[1], rng)
    initial = ensemble
    values = objective.evaluate_many(ensemble.states)
    recorder = _Recorder(config, initial, values)
    reason = Termination.MAX_STEPS

    for n in range(config.max_steps):
        partition = sample_partition(N, P, rng)
        eta = noise.draw(rng, N, d)
        record = None
        if config.record.transitions:
            record = TransitionRecord(n, weight_matrix(partition, values, config.rule), eta, gamma)
        recorder.before_step(partition, record)
        try:
            new = step(ensemble, partition, config.rule, objective, gamma, eta, values)
        except DivergenceError as e:
            LOG.warning(f"第 {e.step} 步发散 (seed={config.seed}, stream={config.stream_id})")
            e.partial = recorder.freeze(
                config, initial, ensemble, n, Termination.DIVERGED, gamma, noise,
                objective.evaluations - evaluations_before,
            )
            raise
        displacement = float(np.sum((new.states - ensemble.states) ** 2))
        values = objective.evaluate_many(new.states)
        recorder.after_step(ensemble, new, values)
        ensemble = new
        if displacement < config.tolerance:
            reason = Termination.TOLERANCE
            break

    LOG.debug(f"运行结束: {ensemble.step} 步, 原因 {reason.value}")
    return recorder.freeze(
        config, initial, ensemble, ensemble.step, reason, gamma, noise,
        objective.evaluations - evaluations_before,
    )


def best_objective_series(result: RunResult) -> np.ndarray:
    """每步的 min_j L(x_n^j), 含第 0 步"""
    if result.best_values is None:
        raise UsageError("本次运行没有记录最优目标值序列 (record.best_objective)")
    return result.best_values


def best_particle(ensemble: ParticleEnsemble, objective: ObjectiveFunction) -> Tuple[int, np.ndarray, float]:
    """下标最小的最优粒子 (i, x^i, L(x^i))"""
    values = objective.evaluate_many(ensemble.states)
    i = int(np.argmin(values))
    return i, ensemble.states[i].copy(), float(values[i])


def series_table(result: RunResult) -> Tuple[Sequence[str], list]:
    """序列 CSV 的列名和行: step, diameter_l, best_objective, displacement"""
    header = ["step"]
    columns = []
    if result.diameters is not None:
        header += [f"diameter_{l}" for l in range(result.dimension)]
        columns.append(result.diameters)
    if result.best_values is not None:
        header.append("best_objective")
        columns.append(result.best_values[:, None])
    if result.displacements is not None:
        header.append("displacement")
        # 第 0 步没有位移
        columns.append(np.concatenate([[np.nan], result.displacements])[:, None])
    rows = []
    for n in range(result.steps + 1):
        rows.append([n] + [float(v) for c in columns for v in c[n]])
    return header, rows


def save_series(result: RunResult, path: Union[str, Path], metadata=None) -> Path:
    header, rows = series_table(result)
    return write_csv(path, header, rows, metadata)


__all__ = [
    "NoiseModel",
    "SchemeConfig",
    "RecordOptions",
    "RunConfig",
    "RunResult",
    "step_params",
    "step",
    "scheme_step",
    "run",
    "best_objective_series",
    "best_particle",
    "series_table",
    "save_series",
]

# 成功率基准
#
# 在 (维度 d, 批大小 P) 网格上重复运行, 统计成功率与平均步数.
# 每个重复使用由 (seed, (d, P), 重复编号) 派生的独立随机流, 结果与并行度无关.

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import psutil

from batchcbo.core.consensus import RepresentativeRule
from batchcbo.core.dynamics import RecordOptions, RunConfig, RunResult, SchemeConfig, best_particle, run
from batchcbo.core.objectives import ObjectiveFunction, build_objective
from batchcbo.utils.assets import (
    DEFAULT_BASE_SEED,
    DEFAULT_BATCH_SIZES,
    DEFAULT_BOX,
    DEFAULT_DIMENSIONS,
    DEFAULT_MAX_STEPS,
    DEFAULT_N_PARTICLES,
    DEFAULT_REPLICATES,
    DEFAULT_SUCCESS_THRESHOLD,
    DEFAULT_TOLERANCE,
    CBOError,
    ConfigurationError,
    DivergenceError,
)
from batchcbo.utils.logger import get_log, tqdm

LOG = get_log("Benchmark")


def default_jobs() -> int:
    """默认并行度: 物理核数"""
    return psutil.cpu_count(logical=False) or 1


def success(result: RunResult, minimizer, delta: float, objective: Optional[ObjectiveFunction] = None) -> bool:
    """
    终止时下标最小的最优粒子是否满足 ‖x − B‖_∞ < δ

    发散的运行一律判为失败.
    """
    if not delta > 0:
        raise ConfigurationError(f"成功阈值 δ 必须为正, 收到 {delta}")
    if result.diverged:
        return False
    objective = objective or result.config.objective
    _, x, _ = best_particle(result.final, objective)
    return bool(np.max(np.abs(x - np.asarray(minimizer, dtype=float))) < delta)


def success_rate_by_threshold(
    results: Sequence[RunResult], minimizer, thresholds: Sequence[float], objective: Optional[ObjectiveFunction] = None
) -> List[float]:
    """不同 δ 下的成功率, 对 δ 单调不减"""
    if not results:
        raise ConfigurationError("至少需要一次运行")
    return [sum(success(r, minimizer, delta, objective) for r in results) / len(results) for delta in thresholds]


@dataclass(frozen=True)
class BenchmarkConfig:
    """基准网格: 每个 (d, P) 单元重复 replicates 次"""

    rule: RepresentativeRule
    scheme: SchemeConfig
    n_particles: int = DEFAULT_N_PARTICLES
    dimensions: Tuple[int, ...] = DEFAULT_DIMENSIONS
    batch_sizes: Tuple[int, ...] = DEFAULT_BATCH_SIZES
    replicates: int = DEFAULT_REPLICATES
    delta: float = DEFAULT_SUCCESS_THRESHOLD
    max_steps: int = DEFAULT_MAX_STEPS
    tolerance: float = DEFAULT_TOLERANCE
    box: Tuple[float, float] = DEFAULT_BOX
    seed: int = DEFAULT_BASE_SEED
    objective_name: str = "rastrigin"
    objective_params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigurationError(f"重复次数必须 ≥ 1, 收到 {self.replicates}", key="benchmark.replicates")
        if not self.delta > 0:
            raise ConfigurationError(f"成功阈值 δ 必须为正, 收到 {self.delta}", key="benchmark.delta")
        if not self.dimensions or not self.batch_sizes:
            raise ConfigurationError("维度列表和批大小列表不能为空", key="benchmark")
        for P in self.batch_sizes:
            if not 1 <= P <= self.n_particles:
                raise ConfigurationError(f"批大小 {P} 不在 [1, {self.n_particles}] 内", key="benchmark.batch_sizes")
        object.__setattr__(self, "dimensions", tuple(int(d) for d in self.dimensions))
        object.__setattr__(self, "batch_sizes", tuple(int(P) for P in self.batch_sizes))

    def objective(self, dimension: int) -> ObjectiveFunction:
        return build_objective(self.objective_name, dimension, self.objective_params)

    def run_config(self, dimension: int, batch_size: int, replicate: int) -> RunConfig:
        """(d, P) 单元中第 replicate 次重复的运行配置; 只记录统计需要的量"""
        return RunConfig(
            n_particles=self.n_particles,
            dimension=dimension,
            objective=self.objective(dimension),
            rule=self.rule,
            scheme=self.scheme,
            batch_size=batch_size,
            max_steps=self.max_steps,
            tolerance=self.tolerance,
            seed=self.seed,
            record=RecordOptions(diameters=False, best_objective=False, displacement=False),
            box=self.box,
            stream_id=replicate,
            namespace=(dimension, batch_size),
        )


@dataclass(frozen=True)
class ReplicateOutcome:
    dimension: int
    batch_size: int
    replicate: int
    success: bool
    steps: int
    diverged: bool
    error: Optional[str]
    wall_time: float


def _run_replicate(task: Tuple[BenchmarkConfig, int, int, int]) -> ReplicateOutcome:
    config, d, P, r = task
    started = time.perf_counter()
    try:
        run_config = config.run_config(d, P, r)
        result = run(run_config)
        ok = success(result, run_config.objective.minimizer, config.delta, run_config.objective)
        return ReplicateOutcome(d, P, r, ok, result.steps, False, None, time.perf_counter() - started)
    except DivergenceError as e:
        return ReplicateOutcome(d, P, r, False, e.step, True, None, time.perf_counter() - started)
    except CBOError as e:
        return ReplicateOutcome(d, P, r, False, 0, False, str(e), time.perf_counter() - started)


@dataclass(frozen=True)
class BenchmarkCell:
    dimension: int
    batch_size: int
    replicates: int
    successes: int
    mean_steps: float
    divergent: int
    errors: Tuple[str, ...]
    wall_time: float

    @property
    def rate(self) -> float:
        return self.successes / self.replicates

    @property
    def stderr(self) -> float:
        """二项标准误 √(p(1−p)/n)"""
        return math.sqrt(self.rate * (1.0 - self.rate) / self.replicates)

    def to_dict(self, timing: bool = False) -> Dict[str, Any]:
        out = {
            "dimension": self.dimension,
            "batch_size": self.batch_size,
            "replicates": self.replicates,
            "successes": self.successes,
            "rate": self.rate,
            "stderr": self.stderr,
            "mean_steps": self.mean_steps,
            "divergent": self.divergent,
            "errors": list(self.errors),
        }
        if timing:
            out["mean_wall_time"] = self.wall_time
        return out


@dataclass(frozen=True)
class BenchmarkTable:
    dimensions: Tuple[int, ...]
    batch_sizes: Tuple[int, ...]
    cells: Tuple[BenchmarkCell, ...]

    def cell(self, dimension: int, batch_size: int) -> BenchmarkCell:
        for c in self.cells:
            if c.dimension == dimension and c.batch_size == batch_size:
                return c
        raise KeyError((dimension, batch_size))

    def _matrix(self, attr: str) -> np.ndarray:
        return np.array(
            [[getattr(self.cell(d, P), attr) for P in self.batch_sizes] for d in self.dimensions], dtype=float
        )

    def rate_matrix(self) -> np.ndarray:
        """行 = 维度, 列 = 批大小"""
        return self._matrix("rate")

    def steps_matrix(self) -> np.ndarray:
        return self._matrix("mean_steps")

    @property
    def complete(self) -> bool:
        """所有单元都没有运行错误 (发散属于正常的失败, 不算错误)"""
        return all(not c.errors for c in self.cells)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dimensions": list(self.dimensions),
            "batch_sizes": list(self.batch_sizes),
            "cells": [c.to_dict() for c in self.cells],
        }

    def timing(self) -> Dict[str, Any]:
        return {"cells": [c.to_dict(timing=True) for c in self.cells]}


def _aggregate(config: BenchmarkConfig, outcomes: Sequence[ReplicateOutcome]) -> BenchmarkTable:
    cells = []
    for d in config.dimensions:
        for P in config.batch_sizes:
            group = [o for o in outcomes if o.dimension == d and o.batch_size == P]
            group.sort(key=lambda o: o.replicate)
            cells.append(
                BenchmarkCell(
                    dimension=d,
                    batch_size=P,
                    replicates=len(group),
                    successes=sum(o.success for o in group),
                    mean_steps=float(np.mean([o.steps for o in group])),
                    divergent=sum(o.diverged for o in group),
                    errors=tuple(f"replicate {o.replicate}: {o.error}" for o in group if o.error),
                    wall_time=float(np.mean([o.wall_time for o in group])),
                )
            )
    return BenchmarkTable(config.dimensions, config.batch_sizes, tuple(cells))


def benchmark(config: BenchmarkConfig, jobs: int = 1, progress: bool = False) -> BenchmarkTable:
    """
    运行整个基准网格

    参数:
        jobs: 并行进程数, 1 表示在当前进程内顺序执行
        progress: 是否显示进度条
    返回:
        按 (d, P) 汇总的表; 单个运行出错只记录在对应单元中, 不会中断整张表
    """
    if jobs < 1:
        raise ConfigurationError(f"并行度必须 ≥ 1, 收到 {jobs}")
    tasks = [
        (config, d, P, r) for d in config.dimensions for P in config.batch_sizes for r in range(config.replicates)
    ]
    LOG.info(
        f"基准: {len(config.dimensions)}×{len(config.batch_sizes)} 个单元, "
        f"每单元 {config.replicates} 次重复, 并行度 {jobs}"
    )
    bar = tqdm(total=len(tasks), desc="benchmark", disable=not progress)
    outcomes: List[ReplicateOutcome] = []
    try:
        if jobs == 1:
            for task in tasks:
                outcomes.append(_run_replicate(task))
                bar.update(1)
        else:
            with ProcessPoolExecutor(max_workers=jobs) as executor:
                chunksize = max(1, len(tasks) // (jobs * 8))
                for outcome in executor.map(_run_replicate, tasks, chunksize=chunksize):
                    outcomes.append(outcome)
                    bar.update(1)
    finally:
        bar.close()
    table = _aggregate(config, outcomes)
    for c in table.cells:
        if c.errors:
            LOG.error(f"单元 d={c.dimension}, P={c.batch_size}: {len(c.errors)} 次运行出错")
    return table


__all__ = [
    "BenchmarkConfig",
    "BenchmarkCell",
    "BenchmarkTable",
    "ReplicateOutcome",
    "default_jobs",
    "success",
    "success_rate_by_threshold",
    "benchmark",
]

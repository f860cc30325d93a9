# 随机批划分
#
# 随机批方法 (RBM) 的划分采样、划分集合 𝒜 的枚举,
# 以及驱动一致性理论的连通度统计量 𝒢 与 p_{m0}.

import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from batchcbo.utils.assets import (
    EXACT_ENUMERATION_CAP,
    EXACT_MAX_PARTICLES,
    M0_SEARCH_NODE_CAP,
    ConfigurationError,
    NoConnectivityError,
    ResourceLimitError,
    UsageError,
)
from batchcbo.utils.file_io import read_lines, write_lines
from batchcbo.utils.logger import get_log, tqdm

LOG = get_log("Batching")


def _check_sizes(n_particles: int, batch_size: int):
    if n_particles < 1:
        raise ConfigurationError(f"粒子数必须为正, 收到 N={n_particles}")
    if not 1 <= batch_size <= n_particles:
        raise ConfigurationError(f"批大小必须满足 1 ≤ P ≤ N, 收到 P={batch_size}, N={n_particles}")


def batch_shape(n_particles: int, batch_size: int) -> Tuple[int, int]:
    """返回 (批数 K, 最后一批的大小 r), K = ⌈N/P⌉"""
    n_batches = -(-n_particles // batch_size)
    return n_batches, n_particles - batch_size * (n_batches - 1)


@dataclass(frozen=True)
class BatchPartition:
    """
    {0..N-1} 的一个无序划分: K−1 个大小为 P 的批, 外加一个大小为 r ∈ [1, P] 的批

    批内下标升序保存 (argmin 规则按最小下标打破平局时依赖这一点).
    """

    batches: Tuple[Tuple[int, ...], ...]
    batch_size: int

    def __post_init__(self):
        batches = tuple(tuple(sorted(int(i) for i in b)) for b in self.batches)
        members = [i for b in batches for i in b]
        n_particles = len(members)
        _check_sizes(max(n_particles, 1), self.batch_size)
        if sorted(members) != list(range(n_particles)):
            raise ConfigurationError("批必须两两不交且并集为 {0..N-1}")
        n_batches, remainder = batch_shape(n_particles, self.batch_size)
        expected = sorted([self.batch_size] * (n_batches - 1) + [remainder])
        if sorted(len(b) for b in batches) != expected:
            raise ConfigurationError(
                f"批大小 {[len(b) for b in batches]} 不符合 N={n_particles}, P={self.batch_size}"
            )
        labels = np.empty(n_particles, dtype=np.int64)
        for k, b in enumerate(batches):
            labels[list(b)] = k
        labels.setflags(write=False)
        object.__setattr__(self, "batches", batches)
        object.__setattr__(self, "labels", labels)

    @property
    def n_particles(self) -> int:
        return self.labels.shape[0]

    def batch_of(self, i: int) -> Tuple[int, ...]:
        return batch_of(self, i)

    def co_batched(self) -> np.ndarray:
        """N×N 布尔矩阵, (i, j) 同批时为 True"""
        return self.labels[:, None] == self.labels[None, :]

    def canonical(self) -> Tuple[Tuple[int, ...], ...]:
        """与批的排列无关的规范形式, 按批内最小下标排序"""
        return tuple(sorted(self.batches))

    def to_line(self, step: int) -> str:
        return f"{step} " + "|".join(",".join(str(i) for i in b) for b in self.batches)

    @classmethod
    def from_line(cls, line: str, batch_size: int) -> Tuple[int, "BatchPartition"]:
        try:
            step, body = line.strip().split(" ", 1)
            batches = [tuple(int(i) for i in group.split(",")) for group in body.split("|")]
            return int(step), cls(tuple(batches), batch_size)
        except ValueError as e:
            raise ConfigurationError(f"无法解析批划分行 '{line}': {e}")


def sample_partition(n_particles: int, batch_size: int, rng: np.random.Generator) -> BatchPartition:
    """
    从 𝒜 上的均匀分布采样一个划分

    均匀打乱 0..N-1 后按顺序切成大小为 P 的块 (最后一块可能更小).
    每个无序划分对应的打乱方式个数相同, 因此在无序划分上是均匀的.
    """
    _check_sizes(n_particles, batch_size)
    perm = rng.permutation(n_particles)
    batches = tuple(tuple(perm[k : k + batch_size]) for k in range(0, n_particles, batch_size))
    return BatchPartition(batches, batch_size)


def batch_of(partition: BatchPartition, i: int) -> Tuple[int, ...]:
    """包含粒子 i 的那个批 [i]_n"""
    if not 0 <= i < partition.n_particles:
        raise UsageError(f"粒子下标 {i} 超出范围 [0, {partition.n_particles})")
    return partition.batches[int(partition.labels[i])]


def count_partitions(n_particles: int, batch_size: int) -> int:
    """|𝒜|: 满足批大小约束的无序划分个数"""
    _check_sizes(n_particles, batch_size)
    n_batches, remainder = batch_shape(n_particles, batch_size)
    total = math.factorial(n_particles)
    if remainder == batch_size:
        return total // (math.factorial(batch_size) ** n_batches * math.factorial(n_batches))
    full = n_batches - 1
    return total // (
        math.factorial(batch_size) ** full * math.factorial(full) * math.factorial(remainder)
    )


def enumerate_partitions(n_particles: int, batch_size: int) -> Iterator[BatchPartition]:
    """
    按规范形式逐一枚举 𝒜 中的划分, 每个划分恰好出现一次

    每次取剩余元素中最小的那个, 决定它所在批的大小与同伴.
    """
    _check_sizes(n_particles, batch_size)
    n_batches, remainder = batch_shape(n_particles, batch_size)
    sizes = [batch_size] * (n_batches - 1) + [remainder]

    def helper(remaining: Tuple[int, ...], sizes_left: List[int]):
        if not remaining:
            yield ()
            return
        head, rest = remaining[0], remaining[1:]
        for size in sorted(set(sizes_left), reverse=True):
            next_sizes = list(sizes_left)
            next_sizes.remove(size)
            for mates in itertools.combinations(rest, size - 1):
                block = (head, *mates)
                left = tuple(i for i in rest if i not in mates)
                for tail in helper(left, next_sizes):
                    yield (block, *tail)

    for batches in helper(tuple(range(n_particles)), sizes):
        yield BatchPartition(batches, batch_size)


@dataclass(frozen=True)
class PartitionSchedule:
    """
    第 start .. start+len−1 步使用的批划分序列

    各步的划分互相独立地采样; 记录后不可修改, 可以只读共享.
    """

    partitions: Tuple[BatchPartition, ...]
    start: int = 0

    def __post_init__(self):
        object.__setattr__(self, "partitions", tuple(self.partitions))
        sizes = {p.n_particles for p in self.partitions}
        if len(sizes) > 1:
            raise ConfigurationError(f"调度中的划分粒子数不一致: {sorted(sizes)}")

    def __len__(self) -> int:
        return len(self.partitions)

    @property
    def end(self) -> int:
        return self.start + len(self.partitions)

    def at(self, step: int) -> BatchPartition:
        if not self.start <= step < self.end:
            raise UsageError(f"步 {step} 不在调度范围 [{self.start}, {self.end}) 内")
        return self.partitions[step - self.start]

    def window(self, start: int, length: int) -> List[BatchPartition]:
        if length <= 0:
            return []
        if start < self.start or start + length > self.end:
            raise UsageError(
                f"窗口 [{start}, {start + length}) 超出调度范围 [{self.start}, {self.end})"
            )
        return list(self.partitions[start - self.start : start - self.start + length])

    @classmethod
    def sample(
        cls, n_particles: int, batch_size: int, length: int, rng: np.random.Generator, start: int = 0
    ) -> "PartitionSchedule":
        return cls(tuple(sample_partition(n_particles, batch_size, rng) for _ in range(length)), start)

    def save(self, path: Union[str, Path], metadata=None) -> Path:
        batch_size = self.partitions[0].batch_size if self.partitions else 0
        meta = {"batch_size": batch_size, **(metadata or {})}
        return write_lines(
            path,
            (p.to_line(self.start + k) for k, p in enumerate(self.partitions)),
            meta,
        )

    @classmethod
    def load(cls, path: Union[str, Path], batch_size: int) -> "PartitionSchedule":
        parsed = [BatchPartition.from_line(line, batch_size) for line in read_lines(path)]
        if not parsed:
            return cls((), 0)
        steps = [s for s, _ in parsed]
        if steps != list(range(steps[0], steps[0] + len(steps))):
            raise ConfigurationError(f"{path}: 步编号必须连续")
        return cls(tuple(p for _, p in parsed), steps[0])


def _pair_counts(partitions: Sequence[BatchPartition]) -> np.ndarray:
    """|𝒯^{ij}|: 每对粒子在这些步中同批的次数"""
    counts = np.zeros((partitions[0].n_particles,) * 2, dtype=np.int64)
    for p in partitions:
        counts += p.co_batched()
    return counts


def connectivity_of(partitions: Sequence[BatchPartition]) -> int:
    """𝒢: 所有粒子对 (i ≠ j) 中同批次数的最小值; 空序列为 0"""
    if len(partitions) == 0:
        return 0
    counts = _pair_counts(partitions)
    n = counts.shape[0]
    if n == 1:
        return len(partitions)
    off_diagonal = counts[~np.eye(n, dtype=bool)]
    return int(off_diagonal.min())


def connectivity_count(schedule: PartitionSchedule, start: int, length: int) -> int:
    """窗口 [start, start+length) 上的连通度统计量 𝒢"""
    return connectivity_of(schedule.window(start, length))


def _pair_index(n_particles: int) -> dict:
    return {pair: k for k, pair in enumerate(itertools.combinations(range(n_particles), 2))}


def _pair_vectors(partitions: Sequence[BatchPartition]) -> np.ndarray:
    """每个划分写成长度 C(N,2) 的 0/1 向量 (哪些粒子对同批)"""
    n = partitions[0].n_particles
    index = _pair_index(n)
    vectors = np.zeros((len(partitions), len(index)), dtype=np.int64)
    for row, p in enumerate(partitions):
        for b in p.batches:
            for pair in itertools.combinations(b, 2):
                vectors[row, index[pair]] = 1
    return vectors


@dataclass(frozen=True)
class PM0Estimate:
    """p_{m0} = 𝔼[𝒢_{[0,m0)}] 的估计"""

    value: float
    stderr: float
    exact: bool
    samples: int
    m0: int


def exact_p_m0(n_particles: int, batch_size: int, m0: int, cap: int = EXACT_ENUMERATION_CAP) -> PM0Estimate:
    """枚举 𝒜^{m0} 中所有划分序列, 精确计算 𝔼[𝒢]"""
    _check_sizes(n_particles, batch_size)
    if m0 < 1:
        raise ConfigurationError(f"m0 必须 ≥ 1, 收到 {m0}")
    if n_particles > EXACT_MAX_PARTICLES:
        raise ResourceLimitError(
            "精确枚举 p_m0", f"N={n_particles}", EXACT_MAX_PARTICLES, "EXACT_MAX_PARTICLES"
        )
    n_partitions = count_partitions(n_particles, batch_size)
    sequences = n_partitions**m0
    if sequences > cap:
        raise ResourceLimitError("精确枚举 p_m0", f"|𝒜|^m0={sequences}", cap, "EXACT_ENUMERATION_CAP")
    partitions = list(enumerate_partitions(n_particles, batch_size))
    if n_particles == 1:
        return PM0Estimate(float(m0), 0.0, True, sequences, m0)
    vectors = _pair_vectors(partitions)
    acc = np.zeros((1, vectors.shape[1]), dtype=np.int64)
    for _ in range(m0):
        acc = (acc[:, None, :] + vectors[None, :, :]).reshape(-1, vectors.shape[1])
    # 𝒜^{m0} 上均匀, 每个序列等概率
    value = float(acc.min(axis=1).mean())
    return PM0Estimate(value, 0.0, True, sequences, m0)


def estimate_p_m0(
    n_particles: int,
    batch_size: int,
    m0: int,
    replicates: int,
    rng: np.random.Generator,
    exact: Optional[bool] = False,
    cap: int = EXACT_ENUMERATION_CAP,
    progress: bool = False,
) -> PM0Estimate:
    """
    估计 p_{m0}

    参数:
        exact: True 强制精确枚举 (超过上限抛 ResourceLimitError);
               False 用蒙特卡洛; None 在可行时精确枚举, 否则蒙特卡洛
        replicates: 蒙特卡洛重复次数
    """
    _check_sizes(n_particles, batch_size)
    if m0 < 1 or replicates < 1:
        raise ConfigurationError(f"需要 m0 ≥ 1 且 replicates ≥ 1, 收到 m0={m0}, replicates={replicates}")
    if exact or exact is None:
        try:
            return exact_p_m0(n_particles, batch_size, m0, cap)
        except ResourceLimitError:
            if exact:
                raise
            LOG.info(f"N={n_particles}, P={batch_size}, m0={m0} 无法精确枚举, 改用蒙特卡洛")
    samples = np.empty(replicates, dtype=float)
    for r in tqdm(range(replicates), desc="p_m0", disable=not progress):
        samples[r] = connectivity_of(
            [sample_partition(n_particles, batch_size, rng) for _ in range(m0)]
        )
    stderr = float(samples.std(ddof=1) / math.sqrt(replicates)) if replicates > 1 else 0.0
    return PM0Estimate(float(samples.mean()), stderr, False, replicates, m0)


@dataclass(frozen=True)
class M0Search:
    """m0 搜索结果; minimal 为 False 时 m0 只是一个充分值"""

    m0: int
    minimal: bool
    lower_bound: int


def m0_lower_bound(n_particles: int, batch_size: int) -> int:
    """两条下界取大: 每步每个粒子最多新遇到 P−1 个同伴; 每步最多覆盖的粒子对个数有限"""
    n_batches, remainder = batch_shape(n_particles, batch_size)
    pairs_per_step = (n_batches - 1) * math.comb(batch_size, 2) + math.comb(remainder, 2)
    by_vertex = -(-(n_particles - 1) // (batch_size - 1))
    by_pairs = -(-math.comb(n_particles, 2) // pairs_per_step)
    return max(1, by_vertex, by_pairs)


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _exact_m0(n_particles: int, batch_size: int, lower: int, node_cap: int) -> Optional[int]:
    partitions = list(enumerate_partitions(n_particles, batch_size))
    index = _pair_index(n_particles)
    masks = []
    for p in partitions:
        mask = 0
        for b in p.batches:
            for pair in itertools.combinations(b, 2):
                mask |= 1 << index[pair]
        masks.append(mask)
    full = (1 << len(index)) - 1
    pairs_per_step = max(_popcount(m) for m in masks)
    covering = [[k for k, m in enumerate(masks) if m >> bit & 1] for bit in range(len(index))]
    nodes = 0

    def dfs(uncovered: int, depth: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > node_cap:
            raise ResourceLimitError("精确 m0 搜索", f"超过 {node_cap} 个节点", node_cap, "M0_SEARCH_NODE_CAP")
        if uncovered == 0:
            return True
        if depth == 0 or _popcount(uncovered) > depth * pairs_per_step:
            return False
        # 最低位未覆盖的粒子对必须由剩下的某一步覆盖
        bit = (uncovered & -uncovered).bit_length() - 1
        candidates = sorted(covering[bit], key=lambda k: -_popcount(masks[k] & uncovered))
        return any(dfs(uncovered & ~masks[k], depth - 1) for k in candidates)

    # 划分形状相同的元素在置换下等价, 第一步可以固定
    m = lower
    while m <= len(index):
        if dfs(full & ~masks[0], m - 1):
            return m
        m += 1
    return None


def _greedy_m0(n_particles: int, batch_size: int, trials: int = 256) -> int:
    rng = np.random.default_rng(0)
    index = _pair_index(n_particles)
    uncovered = np.ones(len(index), dtype=bool)
    steps = 0
    while uncovered.any():
        best, best_gain = None, -1
        for _ in range(trials):
            p = sample_partition(n_particles, batch_size, rng)
            vec = _pair_vectors([p])[0].astype(bool)
            gain = int((vec & uncovered).sum())
            if gain > best_gain:
                best, best_gain = vec, gain
        uncovered &= ~best
        steps += 1
    return steps


def require_connectivity(n_particles: int, batch_size: int):
    """P = 1 且 N ≥ 2 时任意两粒子永不同批"""
    _check_sizes(n_particles, batch_size)
    if batch_size == 1 and n_particles >= 2:
        raise NoConnectivityError(n_particles, batch_size)

def search_m0(
    n_particles: int,
    batch_size: int,
    enumeration_cap: int = 20_000,
    node_cap: int = M0_SEARCH_NODE_CAP,
) -> M0Search:
    """
    求最小的 m, 使得存在 m 个划分构成的序列让每对粒子至少同批一次

    |𝒜| 不大时精确搜索 (迭代加深 + 剪枝), 否则用随机贪心构造一个充分的 m.
    """
    _check_sizes(n_particles, batch_size)
    if n_particles == 1 or batch_size == n_particles:
        return M0Search(1, True, 1)
    require_connectivity(n_particles, batch_size)
    lower = m0_lower_bound(n_particles, batch_size)
    if count_partitions(n_particles, batch_size) <= enumeration_cap:
        try:
            m0 = _exact_m0(n_particles, batch_size, lower, node_cap)
            if m0 is not None:
                return M0Search(m0, True, lower)
        except ResourceLimitError as e:
            LOG.warning(f"{e}, 改用贪心构造")
    m0 = _greedy_m0(n_particles, batch_size)
    if m0 == lower:
        return M0Search(m0, True, lower)
    LOG.warning(f"N={n_particles}, P={batch_size}: m0={m0} 由贪心构造得到, 未证明最小 (下界 {lower})")
    return M0Search(m0, False, lower)


def find_m0(n_particles: int, batch_size: int) -> int:
    """最小 (或在大规模时充分) 的 m0"""
    return search_m0(n_particles, batch_size).m0


__all__ = [
    "BatchPartition",
    "PartitionSchedule",
    "PM0Estimate",
    "M0Search",
    "batch_shape",
    "sample_partition",
    "batch_of",
    "count_partitions",
    "enumerate_partitions",
    "connectivity_of",
    "connectivity_count",
    "exact_p_m0",
    "estimate_p_m0",
    "m0_lower_bound",
    "require_connectivity",
    "search_m0",
    "find_m0",
]

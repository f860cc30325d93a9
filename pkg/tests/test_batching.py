from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from batchcbo.core.batching import (
    BatchPartition,
    PartitionSchedule,
    batch_of,
    batch_shape,
    connectivity_count,
    connectivity_of,
    count_partitions,
    enumerate_partitions,
    estimate_p_m0,
    exact_p_m0,
    find_m0,
    m0_lower_bound,
    require_connectivity,
    sample_partition,
    search_m0,
)
from batchcbo.utils.assets import ConfigurationError, NoConnectivityError, ResourceLimitError, UsageError

ALL_N4_P2 = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]


def partition(*batches, batch_size=2):
    return BatchPartition(tuple(batches), batch_size)


class TestPartition:
    def test_batch_sizes(self, rng):
        p = sample_partition(10, 3, rng)
        assert sorted(len(b) for b in p.batches) == [1, 3, 3, 3]
        assert sorted(i for b in p.batches for i in b) == list(range(10))

    def test_batch_of(self):
        p = partition((3, 0), (1, 2))
        assert batch_of(p, 3) == (0, 3)
        assert p.batch_of(1) == (1, 2)
        with pytest.raises(UsageError):
            batch_of(p, 4)

    def test_invalid_partitions(self):
        with pytest.raises(ConfigurationError):
            partition((0, 1), (1, 2))
        with pytest.raises(ConfigurationError):
            partition((0,), (1, 2, 3))
        with pytest.raises(ConfigurationError):
            sample_partition(4, 5, np.random.default_rng(0))

    def test_line_format(self):
        p = partition((0, 3), (1, 2))
        line = p.to_line(17)
        assert line == "17 0,3|1,2"
        step, parsed = BatchPartition.from_line(line, 2)
        assert step == 17 and parsed.canonical() == p.canonical()

    def test_full_batch_shape(self):
        assert batch_shape(6, 6) == (1, 6)
        assert batch_shape(7, 3) == (3, 1)


class TestEnumeration:
    @pytest.mark.parametrize("n, P, expected", [(4, 2, 3), (5, 2, 15), (6, 3, 10), (4, 3, 4), (3, 3, 1)])
    def test_count(self, n, P, expected):
        assert count_partitions(n, P) == expected
        canonical = {p.canonical() for p in enumerate_partitions(n, P)}
        assert len(canonical) == expected

    def test_n4_p2(self):
        assert sorted(p.canonical() for p in enumerate_partitions(4, 2)) == ALL_N4_P2

    @pytest.mark.slow
    @pytest.mark.parametrize("n, P, count", [(4, 2, 3), (5, 2, 15)])
    def test_sampling_is_uniform(self, n, P, count):
        rng = np.random.default_rng(5)
        counts = Counter(sample_partition(n, P, rng).canonical() for _ in range(100_000))
        assert len(counts) == count
        _, p_value = stats.chisquare(list(counts.values()))
        assert p_value > 0.01


class TestConnectivity:
    def test_all_three_partitions_connect(self):
        partitions = [partition(*b) for b in ALL_N4_P2]
        assert connectivity_of(partitions) == 1
        assert connectivity_of(partitions + partitions) == 2

    def test_two_partitions_leave_a_pair_apart(self):
        assert connectivity_of([partition(*b) for b in ALL_N4_P2[:2]]) == 0

    def test_empty_window(self):
        assert connectivity_of([]) == 0

    def test_schedule_window(self):
        schedule = PartitionSchedule(tuple(partition(*b) for b in ALL_N4_P2 * 2), start=5)
        assert len(schedule) == 6 and schedule.end == 11
        assert connectivity_count(schedule, 5, 3) == 1
        assert connectivity_count(schedule, 6, 2) == 0
        assert schedule.at(8).canonical() == ALL_N4_P2[0]
        with pytest.raises(UsageError):
            schedule.window(9, 3)
        with pytest.raises(UsageError):
            schedule.at(4)

    def test_schedule_file(self, tmp_path, rng):
        schedule = PartitionSchedule.sample(6, 4, 20, rng, start=3)
        schedule.save(tmp_path / "schedule.txt", {"seed": 1})
        loaded = PartitionSchedule.load(tmp_path / "schedule.txt", 4)
        assert loaded.start == 3
        assert [p.canonical() for p in loaded.partitions] == [p.canonical() for p in schedule.partitions]


class TestPM0:
    def test_exact_n4_p2(self):
        # 27 个长度为 3 的序列中, 三种划分各用一次的有 6 个
        estimate = exact_p_m0(4, 2, 3)
        assert Fraction(estimate.value).limit_denominator(100) == Fraction(2, 9)
        assert estimate.exact and estimate.samples == 27 and estimate.stderr == 0.0

    def test_exact_when_feasible(self, rng):
        estimate = estimate_p_m0(4, 2, 3, 10, rng, exact=None)
        assert estimate.exact
        assert estimate.value == pytest.approx(2 / 9)

    def test_monte_carlo_agrees_with_exact(self):
        rng = np.random.default_rng(2024)
        estimate = estimate_p_m0(4, 2, 3, 5000, rng, exact=False)
        assert not estimate.exact
        assert abs(estimate.value - 2 / 9) < 3 * estimate.stderr

    def test_full_batch(self):
        assert exact_p_m0(5, 5, 2).value == 2.0

    def test_monotone_in_window(self):
        values = [exact_p_m0(4, 2, m).value for m in range(1, 5)]
        assert values[:2] == [0.0, 0.0]
        assert values == sorted(values)
        assert values[3] > values[2]

    def test_singleton_batches_never_connect(self, rng):
        assert exact_p_m0(4, 1, 3).value == 0.0
        assert estimate_p_m0(4, 1, 3, 100, rng).value == 0.0
        singletons = PartitionSchedule.sample(4, 1, 10, rng)
        assert connectivity_count(singletons, 0, 10) == 0

    def test_too_many_particles(self):
        with pytest.raises(ResourceLimitError):
            exact_p_m0(9, 3, 1)

    def test_sequence_cap(self):
        with pytest.raises(ResourceLimitError):
            exact_p_m0(6, 2, 4, cap=1000)

    def test_invalid_window(self, rng):
        with pytest.raises(ConfigurationError):
            estimate_p_m0(4, 2, 0, 10, rng)


class TestM0:
    @pytest.mark.parametrize("n, P, m0", [(4, 2, 3), (4, 4, 1), (4, 3, 3), (1, 1, 1)])
    def test_exact_search(self, n, P, m0):
        search = search_m0(n, P)
        assert search.minimal
        assert search.m0 == m0 == find_m0(n, P)
        assert search.m0 >= search.lower_bound

    def test_no_connectivity(self):
        with pytest.raises(NoConnectivityError):
            search_m0(4, 1)
        with pytest.raises(NoConnectivityError):
            require_connectivity(4, 1)
        require_connectivity(1, 1)

    def test_two_triples_need_four_steps(self):
        # 一个划分至多让另一划分的 9 个跨批对中的 4 个同批
        search = search_m0(6, 3)
        assert search.minimal and search.lower_bound == 3
        assert search.m0 == find_m0(6, 3) == 4

    def test_lower_bound(self):
        assert m0_lower_bound(4, 2) == 3
        assert m0_lower_bound(100, 10) == 11

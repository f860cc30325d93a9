import numpy as np
import pytest

from batchcbo.core import NoiseModel, RepresentativeRule, SchemeConfig, run
from batchcbo.harness import BenchmarkConfig, benchmark, default_jobs, success, success_rate_by_threshold
from batchcbo.utils.assets import ConfigurationError
from tests.conftest import make_run_config


def small_benchmark(**changes):
    params = dict(
        rule=RepresentativeRule.argmin(),
        scheme=SchemeConfig.generalized(0.1, NoiseModel.gaussian(0.1)),
        n_particles=10,
        dimensions=(2,),
        batch_sizes=(10, 5),
        replicates=3,
        max_steps=200,
        seed=5,
    )
    params.update(changes)
    return BenchmarkConfig(**params)


def table1(**changes):
    """N = 100, γ = 0.01, ζ = 0.5, δ = 0.25, ε = 1e-3"""
    params = dict(
        rule=RepresentativeRule.argmin(),
        scheme=SchemeConfig.generalized(0.01, NoiseModel.gaussian(0.5)),
        replicates=200,
    )
    params.update(changes)
    return BenchmarkConfig(**params)


class TestSuccess:
    def test_near_minimizer(self):
        result = run(make_run_config(initial=np.full((4, 2), 1.05)))
        assert success(result, [1.0, 1.0], 0.25)
        assert not success(result, [1.0, 1.0], 0.05)

    def test_far_from_minimizer(self):
        result = run(make_run_config(initial=np.full((4, 2), 2.0)))
        assert not success(result, [1.0, 1.0], 0.25)

    def test_threshold_must_be_positive(self):
        result = run(make_run_config(max_steps=5))
        with pytest.raises(ConfigurationError):
            success(result, [1.0, 1.0], 0.0)

    def test_rate_is_monotone_in_threshold(self):
        results = [run(make_run_config(zeta=0.5, max_steps=100).replace(stream_id=r)) for r in range(10)]
        rates = success_rate_by_threshold(results, [1.0, 1.0], [0.01, 0.1, 0.25, 0.5, 1.0, 5.0])
        assert rates == sorted(rates)


class TestBenchmarkConfig:
    @pytest.mark.parametrize(
        "changes",
        [{"replicates": 0}, {"delta": 0.0}, {"dimensions": ()}, {"batch_sizes": (11,)}],
    )
    def test_invalid(self, changes):
        with pytest.raises(ConfigurationError):
            small_benchmark(**changes)

    def test_streams_are_per_cell(self):
        config = small_benchmark()
        a = config.run_config(2, 5, 1)
        assert a.namespace == (2, 5) and a.stream_id == 1
        assert not a.record.diameters and not a.record.transitions
        assert config.objective(3).dimension == 3


class TestBenchmark:
    def test_deterministic(self):
        config = small_benchmark()
        first, second = benchmark(config), benchmark(config)
        assert first.to_dict() == second.to_dict()
        assert first.rate_matrix().shape == (1, 2)
        assert first.complete

    def test_parallel_matches_sequential(self):
        config = small_benchmark(replicates=4)
        assert benchmark(config, jobs=2).to_dict() == benchmark(config, jobs=1).to_dict()

    def test_single_replicate(self):
        table = benchmark(small_benchmark(replicates=1, batch_sizes=(5,)))
        cell = table.cell(2, 5)
        assert cell.rate in (0.0, 1.0)
        assert cell.replicates == 1 and cell.stderr == 0.0
        with pytest.raises(KeyError):
            table.cell(3, 5)

    def test_divergence_counts_as_failure(self):
        config = small_benchmark(
            scheme=SchemeConfig.generalized(0.1, NoiseModel.gaussian(1e200)), objective_name="sphere", replicates=2
        )
        cell = benchmark(config).cell(2, 10)
        assert cell.successes == 0 and cell.divergent == 2
        assert not cell.errors

    def test_invalid_jobs(self):
        with pytest.raises(ConfigurationError):
            benchmark(small_benchmark(), jobs=0)


@pytest.mark.slow
class TestSuccessRates:
    def test_two_dimensions_full_batch(self):
        table = benchmark(table1(dimensions=(2,), batch_sizes=(100,)), jobs=default_jobs())
        assert table.cell(2, 100).rate >= 0.95

    def test_small_batches_help_in_ten_dimensions(self):
        table = benchmark(table1(dimensions=(10,), batch_sizes=(100, 10)), jobs=default_jobs())
        assert table.cell(10, 10).rate - table.cell(10, 100).rate >= 0.3

    def test_full_batch_degrades_with_dimension(self):
        table = benchmark(table1(dimensions=(2, 10), batch_sizes=(100,)), jobs=default_jobs())
        assert table.cell(2, 100).rate - table.cell(10, 100).rate >= 0.5

    def test_small_batches_take_more_steps(self):
        table = benchmark(table1(dimensions=(4,), batch_sizes=(100, 10), replicates=50), jobs=default_jobs())
        assert table.cell(4, 10).mean_steps > table.cell(4, 100).mean_steps

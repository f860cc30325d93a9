import numpy as np
import pytest

from batchcbo.core import BatchPartition, PartitionSchedule, RecordOptions, RepresentativeRule, TransitionRecord, run
from batchcbo.diagnostics import (
    diameter_contraction_check,
    ergodicity_coefficient,
    matrix_property_suite,
    mixed_norm_1_inf,
    noise_statistic_H,
    ordered_product,
    perturbed_product_alpha_bound,
    product_alpha_lower_bound_noise_free,
    verify_trajectory,
    window_diameter_bound_check,
)
from batchcbo.utils.assets import ConfigurationError, PreconditionError, UsageError
from tests.conftest import make_run_config

DIAGNOSTIC_RECORD = RecordOptions(transitions=True, schedule=True)


class TestCoefficient:
    def test_identity(self):
        assert ergodicity_coefficient(np.eye(4)) == 0.0

    def test_identical_rows(self):
        assert ergodicity_coefficient(np.full((3, 3), 1 / 3)) == pytest.approx(1.0)

    def test_single_row(self):
        # 只有 i = j 一项, 即行和
        assert ergodicity_coefficient([[0.7]]) == pytest.approx(0.7)
        assert ergodicity_coefficient([[1.0, -0.25]]) == pytest.approx(0.75)

    def test_mixed_norm(self):
        assert mixed_norm_1_inf([[1.0, -2.0], [0.5, 0.5]]) == 3.0

    def test_ordered_product(self, rng):
        A, B, C = (rng.normal(size=(3, 3)) for _ in range(3))
        np.testing.assert_allclose(ordered_product([A, B, C]), C @ B @ A)
        with pytest.raises(UsageError):
            ordered_product([])


class TestContraction:
    def test_equal_row_sums(self):
        A = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
        report = diameter_contraction_check(A, [0.0, 1.0, 4.0])
        assert report.passed
        assert report.rhs == pytest.approx(0.5 * 4.0)

    def test_unequal_row_sums(self):
        with pytest.raises(PreconditionError):
            diameter_contraction_check(np.array([[1.0, 0.0], [0.0, 2.0]]), [0.0, 1.0])


def n4_records(eta_scale=0.0, seed=0):
    """N = 4, P = 2 上三种划分轮流使用的转移记录"""
    rng = np.random.default_rng(seed)
    layouts = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]
    partitions, records = [], []
    for n in range(6):
        p = BatchPartition(layouts[n % 3], 2)
        W = np.zeros((4, 4))
        for batch in p.batches:
            W[np.ix_(batch, batch)] = 0.5
        partitions.append(p)
        records.append(TransitionRecord(n, W, eta_scale * rng.normal(size=(4, 2)), 0.2))
    return records, PartitionSchedule(tuple(partitions))


class TestWindowBounds:
    def test_noise_free_product(self):
        records, schedule = n4_records()
        report = product_alpha_lower_bound_noise_free(records, 0.2, schedule, 0, 3)
        assert report.passed
        assert report.rhs == pytest.approx(0.2 * 0.8**2)

    def test_noise_statistic(self):
        records, _ = n4_records()
        assert noise_statistic_H(records, 0, 3, 0) == 0.0
        assert noise_statistic_H(records, 2, 0, 1) == 0.0
        noisy, _ = n4_records(0.1)
        factors = [1 + 2 * np.abs(r.eta[:, 1]).max() for r in noisy[1:4]]
        assert noise_statistic_H(noisy, 1, 3, 1) == pytest.approx(2 * (np.prod(factors) - 1))

    def test_perturbed_product(self):
        records, schedule = n4_records(0.05, seed=3)
        reports = perturbed_product_alpha_bound(records, 0.2, schedule, 3, 3, 0)
        assert [r.name for r in reports] == [
            "perturbed_product_alpha",
            "alpha_norm_lower_bound",
            "product_difference_norm",
        ]
        assert all(r.passed for r in reports)

    def test_missing_records(self):
        records, schedule = n4_records()
        with pytest.raises(UsageError):
            product_alpha_lower_bound_noise_free(records, 0.2, schedule, 4, 3)


class TestVerifyTrajectory:
    def test_noise_free(self):
        config = make_run_config(rule=RepresentativeRule.gibbs(1.0), max_steps=30, record=DIAGNOSTIC_RECORD)
        summary = verify_trajectory(run(config), 3)
        assert summary.all_passed and summary.total > 0
        assert summary.h_range == (0.0, 0.0)
        assert "product_alpha_noise_free" in summary.by_name()

    def test_small_noise(self):
        config = make_run_config(zeta=0.05, max_steps=30, seed=12, record=DIAGNOSTIC_RECORD)
        summary = verify_trajectory(run(config), 3)
        assert summary.all_passed
        assert summary.h_range[1] > 0.0
        assert "product_alpha_noise_free" not in summary.by_name()
        assert summary.to_dict()["passed"] == summary.total

    @pytest.mark.parametrize("zeta", [0.0, 0.05])
    def test_hundred_windows(self, zeta):
        config = make_run_config(zeta=zeta, max_steps=300, seed=21, record=DIAGNOSTIC_RECORD)
        result = run(config)
        assert result.steps == 300
        summary = verify_trajectory(result, 3)
        assert summary.by_name()["product_row_stochastic"]["total"] == 100
        assert summary.all_passed, [r for r in summary.reports if not r.passed][:3]

    def test_window_diameter_bounds(self):
        config = make_run_config(rule=RepresentativeRule.gibbs(1.0), max_steps=30, record=DIAGNOSTIC_RECORD)
        result = run(config)
        reports = window_diameter_bound_check(result, 3, 3, 1)
        assert [r.name for r in reports] == ["one_window_diameter", "pathwise_diameter"]
        assert all(r.passed for r in reports)
        assert reports[1].window == (0, 6)
        with pytest.raises(UsageError):
            window_diameter_bound_check(result, result.steps - 2, 3, 0)

    def test_needs_a_full_window(self):
        result = run(make_run_config(max_steps=2, record=DIAGNOSTIC_RECORD))
        with pytest.raises(UsageError):
            verify_trajectory(result, 3)

    def test_needs_transitions(self):
        with pytest.raises(UsageError):
            verify_trajectory(run(make_run_config(max_steps=10)), 3)


class TestPropertySuite:
    def test_small_suite(self):
        report = matrix_property_suite(np.random.default_rng(1), cases=500)
        assert report.cases == 500
        assert report.all_passed, report.violations

    @pytest.mark.slow
    def test_full_suite(self):
        report = matrix_property_suite(np.random.default_rng(1 << 32), cases=10_000)
        assert report.all_passed, report.violations

    def test_invalid(self, rng):
        with pytest.raises(ConfigurationError):
            matrix_property_suite(rng, cases=10, max_size=1)

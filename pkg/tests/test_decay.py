import math

import numpy as np
import pytest

from batchcbo.core import RecordOptions, RepresentativeRule, run
from batchcbo.harness import estimate_decay, fit_log_decay
from batchcbo.utils.assets import DecayMode, EstimationError, UsageError
from tests.conftest import make_run_config


def halving_run(record=None):
    """N = 2 全批, β = 0, γ = 0.5, 无噪声: 直径每步精确减半"""
    config = make_run_config(
        n_particles=2,
        dimension=1,
        batch_size=2,
        gamma=0.5,
        rule=RepresentativeRule.gibbs(0.0),
        max_steps=60,
        initial=np.array([[0.0], [1.0]]),
        record=record,
    )
    return run(config)


class TestFit:
    def test_geometric_series(self):
        fit = fit_log_decay(3.0 * 0.8 ** np.arange(20))
        assert fit.slope == pytest.approx(math.log(0.8))
        assert fit.r_squared == pytest.approx(1.0)
        assert fit.points == 20

    def test_truncates_at_floor(self):
        fit = fit_log_decay([1.0, 0.1, 0.01, 1e-15, 1.0])
        assert fit.points == 3

    def test_too_few_points(self):
        with pytest.raises(EstimationError):
            fit_log_decay([1.0, 0.5])


class TestEstimateDecay:
    def test_exact_halving(self):
        report = estimate_decay(halving_run(), 0, "pathwise")
        assert abs(report.slope - math.log(0.5)) < 1e-6
        assert report.rate_name == "lambda0" and report.m0 == 1 and report.p_m0 == 1.0
        assert report.theoretical_rate == pytest.approx(0.5)
        assert report.consistent

    def test_path_rates(self):
        report = estimate_decay(halving_run(RecordOptions(schedule=True)), 0, DecayMode.PATHWISE)
        assert report.path_rates == pytest.approx((0.5,))
        assert estimate_decay(halving_run(), 0).path_rates == ()

    def test_constant_ensemble(self):
        result = run(make_run_config(initial=np.ones((4, 2))))
        with pytest.raises(EstimationError):
            estimate_decay(result)

    def test_expectation_mode(self):
        base = make_run_config(rule=RepresentativeRule.gibbs(1.0), max_steps=200)
        results = [run(base.replace(stream_id=r)) for r in range(20)]
        report = estimate_decay(results, 1, DecayMode.EXPECTATION)
        assert report.rate_name == "lambda1"
        assert report.m0 == 3 and report.p_m0 == pytest.approx(2 / 9)
        assert report.slope < 0 and report.consistent
        assert report.replicates == 20 and len(report.slopes) == 1
        assert report.slope_stderr > 0

    def test_noisy_pathwise_with_bound_checks(self):
        record = RecordOptions(transitions=True, schedule=True)
        base = make_run_config(zeta=0.01, max_steps=60, record=record)
        results = [run(base.replace(stream_id=r)) for r in range(3)]
        report = estimate_decay(results, 0, DecayMode.PATHWISE)
        assert report.rate_name == "lambda2_sup"
        assert len(report.slopes) == 3
        assert report.slope == pytest.approx(np.mean(report.slopes))
        assert report.bound_checks["passed"] == report.bound_checks["total"] > 0
        assert report.to_dict()["mode"] == "pathwise"

    def test_no_diameters(self):
        result = run(make_run_config(max_steps=5, record=RecordOptions(diameters=False)))
        with pytest.raises(UsageError):
            estimate_decay(result)

    def test_coordinate_out_of_range(self):
        with pytest.raises(UsageError):
            estimate_decay(halving_run(), 1)

    @pytest.mark.slow
    def test_expectation_slope_beats_theory(self):
        base = make_run_config(rule=RepresentativeRule.gibbs(1.0), gamma=0.5, max_steps=200)
        results = [run(base.replace(stream_id=r)) for r in range(100)]
        report = estimate_decay(results, 0, DecayMode.EXPECTATION)
        assert report.slope <= -report.theoretical_rate

    @pytest.mark.slow
    @pytest.mark.parametrize("zeta", [0.0, 0.01])
    def test_expectation_rate_with_two_standard_errors(self, zeta):
        base = make_run_config(rule=RepresentativeRule.gibbs(1.0), gamma=0.5, zeta=zeta, max_steps=200)
        results = [run(base.replace(stream_id=r)) for r in range(200)]
        report = estimate_decay(results, 0, DecayMode.EXPECTATION)
        assert report.rate_name == "lambda1" and report.p_m0 == pytest.approx(2 / 9)
        assert report.slope <= -report.theoretical_rate + 2.0 * report.slope_stderr

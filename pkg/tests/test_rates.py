import math

import pytest

from batchcbo.diagnostics import (
    critical_zeta,
    homogeneous_condition,
    homogeneous_rate,
    lambda0_limit,
    lambda0_path,
    lambda1,
    lambda2_sup,
    positivity_condition,
    theoretical_rates,
)
from batchcbo.utils.assets import ConfigurationError


class TestRates:
    def test_full_batch_reduces(self):
        gamma, N, zeta = 0.3, 9, 0.01
        expected = gamma - 4 * math.sqrt(N) * zeta
        assert lambda2_sup(gamma, N, 1, zeta, 1.0) == pytest.approx(expected)
        assert lambda1(gamma, N, 1, zeta, 1.0) == pytest.approx(expected)

    def test_noise_free_condition(self):
        assert positivity_condition(0.5, 4, 3, 0.0, 2 / 9)
        assert not positivity_condition(0.5, 4, 3, 0.0, 0.0)
        assert lambda0_limit(0.5, 3, 2 / 9) == pytest.approx(0.5 * 0.25 * 2 / 9)

    def test_lambda1_is_lambda2_over_m0(self):
        args = (0.1, 4, 3, 1e-4, 2 / 9)
        assert lambda1(*args) == pytest.approx(lambda2_sup(*args) / 3)

    def test_critical_zeta(self):
        zc = critical_zeta(0.5, 4, 3, 2 / 9)
        assert zc > 0
        assert positivity_condition(0.5, 4, 3, zc - 1e-7, 2 / 9)
        assert not positivity_condition(0.5, 4, 3, zc + 1e-7, 2 / 9)
        assert lambda2_sup(0.5, 4, 3, zc, 2 / 9) == pytest.approx(0.0, abs=1e-12)

    def test_critical_zeta_without_connectivity(self):
        assert critical_zeta(0.5, 4, 3, 0.0) == 0.0

    def test_lambda0_path(self):
        assert lambda0_path(0.5, 3, [1, 1, 0]) == pytest.approx(0.5 * 0.25 * 2 / 3)
        assert lambda0_path(0.5, 3, []) == 0.0

    def test_homogeneous(self):
        assert homogeneous_rate(0.5, 0.5) == pytest.approx(0.5)
        assert homogeneous_condition(0.5, 0.5)
        assert not homogeneous_condition(0.5, 1.0)

    def test_report(self):
        report = theoretical_rates(0.5, 4, 3, 0.0, 2 / 9)
        assert report.condition_holds
        assert report.lambda2_sup == pytest.approx(report.lambda0 / 3)
        assert report.lambda1 == pytest.approx(report.lambda0 / 9)

    @pytest.mark.parametrize("gamma, m0, zeta, p", [(0.0, 3, 0.0, 0.1), (1.0, 3, 0.0, 0.1), (0.5, 0, 0.0, 0.1), (0.5, 3, -1.0, 0.1)])
    def test_invalid(self, gamma, m0, zeta, p):
        with pytest.raises(ConfigurationError):
            lambda2_sup(gamma, 4, m0, zeta, p)

import numpy as np
import pytest

from batchcbo.core import (
    ParticleEnsemble,
    RngStream,
    column,
    column_diameters,
    diameter,
    max_pairwise_inf_distance,
    sample_initial,
)
from batchcbo.utils.assets import ConfigurationError, UsageError


class TestDiameter:
    def test_diameter(self):
        assert diameter([3.0, -1.0, 2.0]) == 4.0

    def test_empty(self):
        with pytest.raises(UsageError):
            diameter([])

    def test_column_diameters_and_inf_distance(self):
        ensemble = ParticleEnsemble(np.array([[0.0, 1.0], [2.0, 1.5], [1.0, -1.0]]))
        np.testing.assert_array_equal(column_diameters(ensemble), [2.0, 2.5])
        assert max_pairwise_inf_distance(ensemble) == 2.5

    def test_inf_distance_against_all_pairs(self, rng):
        ensemble = ParticleEnsemble(rng.normal(size=(9, 4)))
        x = ensemble.states
        brute = max(np.abs(x[i] - x[j]).max() for i in range(9) for j in range(9))
        assert max_pairwise_inf_distance(ensemble) == brute

    def test_column_out_of_range(self):
        ensemble = ParticleEnsemble(np.zeros((3, 2)))
        np.testing.assert_array_equal(column(ensemble, 1), np.zeros(3))
        with pytest.raises(UsageError):
            column(ensemble, 2)


class TestParticleEnsemble:
    def test_states_are_read_only(self):
        ensemble = ParticleEnsemble(np.zeros((2, 2)))
        with pytest.raises(ValueError):
            ensemble.states[0, 0] = 1.0

    def test_rejects_non_finite(self):
        with pytest.raises(ConfigurationError):
            ParticleEnsemble(np.array([[0.0, np.inf]]))

    def test_csv_keeps_full_precision(self, tmp_path, rng):
        ensemble = ParticleEnsemble(rng.normal(size=(5, 3)), step=12)
        ensemble.save_csv(tmp_path / "ensemble.csv", {"seed": 1})
        loaded = ParticleEnsemble.load_csv(tmp_path / "ensemble.csv")
        assert loaded.step == 12
        np.testing.assert_array_equal(loaded.states, ensemble.states)


class TestSampling:
    def test_inside_box(self, rng):
        ensemble = sample_initial(500, 3, -3.0, 3.0, rng)
        assert ensemble.states.shape == (500, 3)
        assert np.all(ensemble.states >= -3.0) and np.all(ensemble.states < 3.0)

    def test_invalid_box(self, rng):
        with pytest.raises(ConfigurationError):
            sample_initial(5, 2, 1.0, 1.0, rng)

    def test_streams_are_reproducible(self):
        a = RngStream(7, 3).generator().random(5)
        b = RngStream(7, 3).generator().random(5)
        c = RngStream(7, 4).generator().random(5)
        d = RngStream(7, 3, (2, 10)).generator().random(5)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)
        assert not np.array_equal(a, d)

    def test_negative_stream(self):
        with pytest.raises(ConfigurationError):
            RngStream(1, -1)

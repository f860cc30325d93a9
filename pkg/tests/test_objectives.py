import numpy as np
import pytest

from batchcbo.core import Rastrigin, RastriginSpec, Sphere, build_objective, rastrigin, sphere
from batchcbo.utils.assets import ConfigurationError


class TestRastrigin:
    def test_value_at_minimizer_is_offset(self):
        spec = RastriginSpec(3, np.array([1.0, -2.0, 0.5]), offset=4.0)
        assert rastrigin(spec.shift, spec) == 4.0

    def test_half_period_point(self):
        # 每个分量: 0.25 − 10 cos(π) + 10 = 20.25
        spec = RastriginSpec.default(4)
        assert rastrigin(spec.shift + 0.5, spec) == pytest.approx(20.25)

    def test_never_below_offset(self, rng):
        spec = RastriginSpec(5, np.ones(5), offset=-1.0)
        points = rng.uniform(-10, 10, size=(2000, 5))
        assert np.all(rastrigin(points, spec) >= -1.0 - 1e-12)

    def test_coordinate_permutation(self, rng):
        shift = rng.normal(size=5)
        points = rng.uniform(-4, 4, size=(50, 5))
        perm = rng.permutation(5)
        np.testing.assert_allclose(
            rastrigin(points[:, perm], RastriginSpec(5, shift[perm])),
            rastrigin(points, RastriginSpec(5, shift)),
            rtol=1e-12,
        )

    def test_deterministic(self, rng):
        objective = build_objective("rastrigin", 3)
        x = rng.normal(size=3)
        assert objective(x) == objective(x)

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigurationError):
            rastrigin(np.zeros(3), RastriginSpec.default(2))

    def test_minimizer_and_rows(self, rng):
        objective = Rastrigin(RastriginSpec.default(2))
        np.testing.assert_array_equal(objective.minimizer, [1.0, 1.0])
        points = rng.normal(size=(5, 2))
        np.testing.assert_allclose(objective.evaluate_many(points), [objective(p) for p in points])

    def test_evaluation_counter(self):
        objective = build_objective("rastrigin", 2)
        objective.evaluate_many(np.zeros((7, 2)))
        objective(np.zeros(2))
        assert objective.evaluations == 8


class TestSphere:
    def test_shifted_sphere(self):
        objective = Sphere(2, [1.0, 2.0])
        assert objective([1.0, 2.0]) == 0.0
        assert objective([2.0, 0.0]) == 5.0
        assert sphere(np.array([[0.0, 0.0]]), np.array([1.0, 2.0]))[0] == 5.0


class TestBuildObjective:
    def test_scalar_shift_broadcasts(self):
        objective = build_objective("rastrigin", 3, {"shift": 2.0, "offset": 1.0})
        np.testing.assert_array_equal(objective.minimizer, [2.0, 2.0, 2.0])
        assert objective(objective.minimizer) == 1.0

    def test_unknown_name(self):
        with pytest.raises(ConfigurationError):
            build_objective("ackley", 2)

    def test_unknown_parameter(self):
        with pytest.raises(ConfigurationError):
            build_objective("sphere", 2, {"offset": 1.0})

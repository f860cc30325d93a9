import math

import numpy as np
import pytest

from batchcbo.core import ParticleEnsemble, step_params
from batchcbo.utils.assets import ConfigurationError, NoiseKind, RuleKind, SchemeKind
from batchcbo.utils.config import ExperimentConfig, load_config


def write(tmp_path, text, name="config.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def config_error(tmp_path, text) -> ConfigurationError:
    with pytest.raises(ConfigurationError) as excinfo:
        config = load_config(write(tmp_path, text))
        config.run_config()
    return excinfo.value


class TestDefaults:
    def test_defaults_build_a_run(self):
        config = ExperimentConfig()
        run_config = config.run_config()
        assert run_config.n_particles == 100 and run_config.batch_size == 100
        assert run_config.rule.kind is RuleKind.ARGMIN
        assert run_config.scheme.gamma == 0.01 and run_config.scheme.noise.zeta == 0.5
        assert run_config.box == (-3.0, 3.0) and run_config.tolerance == 1e-3
        np.testing.assert_array_equal(run_config.objective.minimizer, [1.0, 1.0])

    def test_empty_file(self, tmp_path):
        config = load_config(write(tmp_path, ""))
        assert config.resolved() == ExperimentConfig().resolved()

    def test_benchmark_defaults(self):
        bench = ExperimentConfig().benchmark_config()
        assert bench.dimensions == tuple(range(2, 11))
        assert bench.batch_sizes == (100, 50, 10)
        assert bench.replicates == 200 and bench.delta == 0.25


class TestLoad:
    def test_sections(self, tmp_path):
        config = load_config(
            write(
                tmp_path,
                "run:\n  n_particles: 20\n  batch_size: 5\n  tolerance: 1e-3\n"
                "rule:\n  name: gibbs\n  beta: 2\n"
                "scheme:\n  kind: model_b\n  lam: 1.0\n  sigma: 0.5\n  h: 0.1\n  heterogeneous: false\n",
            )
        )
        assert config["run"]["tolerance"] == 0.001
        run_config = config.run_config()
        assert run_config.batch_size == 5
        assert run_config.rule.beta == 2.0
        assert run_config.scheme.kind is SchemeKind.MODEL_B and not run_config.scheme.heterogeneous
        assert config.lines["rule.beta"] == 7

    def test_noise_none(self, tmp_path):
        config = load_config(write(tmp_path, "scheme:\n  noise: none\n"))
        assert config.scheme().noise.kind is NoiseKind.NONE

    def test_scheme_noise_with_free_gamma(self, tmp_path):
        text = "scheme:\n  gamma: 0.2\n  noise: scheme_b\n  lam: 1.0\n  sigma: 0.5\n  h: 0.01\n"
        scheme = load_config(write(tmp_path, text)).scheme()
        gamma, noise = step_params(scheme)
        assert gamma == 0.2
        assert noise.kind is NoiseKind.SCHEME_B
        assert noise.effective_zeta == pytest.approx(math.exp(-0.01) * 0.5 * 0.1)

    def test_unknown_noise(self, tmp_path):
        config = load_config(write(tmp_path, "scheme:\n  noise: cauchy\n"))
        with pytest.raises(ConfigurationError) as excinfo:
            config.scheme()
        assert excinfo.value.line == 2

    def test_initial_states_relative_to_config(self, tmp_path):
        ParticleEnsemble(np.arange(6.0).reshape(3, 2)).save_csv(tmp_path / "init.csv")
        config = load_config(write(tmp_path, "run:\n  n_particles: 3\n  initial: init.csv\n"))
        np.testing.assert_array_equal(config.run_config().initial, np.arange(6.0).reshape(3, 2))

    def test_shipped_configs(self, config_dir):
        paths = sorted(config_dir.glob("*.yaml"))
        assert paths
        for path in paths:
            load_config(path).run_config()
        load_config(config_dir / "rastrigin_benchmark.yaml").benchmark_config()

    def test_hash(self, tmp_path):
        a = load_config(write(tmp_path, "run:\n  seed: 1\n", "a.yaml"))
        b = load_config(write(tmp_path, "# 注释\nrun:\n  seed: 1\n", "b.yaml"))
        assert a.config_hash() == b.config_hash()
        b.set("run", "seed", 2)
        assert a.config_hash() != b.config_hash()
        assert a.metadata() == {"seed": 1, "config_hash": a.config_hash(), "noise_assumption": "gaussian"}


class TestErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "missing.yaml")

    def test_unknown_key(self, tmp_path):
        e = config_error(tmp_path, "run:\n  n_particles: 10\n  bogus: 1\n")
        assert e.line == 3 and e.key == "run.bogus"

    def test_unknown_section(self, tmp_path):
        e = config_error(tmp_path, "run:\n  seed: 1\nplots:\n  dpi: 300\n")
        assert e.line == 3

    def test_wrong_type(self, tmp_path):
        e = config_error(tmp_path, "run:\n  n_particles: ten\n")
        assert e.line == 2
        assert "第 2 行" in str(e)

    def test_invalid_beta(self, tmp_path):
        e = config_error(tmp_path, "rule:\n  name: gibbs\n  beta: -1.0\n")
        assert e.line == 3

    def test_invalid_batch_size(self, tmp_path):
        e = config_error(tmp_path, "run:\n  n_particles: 10\n  batch_size: 20\n")
        assert e.line == 3

    def test_yaml_syntax(self, tmp_path):
        e = config_error(tmp_path, "run:\n  n_particles: 10\n  box: [1, 2\n")
        assert e.line is not None

    def test_root_must_be_mapping(self, tmp_path):
        e = config_error(tmp_path, "- 1\n- 2\n")
        assert e.line == 1

    def test_box_order(self, tmp_path):
        e = config_error(tmp_path, "run:\n  box: [3, -3]\n")
        assert e.line == 2

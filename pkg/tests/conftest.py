import os

# 测试时不写日志文件; 必须在导入 batchcbo 之前设置
os.environ["LOG_FILE_PATH"] = ""
os.environ.setdefault("LOG_LEVEL", "WARNING")

from pathlib import Path

import numpy as np
import pytest

from batchcbo.core import NoiseModel, RecordOptions, RepresentativeRule, RunConfig, SchemeConfig, build_objective

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def rng():
    return np.random.default_rng(20210901)


@pytest.fixture
def config_dir():
    return CONFIG_DIR


def make_run_config(
    n_particles=4,
    dimension=2,
    batch_size=2,
    gamma=0.1,
    zeta=0.0,
    rule=None,
    objective="rastrigin",
    max_steps=300,
    tolerance=1e-300,
    seed=11,
    record=None,
    **kwargs,
):
    """测试里常用的小规模运行配置"""
    noise = NoiseModel.gaussian(zeta) if zeta > 0 else NoiseModel.none()
    return RunConfig(
        n_particles=n_particles,
        dimension=dimension,
        objective=build_objective(objective, dimension),
        rule=rule or RepresentativeRule.argmin(),
        scheme=SchemeConfig.generalized(gamma, noise),
        batch_size=batch_size,
        max_steps=max_steps,
        tolerance=tolerance,
        seed=seed,
        record=record or RecordOptions(),
        **kwargs,
    )

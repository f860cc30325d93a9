import numpy as np

from batchcbo.core import RepresentativeRule, RunConfig, SchemeConfig, NoiseModel, best_particle, build_objective, run
from batchcbo.utils.logger import get_log

_log = get_log()

objective = build_objective("rastrigin", 4)  # 4 维 Rastrigin, 全局最小点 (1, 1, 1, 1)

config = RunConfig(
    n_particles=100,
    dimension=4,
    objective=objective,
    rule=RepresentativeRule.argmin(),  # 代表点取批内最优粒子
    scheme=SchemeConfig.generalized(0.01, NoiseModel.gaussian(0.5)),  # γ = 0.01, 异质噪声 ζ = 0.5
    batch_size=10,  # 每步随机分成 10 个批
    seed=7,
)


if __name__ == "__main__":
    result = run(config)
    i, x, value = best_particle(result.final, objective)
    _log.info(f"{result.steps} 步后终止 ({result.reason.value}), 最优粒子 {i}: {np.round(x, 4)}, L = {value:.6g}")

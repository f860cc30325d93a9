# 字面常量
from enum import Enum

# 数值实验默认参数
DEFAULT_N_PARTICLES = 100
DEFAULT_GAMMA = 0.01
DEFAULT_ZETA = 0.5
DEFAULT_BATCH_SIZES = (100, 50, 10)  # 全批, P=50, P=10
DEFAULT_DIMENSIONS = (2, 3, 4, 5, 6, 7, 8, 9, 10)
DEFAULT_BOX = (-3.0, 3.0)  # 初始均匀分布的盒子
DEFAULT_TOLERANCE = 1e-3  # 停止准则 ε
DEFAULT_MAX_STEPS = 10_000
DEFAULT_SUCCESS_THRESHOLD = 0.25  # 成功判据 δ (无穷范数)
DEFAULT_RASTRIGIN_SHIFT = 1.0  # B_i
DEFAULT_RASTRIGIN_OFFSET = 0.0  # C
DEFAULT_REPLICATES = 200
DEFAULT_BASE_SEED = 20210901
DEFAULT_BETA = 30.0

# 数值容差
BOUND_TOLERANCE = 1e-10  # 所有不等式检查的绝对容差
ROW_SUM_TOLERANCE = 1e-10
DIAMETER_FLOOR = 1e-14  # 衰减拟合在直径低于此值处截断
MIN_FIT_POINTS = 3

# 资源上限
EXACT_ENUMERATION_CAP = 200_000  # |𝒜|^{m0} 精确枚举上限
EXACT_MAX_PARTICLES = 8
M0_SEARCH_NODE_CAP = 2_000_000  # 精确 m0 搜索的节点上限
TRANSITION_RECORDING_CAP = 64  # 记录转移矩阵时允许的最大 N

# 输出
FLOAT_FORMAT = "%.17g"
NOISE_ASSUMPTION = "gaussian"  # 噪声分布形状假设, 写入输出元数据
LOG_NAME_PREFIX = "cbo"


class Termination(Enum):
    # 运行终止原因
    TOLERANCE = "tolerance"
    MAX_STEPS = "max_steps"
    DIVERGED = "diverged"


class RuleKind(Enum):
    GIBBS = "gibbs"
    ARGMIN = "argmin"


class NoiseKind(Enum):
    NONE = "none"
    GAUSSIAN = "gaussian"
    SCHEME_A = "scheme_a"
    SCHEME_B = "scheme_b"
    SCHEME_C = "scheme_c"


class SchemeKind(Enum):
    GENERALIZED = "generalized"
    MODEL_A = "model_a"
    MODEL_B = "model_b"
    MODEL_C = "model_c"


class DecayMode(Enum):
    PATHWISE = "pathwise"
    EXPECTATION = "expectation"


__all__ = [
    "DEFAULT_N_PARTICLES",
    "DEFAULT_GAMMA",
    "DEFAULT_ZETA",
    "DEFAULT_BATCH_SIZES",
    "DEFAULT_DIMENSIONS",
    "DEFAULT_BOX",
    "DEFAULT_TOLERANCE",
    "DEFAULT_MAX_STEPS",
    "DEFAULT_SUCCESS_THRESHOLD",
    "DEFAULT_RASTRIGIN_SHIFT",
    "DEFAULT_RASTRIGIN_OFFSET",
    "DEFAULT_REPLICATES",
    "DEFAULT_BASE_SEED",
    "DEFAULT_BETA",
    "BOUND_TOLERANCE",
    "ROW_SUM_TOLERANCE",
    "DIAMETER_FLOOR",
    "MIN_FIT_POINTS",
    "EXACT_ENUMERATION_CAP",
    "EXACT_MAX_PARTICLES",
    "M0_SEARCH_NODE_CAP",
    "TRANSITION_RECORDING_CAP",
    "FLOAT_FORMAT",
    "NOISE_ASSUMPTION",
    "LOG_NAME_PREFIX",
    "Termination",
    "RuleKind",
    "NoiseKind",
    "SchemeKind",
    "DecayMode",
]

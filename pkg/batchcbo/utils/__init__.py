from batchcbo.utils.assets import *
from batchcbo.utils.file_io import (
    ensure_dir,
    format_float,
    read_csv,
    read_json,
    read_lines,
    to_builtin,
    write_csv,
    write_json,
    write_lines,
)
from batchcbo.utils.logger import get_log, setup_logging, tqdm

# config 依赖 core 中的构造函数, 使用时直接 from batchcbo.utils.config import ...

__all__ = [
    "get_log",
    "setup_logging",
    "tqdm",
    "ensure_dir",
    "format_float",
    "read_csv",
    "read_json",
    "read_lines",
    "to_builtin",
    "write_csv",
    "write_json",
    "write_lines",
    "Color",
    # literals
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
    "FLOAT_FORMAT",
    "NOISE_ASSUMPTION",
    "Termination",
    "RuleKind",
    "NoiseKind",
    "SchemeKind",
    "DecayMode",
    # custom errors
    "CBOError",
    "ConfigurationError",
    "UsageError",
    "PreconditionError",
    "DivergenceError",
    "NoConnectivityError",
    "ResourceLimitError",
    "EstimationError",
    "InapplicableError",
]

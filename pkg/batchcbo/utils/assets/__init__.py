# 静态资源


from batchcbo.utils.assets.cbo_custom_err import *
from batchcbo.utils.assets.color import Color
from batchcbo.utils.assets.literals import *

__all__ = [
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

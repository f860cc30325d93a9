from batchcbo.core.objectives import *
from batchcbo.core.ensemble import *
from batchcbo.core.batching import *
from batchcbo.core.consensus import *
from batchcbo.core.transitions import TransitionRecord
from batchcbo.core.dynamics import *

__all__ = [
    # objectives
    "ObjectiveFunction",
    "RastriginSpec",
    "Rastrigin",
    "Sphere",
    "rastrigin",
    "sphere",
    "build_objective",
    # ensemble
    "RngStream",
    "ParticleEnsemble",
    "column",
    "diameter",
    "column_diameters",
    "max_pairwise_inf_distance",
    "sample_initial",
    # batching
    "BatchPartition",
    "PartitionSchedule",
    "PM0Estimate",
    "M0Search",
    "sample_partition",
    "batch_of",
    "count_partitions",
    "enumerate_partitions",
    "connectivity_of",
    "connectivity_count",
    "exact_p_m0",
    "estimate_p_m0",
    "require_connectivity",
    "search_m0",
    "find_m0",
    # consensus
    "RepresentativeRule",
    "gibbs_weights",
    "representative",
    "weight_matrix",
    "build_rule",
    # dynamics
    "TransitionRecord",
    "NoiseModel",
    "SchemeConfig",
    "RecordOptions",
    "RunConfig",
    "RunResult",
    "step_params",
    "step",
    "scheme_step",
    "run",
    "best_objective_series",
    "best_particle",
    "save_series",
]

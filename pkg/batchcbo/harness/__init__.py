from batchcbo.harness.benchmark import *
from batchcbo.harness.decay import *
from batchcbo.harness.convergence import *
from batchcbo.harness.audit import *

__all__ = [
    "BenchmarkConfig",
    "BenchmarkCell",
    "BenchmarkTable",
    "ReplicateOutcome",
    "default_jobs",
    "success",
    "success_rate_by_threshold",
    "benchmark",
    "DecayFit",
    "DecayReport",
    "fit_log_decay",
    "estimate_decay",
    "ConvergenceReport",
    "convergence_check",
    "AuditReport",
    "audit_series",
    "monotonicity_audit",
    "diameter_violation_frequency",
]

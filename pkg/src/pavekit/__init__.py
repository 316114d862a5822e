"""pavekit: paving certificates and epsilon-Riesz partitions.

Small dense toolkit for splitting unit-norm Riesz families into pieces with
near-orthonormal bounds: correlation-minimizing partitions, Gram-Schmidt
triangularization, pavings of zero-diagonal matrices, and machine-checked
certificates for each inequality along the way.
"""

__version__ = "0.1.0"

from .instances import InstanceSpec, generate
from .linalg import (
    VectorFamily,
    gram,
    gram_schmidt,
    hermitian_eig_bounds,
    operator_norm,
    projection_residual,
)
from .partition import (
    LocalSearchTrace,
    Partition,
    brute_force_min_partition,
    hkw_local_search,
    partition_objective,
    step1_margin,
)
from .paving import (
    PavingCertificate,
    brute_force_paving,
    compress,
    heuristic_paving,
    paving_norm,
    strip_diagonal,
)
from .reduction import (
    ReductionConfig,
    ReductionReport,
    TriangularBlockData,
    choose_r,
    run_reduction,
    triangularize_block,
    verify_step2,
    verify_step3,
)
from .riesz import (
    EpsRieszCheck,
    EpsRieszReport,
    RieszBounds,
    eps_minimality_values,
    eps_riesz_report,
    is_eps_minimal,
    is_eps_riesz,
    riesz_bounds,
)

__all__ = [
    "EpsRieszCheck",
    "EpsRieszReport",
    "InstanceSpec",
    "LocalSearchTrace",
    "Partition",
    "PavingCertificate",
    "ReductionConfig",
    "ReductionReport",
    "RieszBounds",
    "TriangularBlockData",
    "VectorFamily",
    "brute_force_min_partition",
    "brute_force_paving",
    "choose_r",
    "compress",
    "eps_minimality_values",
    "eps_riesz_report",
    "generate",
    "gram",
    "gram_schmidt",
    "hermitian_eig_bounds",
    "heuristic_paving",
    "hkw_local_search",
    "is_eps_minimal",
    "is_eps_riesz",
    "operator_norm",
    "partition_objective",
    "paving_norm",
    "projection_residual",
    "riesz_bounds",
    "run_reduction",
    "step1_margin",
    "strip_diagonal",
    "triangularize_block",
    "verify_step2",
    "verify_step3",
]

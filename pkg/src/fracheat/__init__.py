"""Fast solvers for the time-fractional heat equation on graded meshes.

The temporal Caputo derivative is discretized with piecewise-linear
(L1-type) weights, the resulting dense lower-triangular history operator
is compressed into a hierarchical low-rank format, and the space-time
system is solved by multigrid waveform relaxation with zebra-in-time
line smoothing.
"""
from .analytic import (
    ErrorStudy,
    MittagLefflerError,
    exact_solution_1d,
    manufactured_2d,
    max_error,
    mittag_leffler,
    observed_orders,
)
from .hmatrix import (
    HMatrix,
    StorageReport,
    build,
    hmatvec,
    shifted_forward_solve,
    storage_report,
)
from .l1disc import (
    apply_caputo_dense,
    assemble_dense_R,
    d_coeff,
    d_diag,
    initial_lift,
)
from .mesh import (
    SpatialGrid,
    TemporalMesh,
    coarsen_space,
    make_graded_mesh,
    make_uniform_mesh,
)
from .problems import Problem, heat1d, heat2d
from .solver import CycleConfig, SolveReport, WaveformSolver

__version__ = "0.1.0"

__all__ = [
    "CycleConfig",
    "ErrorStudy",
    "HMatrix",
    "MittagLefflerError",
    "Problem",
    "SolveReport",
    "SpatialGrid",
    "StorageReport",
    "TemporalMesh",
    "WaveformSolver",
    "apply_caputo_dense",
    "assemble_dense_R",
    "build",
    "coarsen_space",
    "d_coeff",
    "d_diag",
    "exact_solution_1d",
    "heat1d",
    "heat2d",
    "hmatvec",
    "initial_lift",
    "make_graded_mesh",
    "make_uniform_mesh",
    "manufactured_2d",
    "max_error",
    "mittag_leffler",
    "observed_orders",
    "shifted_forward_solve",
    "storage_report",
    "__version__",
]

"""Total-variation recovery from Cartesian-line Fourier samples."""

__version__ = "0.1.0"

from .core_ops import (  # noqa: E402
    IndexSet2D,
    adjoint_diff,
    dft1,
    dft2,
    diff1,
    diff2,
    freq_range,
    idft1,
    idft2,
    project,
    tv_norm,
    tv_restricted,
)
from .sampling import SampleSet, cartesian_line_set, theorem_budget  # noqa: E402
from .solver import RecoveryProblem, SolverConfig, error_metrics, measure, solve_tv  # noqa: E402
from .structure import StructureReport, Support2D, gradient_supports, structure_summary  # noqa: E402

__all__ = [
    "IndexSet2D",
    "RecoveryProblem",
    "SampleSet",
    "SolverConfig",
    "StructureReport",
    "Support2D",
    "adjoint_diff",
    "cartesian_line_set",
    "dft1",
    "dft2",
    "diff1",
    "diff2",
    "error_metrics",
    "freq_range",
    "gradient_supports",
    "idft1",
    "idft2",
    "measure",
    "project",
    "solve_tv",
    "structure_summary",
    "theorem_budget",
    "tv_norm",
    "tv_restricted",
]

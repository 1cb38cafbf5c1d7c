"""Koopman operator learning with linear-radial product kernels.

Learns finite-rank Perron-Frobenius/Koopman approximations from snapshot data
by kernel EDMD, computes their spectra, and certifies asymptotic stability of
the equilibrium at the origin from the learned spectral radius plus an error
budget. The product of a linear kernel and a compactly supported Wendland
kernel makes the hypothesis space vanish at the equilibrium, which is what
ties the spectrum to stability.
"""

from .dynamics import (
    BlowupError,
    LinearFlowSystem,
    LinearMapSystem,
    SnapshotDataset,
    VanDerPol,
    flow,
    generate_snapshots,
    rk4_step,
)
from .edmd import EdmdModel, SolverError, default_beta, fit, koopman_matrix, objective
from .kernels import (
    GramMatrix,
    Kernel,
    LinearKernel,
    ProductKernel,
    WendlandKernel,
    gram,
)
from .predict import (
    PredictedTrajectory,
    StarvationWarning,
    predict_one_step,
    predict_trajectory,
)
from .spectral import (
    BoundConstants,
    CertificateResult,
    SpectrumReport,
    Verdict,
    bound_constants,
    certify_stability,
    learning_error_eps,
    sample_complexity,
    semigroup_products,
    spectrum,
)
from .wendland import PiecewisePoly1D, dimension_walk, truncated_power, wendland_profile

__version__ = "0.1.0"

__all__ = [
    "BlowupError",
    "BoundConstants",
    "CertificateResult",
    "EdmdModel",
    "GramMatrix",
    "Kernel",
    "LinearFlowSystem",
    "LinearKernel",
    "LinearMapSystem",
    "PiecewisePoly1D",
    "PredictedTrajectory",
    "ProductKernel",
    "SnapshotDataset",
    "SolverError",
    "SpectrumReport",
    "StarvationWarning",
    "VanDerPol",
    "Verdict",
    "WendlandKernel",
    "bound_constants",
    "certify_stability",
    "default_beta",
    "dimension_walk",
    "fit",
    "flow",
    "generate_snapshots",
    "gram",
    "koopman_matrix",
    "learning_error_eps",
    "objective",
    "predict_one_step",
    "predict_trajectory",
    "rk4_step",
    "sample_complexity",
    "semigroup_products",
    "spectrum",
    "truncated_power",
    "wendland_profile",
    "__version__",
]

"""Monte Carlo harness for jump-driven moment inequalities in coordinate
Banach spaces, two change-of-variables residual checks, and a 2D spectral
transport solver with jump noise."""

from importlib import metadata

try:
    __version__ = metadata.version("artifact")
except metadata.PackageNotFoundError:  # pragma: no cover - source tree use
    __version__ = "0.0.0"

from .spaces import NormedSpace, lq_space, sobolev_space
from .poisson import (
    MarkSpace,
    finite_marks,
    layered_marks,
    sample_jump_path,
    sample_jump_batch,
    sample_wiener,
)
from .integrals import (
    Integrand,
    Semigroup,
    identity_decay,
    integrate_compensated,
    integrate_counting,
    convolve,
    convolve_levy,
)
from .ito import (
    TestFunction,
    power_norm,
    tail_gauge,
    interlace,
    ito_residual_jump,
    ito_residual_levy,
)
from .inequalities import (
    ExperimentSpec,
    InequalityReport,
    bdg_report,
    compensation_report,
    convolution_maximal_report,
    kallenberg_report,
    levy_maximal_report,
    lp_report,
    small_p_reports,
    tail_report,
)
from .qge import (
    SpectralField,
    SpectralGrid,
    QGENoise,
    QGERun,
    energy_diagnostics,
    make_noise,
    nonlinear_term,
    ou_convolution_z,
    riesz_velocity,
    run_qge,
    sobolev_norm,
    solve_y,
    assemble_theta,
)

__all__ = [
    "__version__",
    "NormedSpace", "lq_space", "sobolev_space",
    "MarkSpace", "finite_marks", "layered_marks",
    "sample_jump_path", "sample_jump_batch", "sample_wiener",
    "Integrand", "Semigroup", "identity_decay",
    "integrate_compensated", "integrate_counting", "convolve", "convolve_levy",
    "TestFunction", "power_norm", "tail_gauge",
    "interlace", "ito_residual_jump", "ito_residual_levy",
    "ExperimentSpec", "InequalityReport",
    "bdg_report", "compensation_report", "convolution_maximal_report",
    "kallenberg_report", "levy_maximal_report", "lp_report",
    "small_p_reports", "tail_report",
    "SpectralField", "SpectralGrid", "QGENoise", "QGERun",
    "energy_diagnostics", "make_noise", "nonlinear_term", "ou_convolution_z",
    "riesz_velocity", "run_qge", "sobolev_norm", "solve_y", "assemble_theta",
]

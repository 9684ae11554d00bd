"""Stability toolkit for a target-cell-limited within-host infection model.

The package covers the frozen-T linear analysis end to end: coefficient
matrix assembly, three independent characteristic-polynomial routes, real
root isolation with sign classification, eigenvector formulas and
multiplicities, regime prediction tables, trajectory integration for the
time- and space-direction fields, integral-surface tracing with a
path-ordering mismatch diagnostic, and randomized validation suites.
"""

from .charpoly import (
    SystemMatrix,
    charpoly,
    charpoly_closed,
    charpoly_direct,
    charpoly_sum_form,
    charpoly_term_scale,
    coefficient_matrix,
    production_minor_det,
)
from .dynamics import (
    FieldSample,
    rank_check,
    sample_fields,
    time_field,
    time_rhs,
    x_field,
    x_rhs,
)
from .model import (
    FieldCoefficients,
    InvalidParamsError,
    ModelParams,
    StateVector,
    derived_rates,
    require_valid,
    target_cell_threshold,
    validate,
)
from .spectrum import (
    Classification,
    EigenspaceDecomposition,
    RootReport,
    SignPattern,
    SpectrumReport,
    algebraic_multiplicity,
    analyze,
    charpoly_derivative,
    classify,
    critical_points,
    eigenspace_decomposition,
    eigenvector,
    full_spectrum_numeric,
    geometric_multiplicity,
    predicted_sign_pattern,
    quadratic_roots,
    real_roots,
    sign_class,
    viral_pressure,
)
from .surface import (
    AsymptoticsVerdict,
    BlowUpError,
    SurfaceGrid,
    Trajectory,
    asymptotics,
    integrate_linearized,
    integrate_time,
    integrate_x,
    lie_bracket,
    linearized_time_field,
    trace_surface,
)
from .validation import SuiteResult, run_all, sample_params

__version__ = "0.1.0"

__all__ = [
    "AsymptoticsVerdict",
    "BlowUpError",
    "Classification",
    "EigenspaceDecomposition",
    "FieldCoefficients",
    "FieldSample",
    "InvalidParamsError",
    "ModelParams",
    "RootReport",
    "SignPattern",
    "SpectrumReport",
    "StateVector",
    "SuiteResult",
    "SurfaceGrid",
    "SystemMatrix",
    "Trajectory",
    "algebraic_multiplicity",
    "analyze",
    "asymptotics",
    "charpoly",
    "charpoly_closed",
    "charpoly_derivative",
    "charpoly_direct",
    "charpoly_sum_form",
    "charpoly_term_scale",
    "classify",
    "coefficient_matrix",
    "critical_points",
    "derived_rates",
    "eigenspace_decomposition",
    "eigenvector",
    "full_spectrum_numeric",
    "geometric_multiplicity",
    "integrate_linearized",
    "integrate_time",
    "integrate_x",
    "lie_bracket",
    "linearized_time_field",
    "predicted_sign_pattern",
    "production_minor_det",
    "quadratic_roots",
    "rank_check",
    "real_roots",
    "require_valid",
    "run_all",
    "sample_fields",
    "sample_params",
    "sign_class",
    "target_cell_threshold",
    "time_field",
    "time_rhs",
    "trace_surface",
    "validate",
    "viral_pressure",
    "x_field",
    "x_rhs",
]

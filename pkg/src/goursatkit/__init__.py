"""Solver kit for the characteristic (Goursat) problem of the sixth-order
operator D1^2 D2^4 u + sum a_ij D1^i D2^j u = g on a rectangle.

Boundary data can be given classically (edge values and derivatives, which
must satisfy corner agreement conditions) or non-classically (corner scalars
plus highest-order edge traces, which need no side conditions); the two forms
convert into each other exactly.  The solve reduces to a two-dimensional
Volterra integral equation of the second kind for the density v = D1^2 D2^4 u
and runs either Picard iteration or a direct triangular marching sweep.
"""

from .boundary import (
    AgreementReport,
    ClassicalData,
    CornerMismatch,
    Jet1D,
    NonClassicalData,
    check_agreement,
    to_classical,
    to_nonclassical,
)
from .errors import (
    ConvergenceError,
    GoursatKitError,
    GridMismatchError,
    IncompleteJetError,
    InvalidCoefficientError,
    InvalidParameterError,
    SchemaError,
    SingularNodeError,
)
from .grids import (
    MIXED_NORM_CONVENTION,
    Field1D,
    Field2D,
    Grid1D,
    Grid2D,
    cumulative_volterra_1d,
    lp_norm,
    mixed_norm,
)
from .mms import (
    ConvergenceTable,
    ErrorReport,
    PolySolution,
    TrigSolution,
    classical_from_oracle,
    convergence_study,
    error_report,
    manufacture,
    manufactured_rhs,
    nonclassical_from_oracle,
    oracle_derivative,
    oracle_jet,
    self_convergence_study,
    write_convergence_csv,
)
from .representation import (
    ALL_ORDERS,
    DENSITY_ORDER,
    JetField,
    MixedOrder,
    base_representation,
    boundary_part,
    reconstruct_jet,
    sobolev_norm_2_4,
    volterra_part,
)
from .solver import (
    COEFFICIENT_ORDERS,
    CoefficientReport,
    CoefficientSet,
    ProblemSpec,
    Solution,
    apply_volterra,
    assemble_forcing,
    class_tag,
    solve,
    solve_marching,
    solve_picard,
    step_x1,
    validate_coefficients,
)

__all__ = [
    "ALL_ORDERS",
    "AgreementReport",
    "COEFFICIENT_ORDERS",
    "ClassicalData",
    "CoefficientReport",
    "CoefficientSet",
    "ConvergenceError",
    "ConvergenceTable",
    "CornerMismatch",
    "DENSITY_ORDER",
    "ErrorReport",
    "Field1D",
    "Field2D",
    "GoursatKitError",
    "Grid1D",
    "Grid2D",
    "GridMismatchError",
    "IncompleteJetError",
    "InvalidCoefficientError",
    "InvalidParameterError",
    "Jet1D",
    "JetField",
    "MIXED_NORM_CONVENTION",
    "MixedOrder",
    "NonClassicalData",
    "PolySolution",
    "ProblemSpec",
    "SchemaError",
    "SingularNodeError",
    "Solution",
    "TrigSolution",
    "apply_volterra",
    "assemble_forcing",
    "base_representation",
    "boundary_part",
    "check_agreement",
    "class_tag",
    "classical_from_oracle",
    "convergence_study",
    "cumulative_volterra_1d",
    "error_report",
    "lp_norm",
    "manufacture",
    "manufactured_rhs",
    "mixed_norm",
    "nonclassical_from_oracle",
    "oracle_derivative",
    "oracle_jet",
    "reconstruct_jet",
    "self_convergence_study",
    "sobolev_norm_2_4",
    "solve",
    "solve_marching",
    "solve_picard",
    "step_x1",
    "to_classical",
    "to_nonclassical",
    "validate_coefficients",
    "volterra_part",
    "write_convergence_csv",
]

__version__ = "0.1.0"

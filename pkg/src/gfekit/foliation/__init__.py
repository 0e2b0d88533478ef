"""Automorphic and resolving systems, the worked quadruples and reconstruction."""
from .example3 import (
    Example3Pair,
    Window,
    equivalence_check,
    equivalent_solution,
    example3_pair_from_Q,
    example3_reduced_system,
    example3_residuals,
    rossby_window,
)
from .examples import (
    INTERVALS,
    c3_value,
    example1_quadruple,
    example1_radicand,
    example1_tilde,
    example2_parametric,
    example2_relations,
    example2_tilde,
)
from .quadruple import (
    AUTOMORPHIC_NAMES,
    RESOLVING_NAMES,
    ClosedQuadruple,
    FoliationError,
    ParametricQuadruple,
    ResidualSamples,
    TabulatedQuadruple,
    automorphic_residuals,
    resolving_residuals,
    resolving_system,
)
from .quartic import (
    ClosedFormRoot,
    LambdaOutOfRange,
    QuarticProblem,
    closed_form_root,
    lambda_image,
    lambda_of_S,
    quartic_coefficients,
    solve_S_for_lambda,
)
from .reconstruct import Collision, ReconstructConfig, Reconstruction, compare_with, default_branch, reconstruct_quadruple
from .table import dumps_table, loads_table, read_table, write_table

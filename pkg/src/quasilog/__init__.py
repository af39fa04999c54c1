"""Quasilinear logistic steady states through the dual change of variables u = f_kappa(v).

Modules: ``transform`` (f_kappa and derived maps), ``domain`` (grids, weights, the
Dirichlet Laplacian), ``eigen`` (principal eigenpairs), ``solver`` (positive solutions,
continuation, stability), ``large`` (radial blow-up solutions, Keller-Osserman),
``asymptotics`` (lambda and kappa sweeps) and ``cli`` (the ``quasilog`` command).
"""

from .domain import Grid, WeightField, assemble_laplacian, build_weight
from .eigen import EigenResult, principal_eigen
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    NumericError,
    PreconditionError,
    QuasilogError,
)
from .solver import DualProblem, SolverConfig, branch_continuation, solve_dual
from .transform import DualTransform

__all__ = [
    "ConfigurationError",
    "ConvergenceError",
    "DomainError",
    "DualProblem",
    "DualTransform",
    "EigenResult",
    "Grid",
    "NumericError",
    "PreconditionError",
    "QuasilogError",
    "SolverConfig",
    "WeightField",
    "assemble_laplacian",
    "branch_continuation",
    "build_weight",
    "principal_eigen",
    "solve_dual",
]
__version__ = "0.1.0"

"""Principal Dirichlet eigenpair of -Delta + V by shifted inverse power iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .domain import SymmetricOperator, assemble_laplacian, refuge_operator
from .errors import ConvergenceError, DomainError

EIG_TOL = 1e-10


@dataclass
class EigenResult:
    lambda1: float
    phi: np.ndarray
    iterations: int
    residual: float


def principal_eigen(op, tol=EIG_TOL, max_iter=5000):
    """Smallest eigenvalue of a symmetric operator and its positive eigenvector.

    The shift sits one unit below the Gershgorin lower bound, so the shifted matrix is
    positive definite and is factorized once.  Iterates until
    ||(A + V - lambda) phi||_2 <= tol ||phi||_2; phi is returned with max(phi) = 1.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    if not isinstance(op, SymmetricOperator):
        op = SymmetricOperator(sp.csr_matrix(op))
    if not op.is_symmetric():
        raise DomainError("principal_eigen needs a symmetric operator")
    M = op.full
    n = M.shape[0]
    shift = op.gershgorin_lower() - 1.0
    lu = spla.splu(sp.csc_matrix(M - shift * sp.identity(n)))
    x = np.ones(n) / np.sqrt(n)
    lam, res = np.nan, np.inf
    for it in range(1, max_iter + 1):
        y = lu.solve(x)
        x = y / np.linalg.norm(y)
        Mx = M @ x
        lam = float(x @ Mx)
        res = float(np.linalg.norm(Mx - lam * x))
        if res <= tol:
            break
    else:
        raise ConvergenceError("inverse power iteration did not converge", res, max_iter)
    if x.sum() < 0:
        x = -x
    scale = x.max()
    return EigenResult(lam, x / scale, it, res)


def lower_bound(op, result):
    """A value certified not to exceed the true principal eigenvalue.

    The Rayleigh quotient is within the residual of an eigenvalue (Krylov-Weinstein);
    a further allowance covers rounding in forming the quotient.
    """
    M = op.full if isinstance(op, SymmetricOperator) else sp.csr_matrix(op)
    anorm = float(abs(M).sum(axis=1).max())
    return result.lambda1 - result.residual - 16 * np.finfo(float).eps * anorm


def first_eigenvalue(grid, tol=EIG_TOL):
    """lambda_1 of the discrete Dirichlet Laplacian on ``grid``."""
    return principal_eigen(assemble_laplacian(grid), tol)


def discrete_laplacian_eigenvalue(grid, modes=None):
    """Closed-form eigenvalue sum_a (4/h_a^2) sin^2(k_a pi h_a / (2 L_a)) of the stencil."""
    modes = modes or (1,) * grid.dim
    return float(
        sum(4.0 / hh**2 * np.sin(k * np.pi * hh / (2.0 * L)) ** 2 for k, hh, L in zip(modes, grid.h, grid.lengths))
    )


def refuge_eigenvalue(grid, weight, tol=EIG_TOL):
    """lambda_{b,0} and the refuge eigenfunction extended by zero to all nodes."""
    res = principal_eigen(refuge_operator(grid, weight), tol)
    phi = np.zeros(grid.size)
    phi[weight.refuge] = res.phi
    return res.lambda1, phi

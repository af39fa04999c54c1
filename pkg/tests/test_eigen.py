import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from quasilog.domain import Grid, SymmetricOperator, assemble_laplacian, build_weight
from quasilog.eigen import (
    discrete_laplacian_eigenvalue,
    first_eigenvalue,
    lower_bound,
    principal_eigen,
    refuge_eigenvalue,
)
from quasilog.errors import DomainError

import oracles


def test_1d_matches_closed_form_spectrum():
    g = Grid.interval(0, 1, 199)
    res = first_eigenvalue(g)
    ref = oracles.laplacian_spectrum_1d(199)[0]
    assert abs(res.lambda1 - ref) <= 1e-9 * ref
    assert res.phi.max() == 1.0 and res.phi.min() > 0


@given(st.integers(2, 40), st.floats(0.5, 3.0))
def test_closed_form_formula_matches_dense_eigensolver(n, L):
    g = Grid.interval(0, L, n)
    dense = np.linalg.eigvalsh(assemble_laplacian(g).matrix.toarray())[0]
    assert np.isclose(discrete_laplacian_eigenvalue(g), dense, rtol=1e-10)


def test_2d_close_to_continuum():
    res = first_eigenvalue(Grid.rectangle((0, 1), (0, 1), 127))
    assert abs(res.lambda1 - 2 * np.pi**2) <= 1e-3 * 2 * np.pi**2


def test_rectangle_closed_form():
    g = Grid.rectangle((0, 2), (0, 1), (23, 11))
    assert np.isclose(first_eigenvalue(g).lambda1, discrete_laplacian_eigenvalue(g), rtol=1e-10)


def test_eigenvector_matches_sine_mode():
    g = Grid.interval(0, 1, 49)
    phi = first_eigenvalue(g).phi
    s = np.sin(np.pi * g.points[:, 0])
    assert np.allclose(phi, s / s.max(), atol=1e-9)


def test_potential_shifts_spectrum():
    g = Grid.interval(0, 1, 30)
    base = first_eigenvalue(g).lambda1
    shifted = principal_eigen(assemble_laplacian(g).with_potential(-7.5)).lambda1
    assert np.isclose(shifted, base - 7.5, rtol=1e-12)


def test_matches_dense_with_random_potential():
    rng = np.random.default_rng(3)
    g = Grid.rectangle((0, 1), (0, 1), 10)
    V = rng.uniform(-50, 50, g.size)
    op = assemble_laplacian(g).with_potential(V)
    ref = np.linalg.eigvalsh(op.full.toarray())[0]
    assert np.isclose(principal_eigen(op).lambda1, ref, rtol=1e-10)


def test_lower_bound_is_below_true_value():
    g = Grid.interval(0, 1, 199)
    op = assemble_laplacian(g)
    res = principal_eigen(op)
    exact = discrete_laplacian_eigenvalue(g)
    lb = lower_bound(op, res)
    assert lb < exact and exact - lb < 1e-8 * exact


def test_rejects_nonsymmetric_and_bad_tol():
    with pytest.raises(DomainError):
        principal_eigen(SymmetricOperator(sp.csr_matrix(np.array([[2.0, 1.0], [0.0, 2.0]]))))
    with pytest.raises(DomainError):
        principal_eigen(assemble_laplacian(Grid.interval(0, 1, 5)), tol=0)


def test_refuge_eigenvalue_above_lambda1(refuge_problem):
    assert refuge_problem.lambda_b0 > refuge_problem.lambda1
    lb0, phi = refuge_eigenvalue(refuge_problem.grid, refuge_problem.weight)
    assert np.all(phi[refuge_problem.weight.support] == 0)
    assert phi.max() == 1.0


def test_refuge_eigenvalue_decreases_as_support_shrinks():
    g = Grid.rectangle((0, 1), (0, 1), 31)
    big = refuge_eigenvalue(g, build_weight(g, "disk-bump", 1.0, (0.5, 0.5), 0.3))[0]
    small = refuge_eigenvalue(g, build_weight(g, "disk-bump", 1.0, (0.5, 0.5), 0.1))[0]
    lam1 = first_eigenvalue(g).lambda1
    assert lam1 < small < big

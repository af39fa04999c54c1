import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasilog import transform as T
from quasilog.errors import DomainError, PreconditionError
from quasilog.transform import DualTransform

import oracles

KAPPAS = [1e-3, 1e-1, 1.0, 10.0]
kappa_st = st.floats(1e-3, 10.0)
t_st = st.floats(1e-6, 1e3)


# inverse transform ---------------------------------------------------------------


def test_inverse_transform_trivial_values():
    assert T.inverse_transform(1.0, 0.0) == 0.0
    assert T.inverse_transform(0.0, 2.5) == 2.5


def test_inverse_transform_matches_quadrature():
    ref = oracles.F_quadrature(1.0, 1.0)
    assert abs(T.inverse_transform(1.0, 1.0) - ref) <= 1e-12 * ref


@pytest.mark.parametrize("kappa,u", [(1e-3, 0.3), (0.1, 5.0), (10.0, 2.0), (1.0, 40.0)])
def test_inverse_transform_matches_high_precision_integral(kappa, u):
    ref = float(oracles.F_mpmath(kappa, u))
    assert abs(T.inverse_transform(kappa, u) - ref) <= 2e-15 * ref


@given(kappa_st, st.floats(0, 1e3), st.floats(1e-9, 10))
def test_inverse_transform_strictly_increasing(kappa, u, du):
    assert T.inverse_transform(kappa, u + du) > T.inverse_transform(kappa, u)


def test_negative_arguments_rejected():
    with pytest.raises(DomainError):
        T.inverse_transform(-1.0, 1.0)
    with pytest.raises(DomainError):
        T.f(1.0, -0.5)
    with pytest.raises(DomainError):
        T.f(1.0, np.nan)


def test_tiny_kappa_is_identity():
    assert T.f(1e-15, 3.0) == 3.0
    assert DualTransform(1e-16, 2.0).is_identity


# f ---------------------------------------------------------------------------------


def test_f_trivial_values():
    assert T.f(1.0, 0.0) == 0.0
    assert T.f(0.0, 7.0) == 7.0


def test_f_matches_bisection():
    assert abs(T.f(1.0, 1.0) - oracles.f_bisection(1.0, 1.0)) <= 1e-12


@pytest.mark.parametrize("kappa,t", [(1.0, 0.5), (0.1, 3.0), (10.0, 1.0)])
def test_f_solves_its_defining_ode(kappa, t):
    assert abs(T.f(kappa, t) - oracles.f_ode(kappa, t)) <= 1e-12 * max(1.0, t)


@given(kappa_st, t_st)
def test_f_residual_contract(kappa, t):
    u = T.f(kappa, t)
    assert abs(T.inverse_transform(kappa, u) - t) <= 1e-13 * max(1.0, t)


def test_f_vectorized_matches_scalar():
    t = np.logspace(-6, 3, 50)
    vec = T.f(0.7, t)
    assert np.array_equal(vec, np.array([T.f(0.7, x) for x in t]))
    assert T.f(0.7, t.reshape(5, 10)).shape == (5, 10)


@given(kappa_st, st.floats(1e-3, 1e2))
def test_f_prime_matches_centered_difference(kappa, t):
    h = 1e-4 * t
    fd = oracles.centered_difference(lambda x: T.f(kappa, x), t, h)
    assert abs(T.f_prime(kappa, t) - fd) <= 1e-6


def test_f_prime_trivial_values():
    assert T.f_prime(1.0, 0.0) == 1.0
    assert T.f_prime(0.0, 3.0) == 1.0
    fd = oracles.centered_difference(lambda x: T.f(1.0, x), 2.0, 1e-5)
    assert abs(T.f_prime(1.0, 2.0) - fd) <= 1e-6


def test_f_second_values():
    assert T.f_second(1.0, 0.0) == 0.0
    assert T.f_second(0.0, 4.0) == 0.0
    fd = oracles.second_difference(lambda x: T.f(1.0, x), 1.0, 1e-4)
    assert abs(T.f_second(1.0, 1.0) - fd) <= 1e-5


@pytest.mark.parametrize("kappa", KAPPAS)
def test_f_second_ratio_form_agrees_where_well_conditioned(kappa):
    t = np.logspace(-1, 3, 100)
    fv = T.f(kappa, t)
    mask = 2 * kappa * fv**2 > 1e-2
    a, b = T.f_second(kappa, t[mask]), T.f_second_ratio(kappa, t[mask])
    assert np.all(np.abs(a - b) <= 1e-10 * np.abs(a))


# h and its inverse -----------------------------------------------------------------


def test_h_limits_and_definition():
    assert abs(T.h(1.0, 1e-12) - 1.0) <= 1e-6
    assert T.h(1.0, 0.0) == 1.0
    assert T.h(1.0, 10.0) < T.h(1.0, 1.0)
    assert abs(T.h(1.0, 1.0) - T.f(1.0, 1.0) * T.f_prime(1.0, 1.0)) <= 1e-12
    assert T.h(1.0, 1e9) < 1e-3


@given(kappa_st, st.floats(1e-4, 1e3), st.floats(1.001, 10))
def test_h_strictly_decreasing(kappa, t, factor):
    assert T.h(kappa, t * factor) < T.h(kappa, t)


@pytest.mark.parametrize("t0", [0.1, 1.0, 10.0])
def test_h_inverse_round_trip(t0):
    assert abs(T.h_inverse(1.0, T.h(1.0, t0)) - t0) <= 1e-8 * max(1, t0) * 10


def test_h_inverse_near_one_is_small():
    assert T.h_inverse(1.0, 1 - 1e-8) < 1e-3


def test_h_inverse_matches_bisection_oracle():
    ref = oracles.bisect_decreasing(lambda t: T.h(1.0, t), 0.5, 0.0, 100.0)
    got = T.h_inverse(1.0, 0.5)
    assert abs(T.h(1.0, got) - 0.5) <= 1e-10
    assert abs(got - ref) <= 1e-9 * ref


@given(kappa_st, st.floats(0.01, 0.98), st.floats(0.001, 0.01))
def test_h_inverse_strictly_decreasing(kappa, y, dy):
    assert T.h_inverse(kappa, y + dy) < T.h_inverse(kappa, y)


def test_h_inverse_domain():
    for y in (0.0, 1.0, 1.5, -0.1):
        with pytest.raises(DomainError):
            T.h_inverse(1.0, y)
    with pytest.raises(PreconditionError):
        T.h_inverse(0.0, 0.5)


# g ---------------------------------------------------------------------------------


def test_g_examples():
    assert T.g(4, 1e-12) < 1e-6
    assert T.g(4, 0.0) == 0.0
    assert T.g(4, 2.0) > T.g(4, 1.0)
    assert T.g(4, 9.0) >= T.g(4, 1.0) * 9**1.5
    with pytest.raises(DomainError):
        T.g(4, -1.0)
    with pytest.raises(DomainError):
        T.g(1.0, 1.0)


@given(st.floats(3.01, 8), st.floats(1e-5, 1e3), st.floats(1.001, 5))
def test_g_over_t_increasing_for_p_above_three(p, t, factor):
    assert T.g(p, t * factor) / (t * factor) > T.g(p, t) / t


@given(st.floats(1.1, 8), st.floats(1.0, 1e3))
def test_g_power_lower_bound(p, t):
    assert T.g(p, t) >= T.g(p, 1.0) * t ** ((p - 1) / 2) * (1 - 1e-13)


# reaction terms ----------------------------------------------------------------------


def test_reaction_examples():
    assert T.reaction(1.0, 3.0, 5.0, 2.0, 0.0) == 0.0
    t = np.linspace(0, 3, 7)
    assert np.allclose(T.reaction(0.0, 3.0, 5.0, 2.0, t), 5 * t - 2 * t**3, rtol=1e-15, atol=0)
    fv, fp = T.f(1.0, 2.0), T.f_prime(1.0, 2.0)
    assert abs(T.reaction(1.0, 3.0, 10.0, 1.0, 2.0) - (10 * fv * fp - fv**3 * fp)) <= 1e-12


def test_reaction_derivative_examples():
    t = np.linspace(0, 2, 5)
    assert np.allclose(T.reaction_derivative(0.0, 3.0, 5.0, 2.0, t), 5 - 3 * 2 * t**2, rtol=1e-14, atol=1e-14)
    assert T.reaction_derivative(1.0, 3.0, 5.0, 2.0, 0.0) == 5.0
    fd = oracles.centered_difference(lambda x: T.reaction(1.0, 3.0, 10.0, 1.0, x), 1.5, 1e-5)
    assert abs(T.reaction_derivative(1.0, 3.0, 10.0, 1.0, 1.5) - fd) <= 1e-6


def test_reaction_derivative_matches_finite_differences_at_random_points():
    rng = np.random.default_rng(0)
    for _ in range(100):
        kappa = 10 ** rng.uniform(-3, 1)
        p = rng.uniform(1.5, 6)
        lam, b = rng.uniform(0, 50), rng.uniform(0, 10)
        t = 10 ** rng.uniform(-2, 1.5)
        fd = oracles.centered_difference(lambda x: T.reaction(kappa, p, lam, b, x), t, 1e-6 * t)
        exact = T.reaction_derivative(kappa, p, lam, b, t)
        assert abs(exact - fd) <= 1e-6 * max(1.0, abs(exact))


def test_dual_transform_bundle():
    tr = DualTransform(0.5, 4.0)
    assert tr.f(2.0) == T.f(0.5, 2.0)
    assert tr.reaction(3.0, 1.0, 2.0) == T.reaction(0.5, 4.0, 3.0, 1.0, 2.0)
    assert tr.with_kappa(0.1).kappa == 0.1
    with pytest.raises(DomainError):
        DualTransform(-1.0, 3.0)
    with pytest.raises(DomainError):
        DualTransform(1.0, 1.0)

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from quasilog import properties as P
from quasilog import transform as T

import oracles


@given(st.floats(1e-3, 10.0), st.lists(st.floats(1e-6, 1e3), min_size=2, max_size=30))
def test_elementary_bounds_hold_on_arbitrary_samples(kappa, ts):
    viol = P.bound_violations(kappa, np.array(ts))
    assert all(v <= 1e-12 for v in viol.values()), viol


def test_bound_violations_detect_a_broken_bound(monkeypatch):
    monkeypatch.setattr(T, "f", lambda kappa, t: 1.01 * np.asarray(t, dtype=float))
    assert P.bound_violations(1.0, P.log_samples(count=20))["range"] > 1e-3


def test_exact_ratio_form_matches_high_precision():
    fv = np.array([1e-9, 1e-3, 0.5, 20.0])
    got = P.exact_ratio_form(0.1, fv)
    import mpmath as mp

    with mp.workdps(50):
        ref = []
        for x in fv:
            s = 1 + 2 * mp.mpf(0.1) * mp.mpf(x) ** 2
            ref.append(float((1 / s**2 - 1 / s) / mp.mpf(x)))
    assert np.allclose(got, ref, rtol=1e-15, atol=0)


def test_float_ratio_form_cancels_but_exact_form_does_not():
    t = np.array([1e-6])
    a = T.f_second(1e-3, t)
    assert abs(T.f_second_ratio(1e-3, t)[0] - a[0]) > 1e-6 * abs(a[0])
    assert P.second_derivative_identity(1e-3, t) <= 1e-14


def test_monotonicity_counters():
    t = P.log_samples()
    assert P.kappa_monotonicity_violations([10.0, 1.0, 0.1, 1e-3], t) == 0
    assert P.h_monotonicity_violations(1.0, t) == 0
    assert P.power_ratio_violations(1.0, 3.0, t) == 0
    assert P.g_ratio_violations(4.0, t) == 0
    assert P.g_power_bound_violation(4.0, t) <= 0


@given(st.floats(1e-3, 10.0), st.floats(3.0, 7.0))
def test_power_ratio_increasing_for_p_at_least_three(kappa, p):
    assert P.power_ratio_violations(kappa, p, np.logspace(-5, 3, 60)) == 0


def test_power_ratio_vanishes_at_zero():
    vals = [T.f(1.0, t) ** 3 * T.f_prime(1.0, t) / t for t in (1e-2, 1e-4, 1e-6)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-10


def test_round_trip_against_bisection():
    t = np.logspace(-3, 3, 25)
    ref = np.array([oracles.f_bisection(1.0, x) for x in t])
    assert np.max(np.abs(T.f(1.0, t) - ref) / ref) <= 1e-13

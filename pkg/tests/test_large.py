import numpy as np
import pytest

from quasilog import transform as T
from quasilog.domain import Grid, build_weight
from quasilog.errors import ConfigurationError, ConvergenceError, PreconditionError
from quasilog.large import (
    G_primitive,
    RadialProblem,
    compact_bound_check,
    default_layer,
    graded_mesh,
    keller_osserman_margin,
    minimal_large_solution,
    solve_dirichlet_ball,
    write_profile_csv,
)
from quasilog.transform import DualTransform

import oracles


def test_graded_mesh_shape():
    r = graded_mesh(1.0, 40)
    assert r[0] == 0 and r[-1] == 1 and len(r) == 41
    w = np.diff(r)
    layer = default_layer(40)
    assert np.allclose(w[-layer + 1 :] / w[-layer:-1], 0.9)
    assert np.allclose(np.diff(graded_mesh(2.0, 10, layer=0)), 0.2)
    with pytest.raises(ValueError):
        graded_mesh(1.0, 3)
    with pytest.raises(ValueError):
        graded_mesh(1.0, 10, layer=10)


@pytest.mark.parametrize("absorption,p", [("power", 2.0), ("g", 4.0)])
def test_one_dimensional_ball_matches_mirrored_interval(absorption, p):
    R, lam, b0, M, n = 0.5, 5.0, 2.0, 3.0, 60
    prob = RadialProblem(1, R, lam, b0, p, mesh_n=n, absorption=absorption, layer=0)
    prof = solve_dirichlet_ball(1, R, lam, b0, p, M, problem=prob)
    if absorption == "power":
        G, dG = (lambda t: t**p), (lambda t: p * t ** (p - 1))
    else:
        G = lambda t: T.g(p, t)  # noqa: E731
        dG = lambda t: np.array([oracles.centered_difference(lambda s: T.g(p, s), x, 1e-6 * x) for x in t])  # noqa: E731
    x, ref = oracles.mirrored_dirichlet_1d(R, lam, b0, G, dG, M, n)
    assert np.allclose(x, prof.r, atol=1e-14)
    assert np.max(np.abs(prof.values - ref)) <= 1e-7 * M


def test_constant_boundary_data_reproduced_without_reaction():
    # with lam = 0 and negligible absorption the solution is the boundary constant
    prof = solve_dirichlet_ball(2, 1.0, 0.0, 1e-12, 2.0, 5.0, mesh_n=40, absorption="power")
    assert np.allclose(prof.values, 5.0, rtol=1e-9)


def test_profiles_increase_with_boundary_value():
    profs = [solve_dirichlet_ball(2, 0.3, 100.0, 1.0, 4.0, M, mesh_n=200) for M in (10.0, 100.0, 1000.0)]
    for a, b in zip(profs, profs[1:]):
        assert np.all(b.values > a.values)


def test_zero_lambda_solution_below_boundary_value():
    prof = solve_dirichlet_ball(2, 0.3, 0.0, 50.0, 4.0, 2.0, mesh_n=200)
    assert np.all(prof.values <= 2.0 + 1e-12) and prof.values[0] < 2.0


def test_minimal_large_solution_stabilizes():
    prof = minimal_large_solution(2, 0.3, 100.0, 1.0, 4.0)
    assert prof.is_large
    diffs = [d for _, d in prof.history]
    assert diffs[-1] <= 1e-6
    peak = int(np.argmax(diffs))
    assert np.all(np.diff(diffs[peak:]) < 0)
    assert prof.interior_max() > 0


def test_large_solution_preconditions():
    with pytest.raises(PreconditionError):
        minimal_large_solution(2, 0.3, 100.0, 1.0, 2.0)
    with pytest.raises(PreconditionError):
        solve_dirichlet_ball(2, 0.3, 1.0, 1.0, 4.0, -1.0)
    with pytest.raises(PreconditionError):
        RadialProblem(0, 0.3, 1.0, 1.0, 4.0)


def test_exploratory_run_with_small_exponent_does_not_settle():
    # G(t) ~ t^(3/2) for p = 2: Keller-Osserman fails and the M-limit blows up
    sched = [10.0 * 4.0**k for k in range(8)]
    with pytest.raises(ConvergenceError), np.errstate(over="ignore", invalid="ignore"):
        minimal_large_solution(2, 0.3, 10.0, 1.0, 2.0, mesh_n=200, schedule=sched, exploratory=True)


def test_power_absorption_with_bump_weight():
    prof = minimal_large_solution(2, 0.25, 150.0, 1000.0, 4.0, absorption="power", weight="bump")
    assert prof.is_large and np.all(np.isfinite(prof.values[:-1]))


def test_profile_csv(tmp_path):
    prof = solve_dirichlet_ball(2, 0.3, 1.0, 1.0, 4.0, 10.0, mesh_n=50)
    write_profile_csv(tmp_path / "p.csv", prof)
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "r,value,M_tag" and len(lines) == 52
    assert lines[-1].endswith(",10.0")


def test_G_primitive_against_quadrature():
    from scipy.integrate import quad

    for t in (0.5, 3.0, 200.0):
        ref = quad(lambda s: T.g(4.0, s), 0, t, epsabs=0, epsrel=1e-12, limit=200)[0]
        assert abs(G_primitive(4.0, t)[0] - ref) <= 1e-11 * ref


@pytest.mark.parametrize("p,T_", [(3.5, 1e2), (4.0, 1e3)])
def test_ko_partial_against_nested_quadrature(p, T_):
    m = keller_osserman_margin(p, T_)
    ref = oracles.ko_partial_quad(p, T_, lambda s: T.g(p, s))
    assert abs(m.partial - ref) <= 1e-8 * ref


def test_ko_tail_bound_dominates_increment_and_decays():
    a, b = keller_osserman_margin(4.0, 1e3), keller_osserman_margin(4.0, 1e4)
    assert a.exponent == 1.25 and a.exponent > 1
    assert b.partial - a.partial <= a.tail_bound
    assert b.tail_bound < a.tail_bound
    assert keller_osserman_margin(5.0, 1e3).tail_bound < a.tail_bound
    with pytest.raises(PreconditionError):
        keller_osserman_margin(3.0, 1e3)


def test_compact_bound_check_and_heavier_weight_lowers_cap():
    grid = Grid.rectangle((0, 1), (0, 1), 31)
    w = build_weight(grid, "disk-bump", 1000.0, (0.5, 0.5), 0.25)
    trs = [DualTransform(k, 4.0) for k in (0.5, 0.1)]
    lam = 150.0
    rep = compact_bound_check(grid, w, trs, lam, (0.5, 0.5), 0.1)
    assert rep.all_below and rep.ball_radius == 0.2
    w4 = build_weight(grid, "disk-bump", 4000.0, (0.5, 0.5), 0.25)
    rep4 = compact_bound_check(grid, w4, trs[:1], lam, (0.5, 0.5), 0.1)
    assert rep4.cap < rep.cap
    with pytest.raises(ConfigurationError):
        compact_bound_check(grid, w, trs, lam, (0.5, 0.5), 0.2)

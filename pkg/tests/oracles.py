"""Independent reference computations used by the tests.

None of these call into the code under test except for the scalar maps they are meant
to check against (they reimplement the underlying mathematics by a different route).
"""

from __future__ import annotations

import mpmath as mp
import numpy as np
from scipy import optimize
from scipy.integrate import quad


def F_quadrature(kappa, u):
    """int_0^u sqrt(1 + 2 kappa s^2) ds by adaptive Gauss-Kronrod."""
    val, _ = quad(lambda s: np.sqrt(1.0 + 2.0 * kappa * s * s), 0.0, u, epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def F_mpmath(kappa, u, dps=40):
    with mp.workdps(dps):
        return mp.quad(lambda s: mp.sqrt(1 + 2 * mp.mpf(kappa) * s * s), [0, u])


def f_bisection(kappa, t, tol=1e-15):
    """Root of F(u) = t by plain bisection on [0, max(t, 1)] with the closed form of F."""

    def F(u):
        c = np.sqrt(2.0 * kappa)
        return 0.5 * u * np.sqrt(1.0 + 2.0 * kappa * u * u) + np.arcsinh(c * u) / (2.0 * c)

    lo, hi = 0.0, max(t, 1.0)
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if F(mid) < t:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def f_ode(kappa, t):
    """f_kappa(t) by integrating f' = (1 + 2 kappa f^2)^(-1/2) with mpmath's ODE solver."""
    with mp.workdps(30):
        sol = mp.odefun(lambda s, y: 1 / mp.sqrt(1 + 2 * mp.mpf(kappa) * y * y), 0, 0)
        return float(sol(t))


def centered_difference(fun, x, h):
    return (fun(x + h) - fun(x - h)) / (2.0 * h)


def second_difference(fun, x, h):
    return (fun(x + h) - 2.0 * fun(x) + fun(x - h)) / h**2


def bisect_decreasing(fun, y, lo, hi, tol=1e-14):
    """Solve fun(t) = y for a decreasing fun on [lo, hi]."""
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if fun(mid) > y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dense_laplacian_1d(n, L=1.0):
    h = L / (n + 1)
    return (2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)) / h**2


def dense_laplacian_2d(n, L=1.0):
    """Five-point Laplacian assembled by explicit neighbour loops (row-major nodes)."""
    h = L / (n + 1)
    N = n * n
    A = np.zeros((N, N))
    for i in range(n):
        for j in range(n):
            k = i * n + j
            A[k, k] = 4.0 / h**2
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ii, jj = i + di, j + dj
                if 0 <= ii < n and 0 <= jj < n:
                    A[k, ii * n + jj] = -1.0 / h**2
    return A


def laplacian_spectrum_1d(n, L=1.0):
    h = L / (n + 1)
    k = np.arange(1, n + 1)
    return 4.0 / h**2 * np.sin(k * np.pi * h / (2 * L)) ** 2


def logistic_1d(n, lam, b, p, guess):
    """Classical logistic problem -v'' = lam v - b v^p on (0,1), zero Dirichlet data.

    Dense matrix and scipy.optimize.root (hybrid Powell), independent of the package solver.
    """
    A = dense_laplacian_1d(n)

    def F(v):
        return A @ v - lam * v + b * np.abs(v) ** p

    def J(v):
        return A - lam * np.eye(n) + np.diag(b * p * np.abs(v) ** (p - 1))

    sol = optimize.root(F, guess, jac=J, method="hybr", tol=1e-14)
    scale = np.max(np.abs(A @ sol.x)) + 1.0
    if np.max(np.abs(F(sol.x))) > 1e-10 * scale:
        raise RuntimeError(sol.message)
    return sol.x


def mirrored_dirichlet_1d(R, lam, b0, G, dG, M, n):
    """-v'' = lam v - b0 G(v) on [-R, R], v(+-R) = M, uniform mesh with 2n cells.

    Solved with dense Newton on the full interval; returns (x >= 0 nodes, values).
    """
    h = R / n
    m = 2 * n - 1
    A = (2.0 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)) / h**2
    rhs_bc = np.zeros(m)
    rhs_bc[0] = rhs_bc[-1] = M / h**2

    def F(v):
        return A @ v - rhs_bc - lam * v + b0 * G(v)

    v = np.full(m, float(M))
    for _ in range(100):
        r = F(v)
        J = A - lam * np.eye(m) + np.diag(b0 * dG(v))
        dv = np.linalg.solve(J, -r)
        v = v + dv
        if np.max(np.abs(dv)) < 1e-13 * max(1.0, np.max(np.abs(v))):
            break
    x = -R + h * np.arange(1, 2 * n)
    keep = x >= -1e-14
    xs = np.concatenate([x[keep], [R]])
    return xs, np.concatenate([v[keep], [M]])


def ko_partial_quad(p, T, g):
    """int_1^T dt / sqrt(G(t)) with nested adaptive quadrature."""
    G1 = quad(g, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200)[0]

    def G(t):
        return G1 + quad(g, 1.0, t, epsabs=0.0, epsrel=1e-12, limit=200)[0]

    return quad(lambda t: 1.0 / np.sqrt(G(t)), 1.0, T, epsabs=0.0, epsrel=1e-10, limit=200)[0]

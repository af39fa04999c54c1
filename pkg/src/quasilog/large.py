"""Radial boundary blow-up solutions on balls and the Keller-Osserman integral.

Radial problems -v'' - (N-1)/r v' = lam v - b(r) G(v) on [0, R] with v'(0) = 0 and
v(R) = M are discretized on a mesh that is uniform in the interior and geometrically
refined (ratio 0.9) towards r = R.  The absorption G is either the map g of the dual
transform or the pure power t^p; the weight b(r) is either constant or the squared hinge
b0 (1 - r^2/R^2)^2 used for the disk bump.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from . import transform
from .errors import ConfigurationError, ConvergenceError, PreconditionError

RADIAL_TOL = 1e-9
GRADING = 0.9


@dataclass
class RadialProfile:
    r: np.ndarray
    values: np.ndarray
    N: int
    M: float
    iterations: int = 0
    residual: float = 0.0
    history: list = field(default_factory=list, repr=False)

    @property
    def is_large(self):
        return np.isinf(self.M)

    def __call__(self, radius):
        """Linear interpolation of the profile at the given radii."""
        return np.interp(radius, self.r, self.values)

    def interior_max(self, fraction=0.5):
        return float(np.max(self.values[self.r <= fraction * self.r[-1] + 1e-14]))


def default_layer(n):
    """Two thirds of the cells go to the geometric layer (smallest cell ~ 0.9^(2n/3) R / (n/3))."""
    return (2 * n) // 3


def graded_mesh(R, n, ratio=GRADING, layer=None):
    """Nodes 0 = r_0 < ... < r_n = R; the last ``layer`` cells shrink by ``ratio`` each."""
    if n < 4:
        raise ValueError("need at least 4 cells")
    layer = default_layer(n) if layer is None else layer
    if not 0 <= layer < n:
        raise ValueError("layer must leave at least one uniform cell")
    nu = n - layer
    widths = np.concatenate([np.ones(nu), ratio ** np.arange(1, layer + 1)])
    widths *= R / widths.sum()
    return np.concatenate([[0.0], np.cumsum(widths[:-1]), [R]])


def _absorption(kind, p):
    if kind == "g":
        return (lambda t: transform.g(p, t)), (lambda t: _dg(p, t))
    if kind == "power":
        return (lambda t: t**p), (lambda t: p * t ** (p - 1))
    raise ValueError(f"unknown absorption {kind!r}")


def _dg(p, t):
    # g = f^(p+1)/t, g' = (p+1) f^p f'/t - f^(p+1)/t^2
    t = np.asarray(t, dtype=float)
    fv = np.asarray(transform.f(1.0, t))
    fp = 1.0 / np.sqrt(1.0 + 2.0 * fv * fv)
    with np.errstate(invalid="ignore", divide="ignore"):
        d = (p + 1) * fv**p * fp / t - fv ** (p + 1) / t**2
    return np.where(t > 0, d, 0.0)


def weight_profile(kind, b0, R):
    if kind == "constant":
        return lambda r: np.full_like(np.asarray(r, dtype=float), b0)
    if kind == "bump":
        return lambda r: b0 * np.maximum(0.0, 1.0 - (np.asarray(r) / R) ** 2) ** 2
    raise ValueError(f"unknown weight profile {kind!r}")


class RadialProblem:
    """Finite-difference radial operator on a graded mesh (tridiagonal, stored banded)."""

    def __init__(self, N, R, lam, b0, p, mesh_n=400, absorption="g", weight="constant", layer=None):
        if N < 1 or not R > 0 or not b0 > 0 or not p > 1:
            raise PreconditionError("need N >= 1, R > 0, b0 > 0, p > 1")
        self.N, self.R, self.lam, self.b0, self.p = N, float(R), float(lam), float(b0), float(p)
        self.r = graded_mesh(R, mesh_n, layer=layer)
        self.G, self.dG = _absorption(absorption, p)
        self.b = weight_profile(weight, b0, R)(self.r[:-1])
        r = self.r
        n = len(r) - 1
        lo, di, up = np.zeros(n), np.zeros(n), np.zeros(n)
        hm = np.diff(r)[: n - 1]  # r_i - r_{i-1}, i = 1..n-1
        hp = np.diff(r)[1:]  # r_{i+1} - r_i
        ri = r[1:n]
        # -v'' with the three-point nonuniform formula
        c_m = 2.0 / (hm * (hm + hp))
        c_p = 2.0 / (hp * (hm + hp))
        # -(N-1)/r v' with the second-order weighted central difference
        d_m = -hp / (hm * (hm + hp))
        d_p = hm / (hp * (hm + hp))
        d_0 = (hp - hm) / (hm * hp)
        k = (N - 1) / ri
        lo[1:] = -c_m - k * d_m
        up[1:] = -c_p - k * d_p
        di[1:] = c_m + c_p - k * d_0
        # center: -N v''(0) with a ghost node enforcing v'(0) = 0
        h0 = r[1] - r[0]
        di[0] = 2.0 * N / h0**2
        up[0] = -2.0 * N / h0**2
        self.lower, self.diag, self.upper = lo, di, up
        self.n = n

    def equilibrium(self):
        """The constant t* > 0 with lam t* = max(b) G(t*), or 0 when lam <= 0."""
        if self.lam <= 0:
            return 0.0
        bmax = float(self.b.max())
        lo, hi = 0.0, 1.0
        while bmax * self.G(hi) < self.lam * hi:
            lo, hi = hi, 2.0 * hi
        return float(brentq(lambda t: bmax * self.G(t) - self.lam * t, max(lo, 1e-300), hi))

    def apply(self, v, M):
        """Discrete -Laplacian of the unknowns v_0..v_{n-1} with v_n = M."""
        out = self.diag * v
        out[1:] += self.lower[1:] * v[:-1]
        out[:-1] += self.upper[:-1] * v[1:]
        out[-1] += self.upper[-1] * M
        return out

    def residual(self, v, M):
        return self.apply(v, M) - self.lam * v + self.b * self.G(v)

    def scaled_residual(self, v, M):
        """Residual divided by the magnitude of the terms it balances."""
        vv = np.append(v, M)
        nb = np.maximum(np.abs(vv[:-1]), np.maximum(np.abs(np.roll(vv, 1)[:-1]), np.abs(vv[1:])))
        scale = (np.abs(self.diag) + np.abs(self.lower) + np.abs(self.upper)) * nb
        scale += np.abs(self.lam * v) + self.b * self.G(v) + 1.0
        return np.abs(self.residual(v, M)) / scale

    def newton(self, M, init, tol=RADIAL_TOL, max_iter=200):
        v = np.maximum(np.asarray(init, dtype=float).copy(), 0.0)
        F = self.residual(v, M)
        merit = np.max(self.scaled_residual(v, M))
        norm = np.linalg.norm(F)
        for it in range(1, max_iter + 1):
            ab = np.zeros((3, self.n))
            ab[0, 1:] = self.upper[:-1]
            ab[1] = self.diag - self.lam + self.b * self.dG(v)
            ab[2, :-1] = self.lower[1:]
            delta = solve_banded((1, 1), ab, -F)
            alpha = 1.0
            while True:
                trial = np.maximum(v + alpha * delta, 0.0)
                m_trial = np.max(self.scaled_residual(trial, M))
                n_trial = np.linalg.norm(self.residual(trial, M))
                if m_trial < merit or n_trial < norm or m_trial <= tol:
                    break
                alpha *= 0.5
                if alpha < 1e-12:
                    raise ConvergenceError("radial Newton line search failed", merit, it)
            step = np.max(np.abs(trial - v) / np.maximum(1.0, np.abs(trial)))
            v, merit = trial, m_trial
            F = self.residual(v, M)
            norm = np.linalg.norm(F)
            if merit <= tol and step <= 1e-12:
                return v, it, merit
            if merit <= tol * 1e-3:
                return v, it, merit
        raise ConvergenceError("radial Newton did not converge", merit, max_iter)


def solve_dirichlet_ball(N, R, lam, b0, p, M, mesh_n=400, *, absorption="g", weight="constant", init=None,
                         problem=None, layer=None):
    """Positive radial solution of -Delta v = lam v - b G(v) in B_R with v = M on the sphere."""
    if not M > 0:
        raise PreconditionError("boundary value M must be positive")
    prob = problem or RadialProblem(N, R, lam, b0, p, mesh_n, absorption, weight, layer)
    if init is None:
        init = np.full(prob.n, max(float(M), prob.equilibrium()))
    v, it, res = prob.newton(M, init)
    if np.any(v <= 0):
        raise ConvergenceError("radial Newton produced a non-positive profile", res, it)
    return RadialProfile(prob.r, np.append(v, M), N, float(M), it, float(res))


def minimal_large_solution(N, R, lam, b0, p, mesh_n=400, schedule=None, *, absorption="g", weight="constant",
                           tol=1e-6, max_doublings=400, exploratory=False):
    """M -> infinity limit of Dirichlet profiles, tagged M = inf.

    Doubles M along ``schedule`` (default 10 * 2^k) until consecutive profiles differ by
    at most ``tol`` on [0, R/2].  ``history`` records (M, interior difference) pairs.
    With absorption g the limit needs p > 3; other p run only with ``exploratory=True``.
    """
    if absorption == "g" and p <= 3 and not exploratory:
        raise PreconditionError("minimal large solution with absorption g requires p > 3")
    prob = RadialProblem(N, R, lam, b0, p, mesh_n, absorption, weight)
    schedule = schedule if schedule is not None else (10.0 * 2.0**k for k in range(max_doublings))
    inner = prob.r <= 0.5 * R + 1e-14
    prev, history = None, []
    total_it = 0
    for M in schedule:
        init = None if prev is None else np.append(prev.values[:-2], [prev.values[-2]]) * 1.0
        prof = solve_dirichlet_ball(N, R, lam, b0, p, M, problem=prob, init=init)
        total_it += prof.iterations
        if prev is not None:
            diff = float(np.max(np.abs(prof.values[inner] - prev.values[inner])))
            history.append((float(M), diff))
            if diff <= tol:
                return RadialProfile(prof.r, prof.values, N, np.inf, total_it, prof.residual, history)
        prev = prof
    last = history[-1][1] if history else np.nan
    raise ConvergenceError("interior profile did not stabilize over the M schedule", last, len(history))


def write_profile_csv(path, profile):
    """Columns r, value, M_tag."""
    tag = "inf" if profile.is_large else repr(profile.M)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "value", "M_tag"])
        for r, v in zip(profile.r, profile.values):
            w.writerow([repr(float(r)), repr(float(v)), tag])


# Keller-Osserman -----------------------------------------------------------------


def _panel_nodes(edges, order=10):
    x, wts = leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * x + 0.5 * (a + b)
    weights = 0.5 * (b - a) * wts
    return nodes, weights


def G_primitive(p, t, panels=64):
    """G(t) = int_0^t g, by composite Gauss-Legendre on log-spaced panels (vectorized in t)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    for i, ti in enumerate(t):
        if ti <= 0:
            continue
        lo = min(1e-8, ti * 1e-8)
        edges = np.concatenate([[0.0], np.geomspace(lo, ti, panels)])
        nodes, weights = _panel_nodes(edges)
        out[i] = np.sum(np.asarray(transform.g(p, nodes.ravel())).reshape(nodes.shape) * weights)
    return out


@dataclass
class KOMargin:
    p: float
    T: float
    partial: float
    tail_bound: float
    exponent: float
    C: float


def keller_osserman_margin(p, T, panels=48):
    """Partial integral int_1^T dt / sqrt(G(t)) and an analytic bound on the rest.

    With C = g(1), G(t) >= G(1) + 2C/(p+1) (t^((p+1)/2) - 1); the tail beyond T is then
    O(T^(1 - (p+1)/4)), finite because (p+1)/4 > 1 for p > 3.
    """
    if p <= 3:
        raise PreconditionError("the Keller-Osserman certificate here needs p > 3")
    if not T > 1:
        raise PreconditionError("T must exceed 1")
    edges = np.geomspace(1.0, T, panels + 1)
    nodes, weights = _panel_nodes(edges)
    flat = nodes.ravel()
    # G at the outer nodes: G(1) plus cumulative integrals of g over [1, node]
    G1 = float(G_primitive(p, 1.0)[0])
    inner_edges = np.concatenate([[1.0], flat])
    seg_nodes, seg_w = _panel_nodes(inner_edges)
    seg = np.sum(np.asarray(transform.g(p, seg_nodes.ravel())).reshape(seg_nodes.shape) * seg_w, axis=1)
    Gvals = G1 + np.cumsum(seg)
    partial = float(np.sum(weights.ravel() / np.sqrt(Gvals)))
    C = float(transform.g(p, 1.0))
    a = 2.0 * C / (p + 1)
    beta = (p + 1) / 2.0
    c = a * (1.0 - max(0.0, 1.0 - G1 / a) * T ** (-beta))
    tail = c ** -0.5 * T ** (1.0 - beta / 2.0) / (beta / 2.0 - 1.0)
    return KOMargin(p, T, partial, float(tail), (p + 1) / 4.0, C)


# Uniform-in-kappa bound on compacts of the support --------------------------------


@dataclass
class CompactBoundReport:
    kappas: list
    compact_max: list
    cap: float
    b_K: float
    ball_radius: float

    @property
    def all_below(self):
        return all(m <= self.cap for m in self.compact_max)

    @property
    def spread(self):
        return max(self.compact_max) - min(self.compact_max)


def compact_bound_check(grid, weight, transforms, lam, center, radius, mesh_n=400, config=None):
    """Compare max of Theta over the disk K = B(center, radius) with the large-solution cap.

    The comparison ball B_r has r = 2 radius (so K = B_{r/2}) and must lie inside the
    support of b; b_K = min of b over B_r.
    """
    from .domain import disk_nodes
    from .solver import DualProblem, solve

    if weight.mode != "disk-bump":
        raise ConfigurationError("compact bound check needs a disk-bump weight")
    r = 2.0 * radius
    c = np.asarray(center, dtype=float)
    if np.linalg.norm(c - np.asarray(weight.center)) + r >= weight.radius:
        raise ConfigurationError("comparison ball B_r must lie strictly inside the support of b")
    rho = weight.radius
    dist_far = np.linalg.norm(c - np.asarray(weight.center)) + r
    b_K = weight.b0 * (1.0 - (dist_far / rho) ** 2) ** 2
    p = transforms[0].p
    cap_prof = minimal_large_solution(grid.dim, r, lam, b_K, p, mesh_n)
    cap = cap_prof.interior_max(0.5)
    K = disk_nodes(grid, c, radius)
    maxima = []
    for tr in transforms:
        if not 0 < tr.kappa < 1:
            raise PreconditionError("compact bound is stated for kappa in (0, 1)")
        theta = solve(DualProblem(grid, weight, tr), lam, config)
        maxima.append(float(np.max(theta[K])))
    return CompactBoundReport([t.kappa for t in transforms], maxima, float(cap), float(b_K), r)

"""Positive solutions of the discrete dual problem

    A v = lam f(v) f'(v) - b f(v)^p f'(v),   v >= 0,

with A the Dirichlet Laplacian, plus sub/supersolutions, lambda-continuation and
linearized stability.  kappa = 0 reduces the right-hand side to the classical logistic
term lam v - b v^p.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq

from .domain import (
    SymmetricOperator,
    assemble_laplacian,
    auxiliary_supersolution_field,
)
from .eigen import EIG_TOL, lower_bound, principal_eigen, refuge_eigenvalue
from .errors import ConvergenceError, PreconditionError
from .transform import DualTransform, h_inverse

log = logging.getLogger(__name__)

ZERO_THRESHOLD = 1e-8


@dataclass
class SolverConfig:
    newton_tol: float = 1e-10
    max_newton: int = 200
    damping: float = 0.5
    monotone_fallback: bool = True
    monotone_shift: float | None = None
    continuation_steps: int = 16
    step_tol: float = 1e-10
    max_monotone: int = 50_000
    eig_tol: float = EIG_TOL

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if not 0 < self.damping < 1:
            raise ValueError("damping must lie in (0, 1)")


@dataclass
class BranchPoint:
    lam: float
    kappa: float
    sup_norm: float
    l2_norm: float
    stability_eig: float
    newton_iters: int
    converged_to_zero: bool
    status: str = "ok"
    monotone: bool = True
    theta: np.ndarray | None = field(default=None, repr=False)


BRANCH_COLUMNS = ("lambda", "kappa", "sup_norm", "l2_norm", "stability_eig", "newton_iters", "converged_to_zero")


class DualProblem:
    """Discrete problem data for fixed (grid, weight, transform); caches operators and eigenvalues."""

    def __init__(self, grid, weight, transform):
        self.grid = grid
        self.weight = weight
        self.transform = transform
        self.A = assemble_laplacian(grid)

    @property
    def kappa(self):
        return self.transform.kappa

    @property
    def p(self):
        return self.transform.p

    @cached_property
    def principal(self):
        return principal_eigen(self.A)

    @property
    def lambda1(self):
        return self.principal.lambda1

    @cached_property
    def lambda1_lower(self):
        """Certified lower bound of lambda_1 (a few ulps below the computed value)."""
        return lower_bound(self.A, self.principal)

    @cached_property
    def _refuge(self):
        if not self.weight.refuge.any():
            return np.inf, None
        return refuge_eigenvalue(self.grid, self.weight)

    @property
    def lambda_b0(self):
        """Refuge eigenvalue; +inf when b > 0 at every node."""
        return self._refuge[0]

    @property
    def refuge_phi(self):
        return self._refuge[1]

    @cached_property
    def e(self):
        return auxiliary_supersolution_field(self.grid)

    def reaction(self, lam, v):
        return self.transform.reaction(lam, self.weight.values, np.maximum(v, 0.0))

    def reaction_derivative(self, lam, v):
        d = self.transform.reaction_derivative(lam, self.weight.values, np.maximum(v, 0.0))
        return np.where(v >= 0, d, 0.0)

    def residual(self, lam, v):
        return self.A.matrix @ v - self.reaction(lam, v)

    def residual_floor(self, v):
        """Rounding level of A v; the Newton tolerance is never set below it."""
        anorm = abs(self.A.matrix).sum(axis=1).max()
        return 64 * np.finfo(float).eps * anorm * max(1.0, float(np.max(np.abs(v))))

    def with_kappa(self, kappa):
        other = DualProblem.__new__(DualProblem)
        other.grid, other.weight, other.A = self.grid, self.weight, self.A
        other.transform = self.transform.with_kappa(kappa)
        for name in ("principal", "lambda1_lower", "_refuge", "e"):
            if name in self.__dict__:
                other.__dict__[name] = self.__dict__[name]
        return other


def _problem(grid, weight, transform):
    return DualProblem(grid, weight, transform)


@dataclass
class SolveInfo:
    iterations: int = 0
    residual: float = np.inf
    method: str = "newton"
    converged: bool = False


def newton(problem, lam, init, config, info=None):
    """Damped Newton with clipping at zero.

    Stops once the residual is below tolerance and the last step is below
    ``config.step_tol``; iterates whose sup-norm falls under 1e-2 * ZERO_THRESHOLD are
    snapped to the trivial solution.
    """
    info = info if info is not None else SolveInfo()
    A = problem.A.matrix
    v = np.maximum(np.asarray(init, dtype=float).copy(), 0.0)
    R = problem.residual(lam, v)
    rn = np.max(np.abs(R))
    for it in range(1, config.max_newton + 1):
        tol = max(config.newton_tol, problem.residual_floor(v))
        J = sp.csc_matrix(A - sp.diags(problem.reaction_derivative(lam, v)))
        try:
            delta = spla.spsolve(J, -R)
        except RuntimeError:
            delta = np.full_like(v, np.nan)
        if not np.all(np.isfinite(delta)):
            info.iterations, info.residual = it, rn
            return v, False
        alpha = 1.0
        while True:
            trial = np.maximum(v + alpha * delta, 0.0)
            Rt = problem.residual(lam, trial)
            rt = np.max(np.abs(Rt))
            if rt <= max(tol, (1 - 1e-4 * alpha) * rn):
                break
            alpha *= config.damping
            if alpha < 1e-10:
                info.iterations, info.residual = it, rn
                return v, False
        step = np.max(np.abs(trial - v))
        v, R, rn = trial, Rt, rt
        if np.max(v) <= 1e-2 * ZERO_THRESHOLD:
            v = np.zeros_like(v)
            R = problem.residual(lam, v)
            rn = np.max(np.abs(R))
        info.iterations, info.residual = it, rn
        tol = max(config.newton_tol, problem.residual_floor(v))
        if rn <= tol and (step <= config.step_tol * max(1.0, np.max(v)) or not v.any()):
            info.converged = True
            return v, True
    return v, False


def monotone_shift(problem, lam, vmax):
    """Smallest M making t -> reaction(t) + M t nondecreasing on [0, vmax] (with 10% slack)."""
    t = np.linspace(0.0, vmax, 4001)
    bmax = float(np.max(problem.weight.values))
    worst = np.max(-problem.transform.reaction_derivative(lam, bmax, t))
    return 1.1 * max(float(lam), float(worst), 0.0) + 1.0


def monotone_iteration(problem, lam, start, config, tol=1e-9, info=None):
    """Order-preserving iteration v <- (A + M)^(-1) (reaction(v) + M v) from ``start``."""
    info = info if info is not None else SolveInfo()
    M = config.monotone_shift or monotone_shift(problem, lam, float(np.max(start)))
    n = problem.grid.size
    lu = spla.splu(sp.csc_matrix(problem.A.matrix + M * sp.identity(n)))
    v = np.asarray(start, dtype=float).copy()
    for it in range(1, config.max_monotone + 1):
        nxt = lu.solve(problem.reaction(lam, v) + M * v)
        change = np.max(np.abs(nxt - v))
        v = nxt
        if change <= tol * max(1.0, np.max(v)):
            info.iterations += it
            return v
    info.iterations += config.max_monotone
    return v


def solve(problem, lam, config=None, init=None, info=None):
    """Positive solution (or the trivial one) of the discrete dual problem at ``lam``.

    Newton from ``init``; if that stalls, or collapses onto the trivial branch above
    lambda_1, retry by continuation from the bifurcation point, and finally (when
    ``config.monotone_fallback`` is set) by monotone iteration down from a supersolution.
    """
    config = config or SolverConfig()
    info = info if info is not None else SolveInfo()
    if init is None:
        init = initial_guess(problem, lam)
    v, ok = newton(problem, lam, init, config, info)
    above = lam > problem.lambda1 * (1 + 1e-9)
    if ok and (v.any() or not above):
        return v
    if lam > problem.lambda1 * (1 + 1e-3):
        try:
            info.method = "continuation"
            return continuation_solve(problem, lam, config, info=info)
        except ConvergenceError:
            pass
    if not config.monotone_fallback:
        raise ConvergenceError("Newton iteration stalled", info.residual, info.iterations)
    upper = _fallback_upper(problem, lam)
    if upper is None:
        raise ConvergenceError("Newton stalled and no supersolution is available", info.residual, info.iterations)
    log.info("Newton failed at lambda=%g; monotone fallback", lam)
    info.method = "monotone+newton"
    v = monotone_iteration(problem, lam, upper, config, info=info)
    v, ok = newton(problem, lam, v, config, info)
    if not ok:
        raise ConvergenceError("Newton and monotone iteration both failed", info.residual, info.iterations)
    return v


def solve_kappa_path(problem, lam, kappas, config=None, init=None, depth=8):
    """Solutions along a sequence of kappa values, each warm-started from the previous.

    A failed warm start is bridged by geometric intermediate kappa values.
    """
    config = config or SolverConfig()
    out = []
    prev, prev_kappa = init, None
    for kappa in kappas:
        Q = problem.with_kappa(kappa)
        v = None
        if prev is not None:
            v = _bridge(problem, lam, prev_kappa, kappa, prev, config, depth)
        if v is None:
            v = solve(Q, lam, config)
        out.append(v)
        prev, prev_kappa = v, kappa
    return out


def _bridge(problem, lam, k0, k1, v0, config, depth):
    Q = problem.with_kappa(k1)
    v, ok = newton(Q, lam, v0, config)
    if ok and (v.any() or lam <= problem.lambda1):
        return v
    if depth == 0 or k0 is None or k0 <= 0 or k1 <= 0:
        return None
    km = np.sqrt(k0 * k1)
    vm = _bridge(problem, lam, k0, km, v0, config, depth - 1)
    if vm is None:
        return None
    return _bridge(problem, lam, km, k1, vm, config, depth - 1)


def _fallback_upper(problem, lam):
    if problem.kappa > 0:
        return supersolution_from(problem, lam)
    if problem.weight.mode == "constant":
        return np.full(problem.grid.size, (max(lam, 0.0) / problem.weight.b0) ** (1.0 / (problem.p - 1)))
    return None


def initial_guess(problem, lam):
    """Seed from a scalar Galerkin projection s phi_1 of the problem, lifted by the subsolution."""
    phi = problem.principal.phi
    Aphi = problem.A.matrix @ phi

    def proj(s):
        return s * (phi @ Aphi) - problem.reaction(lam, s * phi) @ phi

    seed = phi.copy()
    if lam > problem.lambda1:
        hi = 1.0
        for _ in range(200):
            if proj(hi) > 0:
                break
            hi *= 2.0
        if proj(hi) > 0:
            lo = hi / 2.0 if hi > 1.0 else 1e-12
            if proj(lo) < 0:
                seed = brentq(proj, lo, hi, xtol=1e-14, rtol=1e-10) * phi
            else:
                seed = hi * phi
        else:
            seed = hi * phi
    if problem.kappa > 0 and lam > problem.lambda_b0:
        seed = np.maximum(seed, subsolution_from(problem, lam))
    return seed


def solve_dual(grid, weight, transform, lam, config=None, init=None):
    """Solve the dual problem on ``grid``; returns the nodal solution Theta >= 0."""
    return solve(_problem(grid, weight, transform), lam, config, init)


def epsilon(problem, lam):
    """Subsolution amplitude h_kappa^{-1}(lambda_{b,0} / lam)."""
    if not lam > problem.lambda_b0:
        raise PreconditionError(f"subsolution needs lambda > lambda_b0 = {problem.lambda_b0:.6g}")
    if problem.kappa <= 0:
        raise PreconditionError("subsolution construction needs kappa > 0")
    return float(h_inverse(problem.kappa, problem.lambda_b0 / lam))


def subsolution_from(problem, lam):
    return epsilon(problem, lam) * problem.refuge_phi


def subsolution(grid, weight, transform, lam):
    """eps(lam) * phi_{b,0} on refuge nodes, zero elsewhere."""
    return subsolution_from(_problem(grid, weight, transform), lam)


def supersolution_constant(problem, lam, margin=0.1):
    """K(lam) = (1 + margin) lam / sqrt(2 kappa) * max(1, 1 / min e).

    Elementary bound: f f' <= 1/sqrt(2 kappa), and A e >= 1 on the grid, so K e dominates
    the reaction nodewise.  K is raised further when needed so that K e lies above the
    subsolution.
    """
    if problem.kappa <= 0:
        raise PreconditionError("supersolution K e needs kappa > 0")
    emin = float(np.min(problem.e))
    K = (1 + margin) * max(lam, 0.0) / np.sqrt(2 * problem.kappa) * max(1.0, 1.0 / emin)
    if lam > problem.lambda_b0:
        K = max(K, (1 + margin) * epsilon(problem, lam) / emin)
    return max(K, 1e-300)


def supersolution_from(problem, lam, margin=0.1):
    return supersolution_constant(problem, lam, margin) * problem.e


def supersolution(grid, transform, lam, weight=None, margin=0.1):
    """K(lam) e with e solving -Delta e = 1 on an enlarged box."""
    from .domain import build_weight

    weight = weight if weight is not None else build_weight(grid, "zero")
    return supersolution_from(_problem(grid, weight, transform), lam, margin)


def recover_primal(transform, theta):
    """Psi = f_kappa(Theta) nodewise."""
    return np.asarray(transform.f(np.asarray(theta, dtype=float)))


def stability_potential(problem, lam, theta):
    """Potential of the linearization: -lam[(f')^2 - 2 kappa f^2 (f')^4] + b f^(p-1)[(p-1)(f')^2 + (f')^4]."""
    kappa, p = problem.kappa, problem.p
    fv = np.asarray(problem.transform.f(np.maximum(theta, 0.0)))
    fp = 1.0 / np.sqrt(1.0 + 2.0 * kappa * fv * fv)
    return -lam * (fp**2 - 2.0 * kappa * fv**2 * fp**4) + problem.weight.values * fv ** (p - 1) * (
        (p - 1) * fp**2 + fp**4
    )


def stability_eigen_of(problem, lam, theta, tol=EIG_TOL):
    V = stability_potential(problem, lam, theta)
    return principal_eigen(SymmetricOperator(problem.A.matrix, V), tol).lambda1


def stability_eigen(grid, weight, transform, lam, theta):
    """lambda_1 of the linearized operator at ``theta``; positive means linearly stable."""
    return stability_eigen_of(_problem(grid, weight, transform), lam, theta)


def tangent(problem, lam, v):
    """d Theta / d lambda at a solution: J^{-1} (f f')."""
    J = sp.csc_matrix(problem.A.matrix - sp.diags(problem.reaction_derivative(lam, v)))
    ff = problem.transform.reaction(1.0, 0.0, np.maximum(v, 0.0))
    return spla.spsolve(J, ff)


def continuation_solve(problem, lam, config=None, lam_start=None, v_start=None, info=None):
    """Reach ``lam`` from the bifurcation point by adaptive natural continuation.

    Starts at lambda_1 (1 + 1e-3) from the projection seed unless a solved pair
    (lam_start, v_start) is supplied; tangent predictor, step halved on failure.
    """
    config = config or SolverConfig()
    info = info if info is not None else SolveInfo()
    if lam_start is None:
        lam_start = problem.lambda1 * (1 + 1e-3)
        if lam <= lam_start:
            return solve(problem, lam, config, initial_guess(problem, lam), info)
        v_start = newton_or_raise(problem, lam_start, initial_guess(problem, lam_start), config, info)
    mu, v = lam_start, v_start
    dmu = (lam - mu) / max(2, config.continuation_steps)
    while mu < lam:
        dmu = min(dmu, lam - mu)
        try:
            pred = np.maximum(v + dmu * tangent(problem, mu, v), 0.0)
        except RuntimeError:
            pred = v
        trial, ok = newton(problem, mu + dmu, pred, config, info)
        if ok and trial.any():
            mu, v = mu + dmu, trial
            if info.iterations < 6:
                dmu *= 1.5
        else:
            dmu *= 0.5
            if dmu < 1e-10 * max(1.0, abs(lam)):
                raise ConvergenceError(f"continuation stalled at lambda={mu:.6g}", info.residual, info.iterations)
    return v


def newton_or_raise(problem, lam, init, config, info):
    v, ok = newton(problem, lam, init, config, info)
    if not ok:
        raise ConvergenceError(f"Newton failed at lambda={lam:.6g}", info.residual, info.iterations)
    return v


def solve_logistic_problem(problem, lam, config=None, init=None):
    """kappa = 0 positive solution; zero outside (lambda_1, lambda_{b,0})."""
    config = config or SolverConfig()
    if problem.kappa != 0:
        problem = problem.with_kappa(0.0)
    n = problem.grid.size
    if lam >= problem.lambda_b0 or (lam <= problem.lambda1 and problem.weight.mode == "zero"):
        return np.zeros(n)
    if lam <= problem.lambda1:
        start = init if init is not None else problem.principal.phi
        return solve(problem, lam, config, start)
    if init is not None:
        v, ok = newton(problem, lam, init, config)
        if ok and v.any():
            return v
    return continuation_solve(problem, lam, config)


def solve_logistic(grid, weight, lam, config=None, p=None, init=None):
    """Classical logistic problem (kappa = 0) with exponent ``p``."""
    if p is None:
        raise ValueError("solve_logistic needs the exponent p")
    return solve_logistic_problem(_problem(grid, weight, DualTransform(0.0, p)), lam, config, init)


def branch_continuation(grid, weight, transform, lambda_from, lambda_to, steps, config=None, *, problem=None):
    """Natural-parameter continuation in lambda on a uniform grid of ``steps`` values."""
    if steps < 2:
        raise ValueError("steps must be at least 2")
    config = config or SolverConfig()
    problem = problem or _problem(grid, weight, transform)
    lams = np.linspace(lambda_from, lambda_to, steps)
    points = []
    prev = None
    for lam in lams:
        info = SolveInfo()
        status = "ok"
        seed = prev if prev is not None and prev.any() else initial_guess(problem, lam)
        try:
            v = solve(problem, lam, config, seed, info)
            if not v.any() and lam > problem.lambda1 * (1 + 1e-9):
                v = solve(problem, lam, config, initial_guess(problem, lam), info)
        except ConvergenceError as exc:
            log.warning("branch point lambda=%g failed: %s", lam, exc)
            points.append(BranchPoint(float(lam), problem.kappa, np.nan, np.nan, np.nan, info.iterations, False, "failed"))
            continue
        sup = grid.sup_norm(v)
        try:
            stab = stability_eigen_of(problem, lam, v, config.eig_tol)
        except ConvergenceError:
            stab, status = np.nan, "stability-failed"
        monotone = True
        if prev is not None and prev.any() and v.any():
            monotone = bool(np.all(v > prev))
        points.append(
            BranchPoint(
                float(lam), problem.kappa, sup, grid.l2_norm(v), stab, info.iterations,
                sup <= ZERO_THRESHOLD, status, monotone, v,
            )
        )
        prev = v
    return points


def write_branch_csv(path, points):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BRANCH_COLUMNS)
        for bp in points:
            w.writerow([repr(bp.lam), repr(bp.kappa), repr(bp.sup_norm), repr(bp.l2_norm),
                        repr(bp.stability_eig), bp.newton_iters, str(bp.converged_to_zero).lower()])


def read_branch_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [
        BranchPoint(float(r["lambda"]), float(r["kappa"]), float(r["sup_norm"]), float(r["l2_norm"]),
                    float(r["stability_eig"]), int(r["newton_iters"]), r["converged_to_zero"] == "true")
        for r in rows
    ]


def independent_residual(grid, weight, transform, lam, v):
    """Residual recomputed from scratch with an explicit stencil sweep (no sparse matrix)."""
    V = grid.reshape(np.asarray(v, dtype=float))
    lap = np.zeros_like(V)
    padded = np.pad(V, 1)
    for a, hh in enumerate(grid.h):
        core = tuple(slice(1, -1) for _ in range(grid.dim))
        fwd = tuple(slice(2, None) if b == a else slice(1, -1) for b in range(grid.dim))
        bwd = tuple(slice(None, -2) if b == a else slice(1, -1) for b in range(grid.dim))
        lap += (2 * padded[core] - padded[fwd] - padded[bwd]) / hh**2
    fv = np.asarray(transform.f(np.maximum(v, 0.0)))
    fp = 1.0 / np.sqrt(1.0 + 2.0 * transform.kappa * fv**2)
    rhs = lam * fv * fp - weight.values * fv**transform.p * fp
    return lap.ravel() - rhs

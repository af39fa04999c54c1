"""The dual change of variables f_kappa and the scalar maps built from it.

f_kappa solves f' = (1 + 2 kappa f^2)^(-1/2), f(0) = 0.  Its inverse has the closed form

    F(u) = u sqrt(1 + 2 kappa u^2) / 2 + asinh(sqrt(2 kappa) u) / (2 sqrt(2 kappa)),

so f is evaluated by inverting F with a bracketed Newton iteration.  Every function here
accepts scalars or numpy arrays and is pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, PreconditionError

KAPPA_ZERO = 1e-14
F_RTOL = 1e-13
H_TOL = 1e-10
_MAX_NEWTON = 100


def _as_array(x, name):
    a = np.asarray(x, dtype=float)
    if np.any(np.isnan(a)):
        raise DomainError(f"{name} contains NaN")
    return a


def _out(a):
    return a[()] if a.ndim == 0 else a


def _check_kappa(kappa):
    if not np.isfinite(kappa) or kappa < 0:
        raise DomainError(f"kappa must be a nonnegative real, got {kappa!r}")
    return float(kappa) if kappa >= KAPPA_ZERO else 0.0


def _check_nonneg(x, name):
    a = _as_array(x, name)
    if np.any(a < 0):
        raise DomainError(f"{name} must be nonnegative (min {a.min():.3e})")
    return a


def inverse_transform(kappa, u):
    """Return F(u) = int_0^u sqrt(1 + 2 kappa s^2) ds in closed form."""
    kappa = _check_kappa(kappa)
    u = _check_nonneg(u, "u")
    if kappa == 0.0:
        return _out(u.copy())
    c = np.sqrt(2.0 * kappa)
    return _out(0.5 * u * np.sqrt(1.0 + 2.0 * kappa * u * u) + np.arcsinh(c * u) / (2.0 * c))


def _dF(kappa, u):
    return np.sqrt(1.0 + 2.0 * kappa * u * u)


def f(kappa, t):
    """Evaluate f_kappa(t), the unique u >= 0 with F(u) = t.

    Newton on the convex map F started from an upper bound of the root; any step that
    leaves the current bracket is replaced by bisection.
    """
    kappa = _check_kappa(kappa)
    t = _check_nonneg(t, "t")
    if kappa == 0.0:
        return _out(t.copy())
    tt = np.atleast_1d(t)
    # F(u) >= u and F(u) >= sqrt(2 kappa) u^2 / 2 both bound the root from above
    hi = np.minimum(tt, np.sqrt(2.0 * tt / np.sqrt(2.0 * kappa)))
    lo = np.zeros_like(tt)
    u = hi.copy()
    # relative stopping rule; tighter than F_RTOL * max(1, t) for t < 1
    tol = F_RTOL * tt
    res = inverse_transform(kappa, u) - tt
    for _ in range(_MAX_NEWTON):
        active = np.abs(res) > tol
        if not active.any():
            break
        above = res > 0
        hi = np.where(active & above, u, hi)
        lo = np.where(active & ~above, u, lo)
        step = u - res / _dF(kappa, u)
        bad = (step <= lo) | (step >= hi)
        step = np.where(bad, 0.5 * (lo + hi), step)
        u = np.where(active, step, u)
        res = np.atleast_1d(inverse_transform(kappa, u)) - tt
        if np.all(hi - lo <= 4 * np.finfo(float).eps * hi):
            break
    else:
        worst = float(np.max(np.abs(res) / np.maximum(1.0, tt)))
        if worst > F_RTOL:  # contract is only F_RTOL * max(1, t)
            raise ConvergenceError("f_kappa inversion did not converge", worst, _MAX_NEWTON)
    # one polishing step: for tiny t the seed u = t already meets the tolerance while the
    # true root sits a few ulps lower, which matters for comparisons across kappa
    polished = u - res / _dF(kappa, u)
    res_p = np.atleast_1d(inverse_transform(kappa, polished)) - tt
    u = np.where(np.abs(res_p) <= np.abs(res), polished, u)
    out = u.reshape(t.shape)
    return _out(out)


def f_prime(kappa, t):
    """f_kappa'(t) = 1 / sqrt(1 + 2 kappa f^2)."""
    kappa = _check_kappa(kappa)
    fv = np.asarray(f(kappa, t))
    return _out(1.0 / np.sqrt(1.0 + 2.0 * kappa * fv * fv))


def f_second(kappa, t):
    """f_kappa''(t) = -2 kappa f (f')^4."""
    kappa = _check_kappa(kappa)
    fv = np.asarray(f(kappa, t))
    fp = 1.0 / np.sqrt(1.0 + 2.0 * kappa * fv * fv)
    return _out(-2.0 * kappa * fv * fp**4)


def f_second_ratio(kappa, t):
    """The alternative form [(f')^4 - (f')^2] / f of f'' (0 at t = 0).

    Evaluated literally, so it loses relative accuracy when 2 kappa f^2 is below ~1e-6.
    """
    kappa = _check_kappa(kappa)
    fv = np.asarray(f(kappa, t))
    fp = 1.0 / np.sqrt(1.0 + 2.0 * kappa * fv * fv)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = (fp**4 - fp**2) / fv
    return _out(np.where(fv > 0, r, 0.0))


def h(kappa, t):
    """h_kappa(t) = f f' / t, extended by h(0) = 1."""
    kappa = _check_kappa(kappa)
    t = _check_nonneg(t, "t")
    fv = np.asarray(f(kappa, t))
    fp = 1.0 / np.sqrt(1.0 + 2.0 * kappa * fv * fv)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = fv * fp / t
    return _out(np.where(t > 0, r, 1.0))


def h_inverse(kappa, y):
    """Invert the decreasing map h_kappa: (0, inf) -> (0, 1) by bisection."""
    kappa = _check_kappa(kappa)
    if kappa == 0.0:
        raise PreconditionError("h_inverse needs kappa > 0 (h_0 is identically 1)")
    y = _as_array(y, "y")
    if np.any((y <= 0) | (y >= 1)):
        raise DomainError("h_inverse is defined for y in (0, 1)")
    yy = np.atleast_1d(y)
    lo = np.zeros_like(yy)
    hi = np.ones_like(yy)
    for _ in range(2000):
        grow = np.asarray(h(kappa, hi)) > yy
        if not grow.any():
            break
        lo = np.where(grow, hi, lo)
        hi = np.where(grow, 2.0 * hi, hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        big = np.asarray(h(kappa, mid)) > yy
        lo = np.where(big, mid, lo)
        hi = np.where(big, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * hi):
            break
    t = 0.5 * (lo + hi)
    resid = np.abs(np.asarray(h(kappa, t)) - yy)
    if np.any(resid > H_TOL):
        raise ConvergenceError("h_inverse bisection did not reach tolerance", float(resid.max()), 200)
    return _out(t.reshape(y.shape))


def g(p, t):
    """g(t) = f_1(t)^(p+1) / t with g(0) = 0."""
    if p <= 1:
        raise DomainError(f"p must exceed 1, got {p}")
    t = _check_nonneg(t, "t")
    fv = np.asarray(f(1.0, t))
    with np.errstate(invalid="ignore", divide="ignore"):
        r = fv ** (p + 1) / t
    return _out(np.where(t > 0, r, 0.0))


def reaction(kappa, p, lam, b, t):
    """Right-hand side lam f f' - b f^p f' of the dual problem."""
    kappa = _check_kappa(kappa)
    fv = np.asarray(f(kappa, t))
    fp = 1.0 / np.sqrt(1.0 + 2.0 * kappa * fv * fv)
    return _out(lam * fv * fp - np.asarray(b) * fv**p * fp)


def reaction_derivative(kappa, p, lam, b, t):
    """d/dt of ``reaction``: lam f'^4 - b f^(p-1) [(p-1) f'^2 + f'^4]."""
    kappa = _check_kappa(kappa)
    fv = np.asarray(f(kappa, t))
    fp2 = 1.0 / (1.0 + 2.0 * kappa * fv * fv)
    fp4 = fp2 * fp2
    return _out(lam * fp4 - np.asarray(b) * fv ** (p - 1) * ((p - 1) * fp2 + fp4))


@dataclass(frozen=True)
class DualTransform:
    """Parameter bundle (kappa, p) with bound evaluators."""

    kappa: float
    p: float

    def __post_init__(self):
        if not np.isfinite(self.kappa) or self.kappa < 0:
            raise DomainError(f"kappa must be >= 0, got {self.kappa}")
        if not self.p > 1:
            raise DomainError(f"p must exceed 1, got {self.p}")

    @property
    def is_identity(self):
        return self.kappa < KAPPA_ZERO

    def f(self, t):
        return f(self.kappa, t)

    def f_prime(self, t):
        return f_prime(self.kappa, t)

    def f_second(self, t):
        return f_second(self.kappa, t)

    def inverse(self, u):
        return inverse_transform(self.kappa, u)

    def h(self, t):
        return h(self.kappa, t)

    def h_inverse(self, y):
        return h_inverse(self.kappa, y)

    def reaction(self, lam, b, t):
        return reaction(self.kappa, self.p, lam, b, t)

    def reaction_derivative(self, lam, b, t):
        return reaction_derivative(self.kappa, self.p, lam, b, t)

    def with_kappa(self, kappa):
        return DualTransform(kappa, self.p)

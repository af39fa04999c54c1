"""Measured versions of the structural properties of f_kappa and the derived maps.

Each function returns a float measurement (a worst violation or a worst error), so the
caller decides the tolerance; a value <= 0 (or <= the slack) means the property holds on
the sample.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import transform as T


def log_samples(t_min=1e-6, t_max=1e3, count=200):
    return np.logspace(np.log10(t_min), np.log10(t_max), count)


def bound_violations(kappa, t):
    """Worst violation of each elementary bound on f (positive = violated).

    Keys: ``range`` 0 <= f <= t; ``slope`` 0 < f' <= 1; ``product`` f f' <= 1/sqrt(2 kappa);
    ``tangent`` f/2 <= t f' <= f; ``sqrt_ratio`` f(t)/sqrt(t) nondecreasing on sorted t.
    Violations of the upper bounds are measured relative to max(1, |bound|).
    """
    t = np.sort(np.asarray(t, dtype=float))
    fv = np.asarray(T.f(kappa, t))
    fp = np.asarray(T.f_prime(kappa, t))
    rel = lambda a, b: float(np.max((a - b) / np.maximum(1.0, np.abs(b))))  # noqa: E731
    ratio = fv / np.sqrt(t)
    return {
        "range": max(rel(fv, t), float(np.max(-fv))),
        "slope": max(rel(fp, np.ones_like(fp)), float(np.max(-fp)) if np.all(fp > 0) else np.inf),
        "product": rel(fv * fp, np.full_like(fv, 1.0 / np.sqrt(2.0 * kappa))),
        "tangent": max(rel(fv / 2.0, t * fp), rel(t * fp, fv)),
        "sqrt_ratio": rel(ratio[:-1], ratio[1:]),
    }


def exact_ratio_form(kappa, fvals):
    """[(f')^4 - (f')^2] / f evaluated in exact rational arithmetic from the float f values.

    With s = 1 + 2 kappa f^2 and (f')^2 = 1/s, the difference (f')^4 - (f')^2 cancels
    catastrophically in floating point when 2 kappa f^2 is tiny; exact arithmetic keeps the
    second form an honest, independent evaluation.
    """
    k = Fraction(float(kappa))
    out = np.empty(len(fvals))
    for i, fv in enumerate(fvals):
        fq = Fraction(float(fv))
        if fq == 0:
            out[i] = 0.0
            continue
        s = 1 + 2 * k * fq * fq
        out[i] = float((1 / (s * s) - 1 / s) / fq)
    return out


def second_derivative_identity(kappa, t):
    """Max relative gap between -2 kappa f (f')^4 and the ratio form of f''."""
    t = np.asarray(t, dtype=float)
    a = np.asarray(T.f_second(kappa, t))
    b = exact_ratio_form(kappa, np.asarray(T.f(kappa, t)))
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), np.finfo(float).tiny)))


def round_trip_error(kappa, t):
    """Max relative error of F(f(t)) = t and f(F(t)) = t."""
    t = np.asarray(t, dtype=float)
    e1 = np.abs(np.asarray(T.inverse_transform(kappa, T.f(kappa, t))) - t) / t
    e2 = np.abs(np.asarray(T.f(kappa, T.inverse_transform(kappa, t))) - t) / t
    return float(max(e1.max(), e2.max()))


def kappa_monotonicity_violations(kappas, t):
    """Number of (kappa1 < kappa2, t) pairs with f(kappa2, t) >= f(kappa1, t)."""
    kappas = sorted(kappas)
    vals = [np.asarray(T.f(k, t)) for k in kappas]
    bad = 0
    for i in range(len(kappas)):
        for j in range(i + 1, len(kappas)):
            bad += int(np.sum(vals[j] >= vals[i]))
    return bad


def h_monotonicity_violations(kappa, t):
    """Sorted samples where h fails to decrease strictly."""
    t = np.sort(np.asarray(t, dtype=float))
    return int(np.sum(np.diff(np.asarray(T.h(kappa, t))) >= 0))


def power_ratio_violations(kappa, p, t):
    """Sorted samples where t -> f^p f' / t fails to increase strictly (p >= 3)."""
    t = np.sort(np.asarray(t, dtype=float))
    fv = np.asarray(T.f(kappa, t))
    vals = fv**p * np.asarray(T.f_prime(kappa, t)) / t
    return int(np.sum(np.diff(vals) <= 0))


def g_ratio_violations(p, t):
    """Sorted samples where g(t)/t fails to increase strictly (p > 3)."""
    t = np.sort(np.asarray(t, dtype=float))
    vals = np.asarray(T.g(p, t)) / t
    return int(np.sum(np.diff(vals) <= 0))


def g_power_bound_violation(p, t):
    """Worst relative shortfall of g(t) >= g(1) t^((p-1)/2) for t >= 1."""
    t = np.asarray(t, dtype=float)
    t = t[t >= 1]
    lower = float(T.g(p, 1.0)) * t ** ((p - 1) / 2)
    return float(np.max((lower - np.asarray(T.g(p, t))) / lower)) if t.size else -np.inf

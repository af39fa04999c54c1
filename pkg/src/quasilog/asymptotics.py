"""Parameter sweeps in lambda and kappa with monotonicity verdicts.

A sweep records, for each parameter value, scalar metrics of the primal solution
Psi = f_kappa(Theta) (sup-norm, min/max over named compact node sets, distances to a
reference field).  Verdicts are recomputed from the stored metric sequences only, so a
report read back from CSV yields the same verdicts.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .domain import disk_nodes
from .errors import ConfigurationError, ConvergenceError, PreconditionError
from .large import minimal_large_solution
from .solver import DualProblem, SolverConfig, recover_primal, solve, solve_kappa_path, solve_logistic_problem
from .transform import DualTransform

KINDS = ("decreasing", "increasing", "ratio_le", "ratio_ge")


@dataclass(frozen=True)
class Claim:
    """A monotonicity or growth statement about one metric sequence.

    ``kind`` is ``decreasing``/``increasing`` (strict, ignoring NaN-free order) or
    ``ratio_le``/``ratio_ge`` comparing last/first with ``threshold``.
    """

    name: str
    metric: str
    kind: str
    threshold: float = float("nan")

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown claim kind {self.kind!r}")

    def measure(self, seq):
        seq = np.asarray(seq, dtype=float)
        if self.kind in ("decreasing", "increasing"):
            d = np.diff(seq)
            # worst step: largest increase for 'decreasing', largest decrease for 'increasing'
            return float(np.max(d)) if self.kind == "decreasing" else float(np.min(d))
        return float(seq[-1] / seq[0])

    def holds(self, seq):
        seq = np.asarray(seq, dtype=float)
        if seq.size < 2 or not np.all(np.isfinite(seq)):
            return False
        m = self.measure(seq)
        return {
            "decreasing": m < 0,
            "increasing": m > 0,
            "ratio_le": m <= self.threshold,
            "ratio_ge": m >= self.threshold,
        }[self.kind]

    def encode(self):
        return f"{self.name}={self.metric}:{self.kind}:{self.threshold!r}"

    @classmethod
    def decode(cls, text):
        name, rest = text.split("=", 1)
        metric, kind, thr = rest.split(":")
        return cls(name, metric, kind, float(thr))


@dataclass
class SweepReport:
    parameter: str
    values: list
    metrics: dict
    claims: list = field(default_factory=list)
    mode: str = "warm"
    regime: str = ""
    status: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.values)
        if not self.status:
            self.status = ["ok"] * n
        if any(len(v) != n for v in self.metrics.values()) or len(self.status) != n:
            raise ValueError("every metric needs one entry per parameter value")

    def verdicts(self):
        return {c.name: c.holds(self.metrics[c.metric]) for c in self.claims}

    def measured(self):
        return {c.name: c.measure(self.metrics[c.metric]) for c in self.claims}

    def ratio(self, metric):
        seq = self.metrics[metric]
        return seq[-1] / seq[0]

    @property
    def all_ok(self):
        return all(s == "ok" for s in self.status)

    def to_csv(self, path):
        cols = [self.parameter, *self.metrics, "status"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# parameter={self.parameter} mode={self.mode} regime={self.regime or '-'}"
                     f" columns={','.join(cols)}"
                     f" claims={';'.join(c.encode() for c in self.claims) or '-'}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for i, val in enumerate(self.values):
                w.writerow([repr(float(val)), *(repr(float(self.metrics[m][i])) for m in self.metrics),
                            self.status[i]])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            header = fh.readline()
            rows = list(csv.reader(fh))
        meta = dict(tok.split("=", 1) for tok in header.lstrip("# ").split())
        cols = rows[0]
        data = rows[1:]
        claims = [] if meta["claims"] == "-" else [Claim.decode(c) for c in meta["claims"].split(";")]
        metrics = {m: [float(r[j]) for r in data] for j, m in enumerate(cols[1:-1], start=1)}
        return cls(cols[0], [float(r[0]) for r in data], metrics, claims, meta["mode"],
                   "" if meta["regime"] == "-" else meta["regime"], [r[-1] for r in data])


def worker_count():
    """Workers for cold-start sweeps: QUASILOG_THREADS if set, else the CPU count."""
    env = os.environ.get("QUASILOG_THREADS")
    limit = os.cpu_count() or 1
    if env:
        try:
            limit = max(1, int(env))
        except ValueError as exc:
            raise ConfigurationError(f"QUASILOG_THREADS must be an integer, got {env!r}") from exc
    return limit


def _map(fn, items, mode):
    if mode == "cold" and worker_count() > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=min(worker_count(), len(items))) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# Canonical compacts ------------------------------------------------------------


def _check_gap(grid, gap, what):
    if gap < 3 * max(grid.h) - 1e-12:
        raise ConfigurationError(f"{what} gap {gap} is below three mesh widths ({3 * max(grid.h):.4g})")


def refuge_compact(grid, weight, boundary_gap=0.1, support_gap=0.05):
    """Refuge nodes at distance >= boundary_gap from the box and >= support_gap from supp b."""
    _check_gap(grid, boundary_gap, "boundary")
    mask = weight.refuge & (grid.boundary_distance() >= boundary_gap)
    if weight.mode == "disk-bump":
        _check_gap(grid, support_gap, "support")
        mask &= ~disk_nodes(grid, weight.center, weight.radius + support_gap)
    if not mask.any():
        raise ConfigurationError("refuge compact is empty")
    return mask


def support_compact(grid, weight, fraction=0.5):
    """Closed disk of radius fraction * radius about the bump centre (inside Omega_+)."""
    if weight.mode != "disk-bump":
        raise ConfigurationError("support compact needs a disk-bump weight")
    if not 0 < fraction < 1:
        raise ConfigurationError("fraction must lie in (0, 1)")
    _check_gap(grid, (1 - fraction) * weight.radius, "support")
    return disk_nodes(grid, weight.center, fraction * weight.radius)


# lambda sweeps ---------------------------------------------------------------------


def _solve_point(problem, lam, config, init=None):
    if problem.kappa == 0:
        return solve_logistic_problem(problem, lam, config, init)
    return solve(problem, lam, config, init)


def _sweep(problem, params, solve_one, mode):
    """Run ``solve_one(param, warm)`` over params; returns (fields, statuses)."""
    out, status = [], []
    if mode == "warm":
        prev = None
        for x in params:
            try:
                v = solve_one(x, prev)
                prev = v
                out.append(v)
                status.append("ok")
            except ConvergenceError as exc:
                out.append(None)
                status.append(f"failed:{exc.__class__.__name__}")
        return out, status

    def job(x):
        try:
            return solve_one(x, None), "ok"
        except ConvergenceError as exc:
            return None, f"failed:{exc.__class__.__name__}"

    res = _map(job, list(params), mode)
    return [r[0] for r in res], [r[1] for r in res]


def _compact_metrics(grid, fields_, compacts):
    metrics = {"sup_norm": []}
    for name in compacts:
        metrics[f"min_{name}"] = []
        metrics[f"max_{name}"] = []
    for psi in fields_:
        metrics["sup_norm"].append(np.nan if psi is None else grid.sup_norm(psi))
        for name, mask in compacts.items():
            metrics[f"min_{name}"].append(np.nan if psi is None else float(psi[mask].min()))
            metrics[f"max_{name}"].append(np.nan if psi is None else float(psi[mask].max()))
    return metrics


def lambda_limits(grid, weight, transform, lambda_grid, compacts=None, *, mode="warm", config=None,
                  growth_gate=10.0, decay_gate=0.1, problem=None):
    """Sweep lambda and test the limits at lambda_1 (decreasing grid) or at infinity (increasing).

    A decreasing grid claims the sup-norm decreases strictly with last/first <= decay_gate;
    an increasing grid claims each compact minimum increases strictly with last/first >=
    growth_gate.
    """
    lams = [float(x) for x in lambda_grid]
    d = np.diff(lams)
    if not (np.all(d < 0) or np.all(d > 0)):
        raise PreconditionError("lambda_grid must be strictly monotone")
    compacts = compacts or {}
    config = config or SolverConfig()
    problem = problem or DualProblem(grid, weight, transform)
    tr = problem.transform

    def one(lam, warm):
        return _solve_point(problem, lam, config, warm)

    thetas, status = _sweep(problem, lams, one, mode)
    psis = [None if t is None else recover_primal(tr, t) for t in thetas]
    metrics = _compact_metrics(grid, psis, compacts)
    claims = []
    if d[0] < 0:
        claims += [Claim("sup_decreasing", "sup_norm", "decreasing"),
                   Claim("sup_vanishing", "sup_norm", "ratio_le", decay_gate)]
    else:
        for name in compacts:
            claims += [Claim(f"{name}_min_increasing", f"min_{name}", "increasing"),
                       Claim(f"{name}_min_growth", f"min_{name}", "ratio_ge", growth_gate)]
    return SweepReport("lambda", lams, metrics, claims, mode, "", status)


# kappa sweeps ----------------------------------------------------------------------


def classify_regime(problem, lam):
    if lam <= problem.lambda1:
        raise PreconditionError("kappa sweeps need lambda > lambda_1")
    return "a" if lam < problem.lambda_b0 else "b"


def large_solution_on_support(weight, lam, p, dim=2, mesh_n=400):
    """Minimal large solution of -Delta u = lam u - b u^p on the bump support (radial)."""
    if weight.mode != "disk-bump":
        raise ConfigurationError("the large-solution reference needs a disk-bump weight")
    return minimal_large_solution(dim, weight.radius, lam, weight.b0, p, mesh_n,
                                  absorption="power", weight="bump")


def gradient_sup_difference(grid, u, v):
    """Sup-norm of the difference of forward-difference gradients (zero boundary values)."""
    D = grid.reshape(u - v)
    worst = 0.0
    for a, hh in enumerate(grid.h):
        padded = np.pad(D, [(1, 1) if b == a else (0, 0) for b in range(grid.dim)])
        worst = max(worst, float(np.max(np.abs(np.diff(padded, axis=a)))) / hh)
    return worst


def kappa_to_zero(grid, weight, p, lam, kappa_grid, compacts=None, *, regime=None, mode="warm", config=None,
                  ratio_gate=0.2, growth_gate=5.0, problem=None, large_mesh_n=400):
    """Sweep kappa down to 0 at fixed lambda.

    Regimes: ``a`` (lambda_1 < lambda < lambda_{b,0}) measures the sup distance to the
    kappa = 0 solution; ``b`` (lambda >= lambda_{b,0}) the minimum over refuge compacts;
    ``c`` (lambda >= lambda_{b,0}, p > 3) the distance on support compacts to the radial
    minimal large solution of the classical problem on the support of b.
    """
    kappas = [float(k) for k in kappa_grid]
    if len(kappas) < 2 or not np.all(np.diff(kappas) < 0) or kappas[-1] <= 0:
        raise PreconditionError("kappa_grid must be positive and strictly decreasing")
    config = config or SolverConfig()
    problem = problem or DualProblem(grid, weight, DualTransform(kappas[0], p))
    auto = classify_regime(problem, lam)
    regime = regime or auto
    if regime == "c":
        if p <= 3:
            raise PreconditionError("regime (c) requires p > 3")
        if auto != "b":
            raise PreconditionError("regime (c) requires lambda >= lambda_{b,0}")
    elif regime != auto:
        raise PreconditionError(f"lambda={lam:.6g} lies in regime ({auto}), not ({regime})")
    compacts = compacts or {}

    if mode == "warm":
        thetas = solve_kappa_path(problem, lam, kappas, config)
        status = ["ok"] * len(kappas)
    else:
        thetas, status = _sweep(problem, kappas, lambda k, _: solve(problem.with_kappa(k), lam, config), mode)
    psis = [None if t is None else recover_primal(DualTransform(k, p), t) for k, t in zip(kappas, thetas)]
    metrics = _compact_metrics(grid, psis, compacts)
    claims = []
    nan = np.nan
    if regime == "a":
        oracle = solve_logistic_problem(problem, lam, config)
        metrics["dist_oracle"] = [nan if s is None else grid.sup_norm(s - oracle) for s in psis]
        metrics["grad_dist_oracle"] = [nan if s is None else gradient_sup_difference(grid, s, oracle) for s in psis]
        claims += [Claim("distance_decreasing", "dist_oracle", "decreasing"),
                   Claim("distance_ratio", "dist_oracle", "ratio_le", ratio_gate)]
    elif regime == "b":
        for name in compacts:
            claims += [Claim(f"{name}_min_increasing", f"min_{name}", "increasing"),
                       Claim(f"{name}_min_growth", f"min_{name}", "ratio_ge", growth_gate)]
    else:
        ml = large_solution_on_support(weight, lam, p, grid.dim, large_mesh_n)
        r = np.linalg.norm(grid.points - np.asarray(weight.center), axis=1)
        for name, mask in compacts.items():
            ref = ml(r[mask])
            metrics[f"dist_large_{name}"] = [nan if s is None else float(np.max(np.abs(s[mask] - ref))) for s in psis]
            claims.append(Claim(f"{name}_large_distance_decreasing", f"dist_large_{name}", "decreasing"))
    return SweepReport("kappa", kappas, metrics, claims, mode, regime, status)

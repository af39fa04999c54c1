"""Experiment drivers behind the command line: each returns checks plus CSV artifacts.

A check line reads ``check_id status measured threshold``; status is PASS, FAIL or
SKIPPED.  Exploratory checks carry the id prefix ``exploratory.`` and never make a run
fail.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import properties as props
from .asymptotics import kappa_to_zero, lambda_limits, refuge_compact, support_compact
from .domain import Grid, build_weight, write_grid_function
from .eigen import discrete_laplacian_eigenvalue
from .large import keller_osserman_margin, minimal_large_solution, write_profile_csv
from .solver import (
    DualProblem,
    SolverConfig,
    branch_continuation,
    independent_residual,
    recover_primal,
    solve,
    solve_logistic_problem,
    stability_eigen_of,
    stability_potential,
    subsolution_from,
    supersolution_from,
    write_branch_csv,
)
from .transform import DualTransform


@dataclass
class Check:
    check_id: str
    passed: bool | None
    measured: float
    threshold: float | str
    exploratory: bool = False

    @property
    def status(self):
        return "SKIPPED" if self.passed is None else ("PASS" if self.passed else "FAIL")

    def line(self):
        thr = self.threshold if isinstance(self.threshold, str) else f"{self.threshold:.6g}"
        cid = f"exploratory.{self.check_id}" if self.exploratory else self.check_id
        return f"{cid} {self.status} {self.measured:.6g} {thr}"


@dataclass
class Outcome:
    checks: list = field(default_factory=list)
    artifacts: list = field(default_factory=list)
    elapsed: float = 0.0

    def add(self, check_id, measured, threshold, passed, exploratory=False):
        self.checks.append(Check(check_id, passed, float(measured), threshold, exploratory))

    @property
    def ok(self):
        return all(c.passed is not False for c in self.checks if not c.exploratory)


# builders --------------------------------------------------------------------------


def make_grid(cfg):
    ext = cfg.extents
    return Grid(ext, (cfg["n"],) * cfg["dim"])


def make_weight(cfg, grid):
    return build_weight(grid, cfg["weight"], cfg["b0"], cfg["center"], cfg["radius"])


def make_solver_config(cfg):
    return SolverConfig(
        newton_tol=cfg["newton_tol"], max_newton=cfg["max_newton"], damping=cfg["damping"],
        monotone_fallback=cfg["monotone_fallback"], continuation_steps=cfg["continuation_steps"],
        step_tol=cfg["step_tol"], eig_tol=cfg["eig_tol"],
    )


def make_problem(cfg):
    grid = make_grid(cfg)
    return DualProblem(grid, make_weight(cfg, grid), DualTransform(cfg["kappa"], cfg["p"]))


def reference_lambda(cfg, problem):
    ref = cfg["lambda_ref"]
    if ref == "lambda1":
        return problem.lambda1
    if not math.isfinite(problem.lambda_b0):
        raise ValueError(f"lambda_ref = {ref} needs a refuge (b = 0 somewhere)")
    if ref == "lambda_b0":
        return problem.lambda_b0
    return 0.5 * (problem.lambda1 + problem.lambda_b0)


def target_lambda(cfg, problem):
    if cfg["lambda"] is not None:
        return float(cfg["lambda"])
    return cfg["lambda_scale"] * reference_lambda(cfg, problem)


# experiments -----------------------------------------------------------------------


def run_verify_f(cfg, out_dir):
    res = Outcome()
    t = props.log_samples(cfg["t_min"], cfg["t_max"], cfg["samples"])
    slack, p = cfg["slack"], cfg["p"]
    kappas = cfg["verify_kappas"]
    rows = []
    for k in kappas:
        viol = props.bound_violations(k, t)
        for name, v in viol.items():
            res.add(f"f.{name}[kappa={k:g}]", v, slack, v <= slack)
        ident = props.second_derivative_identity(k, t)
        res.add(f"f.second_identity[kappa={k:g}]", ident, 1e-10, ident <= 1e-10)
        rt = props.round_trip_error(k, t)
        res.add(f"f.round_trip[kappa={k:g}]", rt, 1e-12, rt <= 1e-12)
        hv = props.h_monotonicity_violations(k, t)
        res.add(f"h.decreasing[kappa={k:g}]", hv, 0, hv == 0)
        if p >= 3:
            pv = props.power_ratio_violations(k, p, t)
            res.add(f"fpf.increasing[kappa={k:g}]", pv, 0, pv == 0)
        rows.append((k, viol, ident, rt))
    km = props.kappa_monotonicity_violations(kappas, t)
    res.add("f.kappa_decreasing", km, 0, km == 0)
    if p > 3:
        gv = props.g_ratio_violations(p, t)
        res.add("g.ratio_increasing", gv, 0, gv == 0)
    gb = props.g_power_bound_violation(p, t)
    res.add("g.power_bound", gb, 0, gb <= 0)
    path = Path(out_dir) / "verify_f.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("kappa,range,slope,product,tangent,sqrt_ratio,second_identity,round_trip\n")
        for k, viol, ident, rt in rows:
            fh.write(",".join(repr(float(x)) for x in (k, *viol.values(), ident, rt)) + "\n")
    res.artifacts.append(path)
    return res


def run_eig(cfg, out_dir):
    res = Outcome()
    problem = make_problem(cfg)
    grid = problem.grid
    lam1 = problem.lambda1
    closed = discrete_laplacian_eigenvalue(grid)
    rel = abs(lam1 - closed) / closed
    res.add("eig.closed_form", rel, 1e-9, rel <= 1e-9)
    cont = sum((np.pi / L) ** 2 for L in grid.lengths)
    relc = abs(lam1 - cont) / cont
    res.add("eig.continuum", relc, 1e-3, relc <= 1e-3)
    rows = [("lambda1", lam1), ("closed_form", closed), ("continuum", cont)]
    if problem.weight.refuge.any() and problem.weight.support.any():
        lb0 = problem.lambda_b0
        res.add("eig.refuge_above", lb0 - lam1, 0.0, lb0 > lam1)
        rows.append(("lambda_b0", lb0))
    path = Path(out_dir) / "eig.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("quantity,value\n")
        for name, v in rows:
            fh.write(f"{name},{float(v)!r}\n")
    write_grid_function(Path(out_dir) / "phi1.csv", grid, problem.principal.phi, "phi")
    res.artifacts += [path, Path(out_dir) / "phi1.csv"]
    return res


def solve_point(problem, lam, config):
    if problem.kappa == 0:
        return solve_logistic_problem(problem, lam, config)
    return solve(problem, lam, config)


def _apriori(problem, lam, theta):
    """b f^(p-1)(max Theta) - lam for constant b (<= 1e-8 expected)."""
    if problem.weight.mode != "constant":
        return None
    fmax = float(problem.transform.f(float(np.max(theta))))
    return problem.weight.b0 * fmax ** (problem.p - 1) - lam


def _sandwich(problem, lam, theta):
    """Number of nodes violating sub <= Theta <= super (None when not constructible)."""
    if problem.kappa <= 0:
        return None
    bad = int(np.sum(theta > supersolution_from(problem, lam)))
    if lam > problem.lambda_b0:
        bad += int(np.sum(subsolution_from(problem, lam) > theta))
    return bad


def run_solve(cfg, out_dir):
    res = Outcome()
    problem = make_problem(cfg)
    sc = make_solver_config(cfg)
    lam = target_lambda(cfg, problem)
    theta = solve_point(problem, lam, sc)
    grid = problem.grid
    r = independent_residual(grid, problem.weight, problem.transform, lam, theta)
    scale = max(1.0, float(np.max(np.abs(problem.A.matrix @ theta))))
    rr = grid.sup_norm(r) / scale
    res.add("solve.residual", rr, 1e-8, rr <= 1e-8)
    res.add("solve.nonnegative", float(np.min(theta)), 0.0, bool(np.min(theta) >= 0))
    if lam <= problem.lambda1_lower:
        res.add("solve.trivial_below_lambda1", grid.sup_norm(theta), 1e-8, grid.sup_norm(theta) < 1e-8)
    elif lam > problem.lambda1:
        res.add("solve.positive", float(np.min(theta)), 0.0, bool(np.min(theta) > 0))
    ap = _apriori(problem, lam, theta)
    if ap is not None:
        res.add("solve.apriori_bound", ap, 1e-8, ap <= 1e-8)
    sw = _sandwich(problem, lam, theta)
    if sw is not None:
        res.add("solve.sandwich", sw, 0, sw == 0)
    write_grid_function(Path(out_dir) / "theta.csv", grid, theta, "theta")
    write_grid_function(Path(out_dir) / "psi.csv", grid, recover_primal(problem.transform, theta), "psi")
    res.artifacts += [Path(out_dir) / "theta.csv", Path(out_dir) / "psi.csv"]
    return res


def run_branch(cfg, out_dir):
    res = Outcome()
    problem = make_problem(cfg)
    sc = make_solver_config(cfg)
    ref = reference_lambda(cfg, problem)
    lo, hi = cfg["lambda_from"] * ref, cfg["lambda_to"] * ref
    pts = branch_continuation(problem.grid, problem.weight, problem.transform, lo, hi, cfg["steps"], sc,
                              problem=problem)
    path = Path(out_dir) / "branch.csv"
    write_branch_csv(path, pts)
    res.artifacts.append(path)
    failed = sum(bp.status == "failed" for bp in pts)
    res.add("branch.converged", failed, 0, failed == 0)
    lam1 = problem.lambda1
    below = [bp for bp in pts if bp.lam <= problem.lambda1_lower]
    above = [bp for bp in pts if bp.lam > lam1 * (1 + 1e-9)]
    if below:
        nz = sum(not bp.converged_to_zero for bp in below)
        res.add("branch.zero_below_lambda1", nz, 0, nz == 0)
    if above:
        npos = sum(bp.converged_to_zero or not (bp.theta is not None and np.min(bp.theta) > 0) for bp in above)
        res.add("branch.positive", npos, 0, npos == 0)
        sups = np.array([bp.sup_norm for bp in above])
        worst = float(np.min(np.diff(sups))) if len(sups) > 1 else np.inf
        res.add("branch.sup_increasing", worst, 0.0, worst > 0)
        if cfg["p"] >= 3:
            st = min(bp.stability_eig for bp in above)
            res.add("branch.stable", st, 0.0, st > 0)
        nonmono = sum(not bp.monotone for bp in above)
        res.add("branch.nodewise_monotone", nonmono, 0, nonmono == 0)
        if lo < 1.5 * lam1 < hi:
            mid = solve(problem, 1.5 * lam1, sc)
            ratio = above[0].sup_norm / problem.grid.sup_norm(mid)
            res.add("branch.onset_ratio", ratio, 0.1, ratio < 0.1)
        if problem.weight.mode == "constant":
            ap = max(_apriori(problem, bp.lam, bp.theta) for bp in above)
            res.add("branch.apriori_bound", ap, 1e-8, ap <= 1e-8)
        if problem.kappa > 0:
            sw = sum(_sandwich(problem, bp.lam, bp.theta) for bp in above)
            res.add("branch.sandwich", sw, 0, sw == 0)
    return res


def _compacts(cfg, grid, weight, which):
    if which == "refuge":
        return {"refuge": refuge_compact(grid, weight, cfg["boundary_gap"], cfg["support_gap"])}
    return {"plus": support_compact(grid, weight, cfg["support_fraction"])}


def _report_checks(res, rep, prefix):
    meas = rep.measured()
    for c in rep.claims:
        thr = c.threshold if c.kind.startswith("ratio") else ("<0" if c.kind == "decreasing" else ">0")
        res.add(f"{prefix}.{c.name}", meas[c.name], thr, rep.verdicts()[c.name])
    failed = sum(s != "ok" for s in rep.status)
    res.add(f"{prefix}.solves", failed, 0, failed == 0)


def run_lambda_sweep(cfg, out_dir):
    res = Outcome()
    problem = make_problem(cfg)
    grid, weight = problem.grid, problem.weight
    ref = reference_lambda(cfg, problem)
    lams = [s * ref for s in cfg["lambda_grid"]]
    compacts = {}
    if lams[-1] > lams[0]:
        if weight.refuge.any():
            compacts = _compacts(cfg, grid, weight, "refuge")
        else:
            mask = grid.boundary_distance() >= cfg["boundary_gap"]
            compacts = {"interior": mask}
    rep = lambda_limits(grid, weight, problem.transform, lams, compacts, mode=cfg["mode"],
                        config=make_solver_config(cfg), growth_gate=cfg["growth_gate"],
                        decay_gate=cfg["decay_gate"], problem=problem)
    path = Path(out_dir) / "lambda_sweep.csv"
    rep.to_csv(path)
    res.artifacts.append(path)
    _report_checks(res, rep, "lambda_sweep")
    return res


def run_kappa_sweep(cfg, out_dir):
    res = Outcome()
    problem = make_problem(cfg)
    grid, weight = problem.grid, problem.weight
    problem = problem.with_kappa(cfg["kappa_grid"][0])
    lam = target_lambda(cfg, problem)
    regime = None if cfg["regime"] == "auto" else cfg["regime"]
    if regime == "c":
        compacts = _compacts(cfg, grid, weight, "plus")
    elif weight.refuge.any() and weight.support.any():
        compacts = _compacts(cfg, grid, weight, "refuge")
    else:
        compacts = {}
    rep = kappa_to_zero(grid, weight, cfg["p"], lam, cfg["kappa_grid"], compacts, regime=regime,
                        mode=cfg["mode"], config=make_solver_config(cfg), ratio_gate=cfg["ratio_gate"],
                        growth_gate=cfg["growth_gate"], problem=problem, large_mesh_n=cfg["mesh_n"])
    path = Path(out_dir) / f"kappa_sweep_{rep.regime}.csv"
    rep.to_csv(path)
    res.artifacts.append(path)
    _report_checks(res, rep, f"kappa_sweep.{rep.regime}")
    return res


def stabilization_measures(history):
    """(max difference increase after the peak, final difference) of an M schedule history."""
    d = np.array([x[1] for x in history])
    peak = int(np.argmax(d))
    tail = d[peak:]
    worst = float(np.max(np.diff(tail))) if tail.size > 1 else -np.inf
    return worst, float(d[-1])


def run_large(cfg, out_dir):
    res = Outcome()
    p = cfg["p"]
    exploratory = cfg["exploratory"] or (cfg["absorption"] == "g" and p <= 3)
    prof = minimal_large_solution(cfg["ball_dim"], cfg["ball_radius"], cfg["ball_lambda"], cfg["ball_b0"], p,
                                  cfg["mesh_n"], absorption=cfg["absorption"], tol=cfg["stabilize_tol"],
                                  exploratory=exploratory)
    path = Path(out_dir) / "large_profile.csv"
    write_profile_csv(path, prof)
    res.artifacts.append(path)
    worst, final = stabilization_measures(prof.history)
    res.add("large.stabilization_monotone", worst, "<0", worst < 0, exploratory)
    res.add("large.stabilized", final, cfg["stabilize_tol"], final <= cfg["stabilize_tol"], exploratory)
    res.add("large.positive", float(prof.values.min()), 0.0, bool(prof.values.min() > 0), exploratory)
    if p > 3:
        Ts = sorted(cfg["ko_T"])
        margins = [keller_osserman_margin(p, T) for T in Ts]
        res.add("ko.exponent", margins[0].exponent, 1.0, margins[0].exponent > 1)
        for a, b in zip(margins, margins[1:]):
            inc = b.partial - a.partial
            res.add(f"ko.increment[{a.T:g},{b.T:g}]", inc, cfg["ko_increment"], inc <= cfg["ko_increment"])
            res.add(f"ko.tail_bound[{a.T:g}]", inc - a.tail_bound, 0.0, inc <= a.tail_bound)
        kpath = Path(out_dir) / "keller_osserman.csv"
        with open(kpath, "w", encoding="utf-8") as fh:
            fh.write("T,partial,tail_bound\n")
            for m in margins:
                fh.write(f"{m.T!r},{m.partial!r},{m.tail_bound!r}\n")
        res.artifacts.append(kpath)
    else:
        res.add("ko.exponent", (p + 1) / 4, 1.0, None)
    return res


def uniqueness_probe(problem, lam, config, starts, seed=0):
    """Solve from ``starts`` random positive initial fields; return the pairwise sup spread."""
    rng = np.random.default_rng(seed)
    base = solve(problem, lam, config)
    scale = max(1.0, float(np.max(base)))
    sols = []
    for _ in range(starts):
        init = scale * rng.uniform(0.05, 3.0, problem.grid.size)
        sols.append(solve(problem, lam, config, init))
    return max(float(np.max(np.abs(a - base))) for a in sols), sols


def run_stability(cfg, out_dir):
    res = Outcome()
    problem = make_problem(cfg)
    sc = make_solver_config(cfg)
    lam = target_lambda(cfg, problem)
    theta = solve_point(problem, lam, sc)
    V = stability_potential(problem, lam, theta)
    gap = float(np.max(np.abs(V + problem.reaction_derivative(lam, theta))))
    res.add("stability.potential_match", gap, 1e-12, gap <= 1e-12)
    mu = stability_eigen_of(problem, lam, theta, sc.eig_tol)
    gated = cfg["p"] >= 3
    res.add("stability.eigenvalue", mu, 0.0, mu > 0, exploratory=not gated)
    spread, _ = uniqueness_probe(problem, lam, sc, cfg["starts"], cfg["seed"])
    unique_gate = cfg["p"] >= 3 or problem.weight.is_constant
    res.add("stability.unique", spread, 1e-6, spread <= 1e-6, exploratory=not unique_gate)
    path = Path(out_dir) / "stability.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("lambda,kappa,stability_eig,potential_gap,multistart_spread\n")
        fh.write(f"{lam!r},{problem.kappa!r},{mu!r},{gap!r},{spread!r}\n")
    res.artifacts.append(path)
    return res


RUNNERS = {
    "verify-f": run_verify_f,
    "eig": run_eig,
    "solve": run_solve,
    "branch": run_branch,
    "lambda-sweep": run_lambda_sweep,
    "kappa-sweep": run_kappa_sweep,
    "large": run_large,
    "stability": run_stability,
}


def run(cfg, out_dir=None):
    out = Path(out_dir or cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    outcome = RUNNERS[cfg["experiment"]](cfg, out)
    outcome.elapsed = time.perf_counter() - start
    with open(out / "verdict.txt", "w", encoding="utf-8") as fh:
        for c in outcome.checks:
            fh.write(c.line() + "\n")
    outcome.artifacts.append(out / "verdict.txt")
    return outcome

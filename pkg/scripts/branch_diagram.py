"""Print the bifurcation diagram (lambda, sup-norm, stability) for several kappa values.

    python3 scripts/branch_diagram.py --kappas 0,0.1,1 --p 3 --n 99
"""

import argparse

import numpy as np

from quasilog.domain import Grid, build_weight
from quasilog.solver import DualProblem, branch_continuation
from quasilog.transform import DualTransform


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--kappas", default="0,0.1,1")
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--n", type=int, default=99)
    ap.add_argument("--b0", type=float, default=1.0)
    ap.add_argument("--steps", type=int, default=12)
    args = ap.parse_args()
    grid = Grid.interval(0, 1, args.n)
    weight = build_weight(grid, "constant", args.b0)
    for kappa in (float(k) for k in args.kappas.split(",")):
        P = DualProblem(grid, weight, DualTransform(kappa, args.p))
        lam1 = P.lambda1
        pts = branch_continuation(grid, weight, P.transform, 1.001 * lam1, 3 * lam1, args.steps, problem=P)
        print(f"kappa = {kappa:g}  (lambda_1 = {lam1:.6g})")
        print(f"{'lambda/lambda1':>15} {'sup Theta':>12} {'sup Psi':>12} {'stability':>12}")
        for bp in pts:
            psi = np.max(P.transform.f(bp.sup_norm))
            print(f"{bp.lam / lam1:15.4f} {bp.sup_norm:12.6g} {psi:12.6g} {bp.stability_eig:12.4g}")
        print()


if __name__ == "__main__":
    main()

"""Tables of the kappa -> 0 limits in the three regimes for the refuge configuration.

    python3 scripts/kappa_limits.py [--n 63] [--b0 1000]
"""

import argparse

from quasilog.asymptotics import kappa_to_zero, refuge_compact, support_compact
from quasilog.domain import Grid, build_weight
from quasilog.solver import DualProblem
from quasilog.transform import DualTransform

KAPPAS = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]


def table(rep):
    cols = list(rep.metrics)
    print(f"regime ({rep.regime})  " + "  ".join(f"{k}={v}" for k, v in rep.verdicts().items()))
    print(f"{'kappa':>8} " + " ".join(f"{c:>16}" for c in cols))
    for i, k in enumerate(rep.values):
        print(f"{k:8.0e} " + " ".join(f"{rep.metrics[c][i]:16.6g}" for c in cols))
    print()


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=63)
    ap.add_argument("--b0", type=float, default=1000.0)
    ap.add_argument("--p", type=float, default=4.0)
    args = ap.parse_args()
    grid = Grid.rectangle((0, 1), (0, 1), args.n)
    weight = build_weight(grid, "disk-bump", args.b0, (0.5, 0.5), 0.25)
    P = DualProblem(grid, weight, DualTransform(KAPPAS[0], args.p))
    print(f"lambda_1 = {P.lambda1:.6g}, lambda_b0 = {P.lambda_b0:.6g}\n")
    mid = 0.5 * (P.lambda1 + P.lambda_b0)
    table(kappa_to_zero(grid, weight, args.p, mid, KAPPAS, regime="a", problem=P))
    high = 1.2 * P.lambda_b0
    table(kappa_to_zero(grid, weight, args.p, high, KAPPAS, {"refuge": refuge_compact(grid, weight)},
                        regime="b", problem=P))
    table(kappa_to_zero(grid, weight, args.p, high, KAPPAS, {"plus": support_compact(grid, weight)},
                        regime="c", problem=P))


if __name__ == "__main__":
    main()

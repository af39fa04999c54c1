"""Interior differences along the boundary-value schedule M = 10 * 2^k, and the
Keller-Osserman partial integrals, for a radial ball problem.

    python3 scripts/large_solution_schedule.py --p 4 --N 2 --R 0.3
"""

import argparse

from quasilog.large import keller_osserman_margin, minimal_large_solution


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--p", type=float, default=4.0)
    ap.add_argument("--N", type=int, default=2)
    ap.add_argument("--R", type=float, default=0.3)
    ap.add_argument("--lam", type=float, default=100.0)
    ap.add_argument("--b0", type=float, default=1.0)
    ap.add_argument("--mesh", type=int, default=400)
    args = ap.parse_args()
    prof = minimal_large_solution(args.N, args.R, args.lam, args.b0, args.p, args.mesh)
    print(f"{'M':>12} {'interior diff':>14}")
    for M, d in prof.history[::8] + prof.history[-1:]:
        print(f"{M:12.4g} {d:14.4g}")
    print(f"\nM_lambda(0) = {prof.values[0]:.8g}, max on [0, R/2] = {prof.interior_max():.8g}\n")
    print(f"{'T':>8} {'partial':>10} {'tail bound':>11}")
    for T in (1e2, 1e3, 1e4, 1e5):
        m = keller_osserman_margin(args.p, T)
        print(f"{T:8.0e} {m.partial:10.5f} {m.tail_bound:11.5f}")


if __name__ == "__main__":
    main()

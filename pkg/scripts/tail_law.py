"""How fast does p_n(t) settle onto its exponential tail?

Prints the scaled density p_n(t) e^{(1-Lambda_0) t} Lambda_0^n divided by its
limit, for a few n, next to the share of the gap carried by the second
principal eigenvalue.  At rho = 1 the gap is still above 1% at t = 30 and
falls below it only around t = 35.

    python3 scripts/tail_law.py --rho 1 --n 0 5 --t 10:60:11
"""

import argparse
import math

from balking_ps import ModelParams, spectral_term
from balking_ps.asymptotics import lambda0, tail_constant
from balking_ps.cli import parse_grid
from balking_ps.master_ode import integrate_density


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--rho", type=float, default=1.0)
    ap.add_argument("--n", type=int, nargs="+", default=[0, 5])
    ap.add_argument("--t", default="10:60:11", help="start:stop:count")
    args = ap.parse_args()

    p = ModelParams(args.rho)
    lam = lambda0(args.rho)
    target = tail_constant(args.rho)
    grid = parse_grid(args.t)
    print(f"rho={args.rho}  Lambda_0={lam:.6f}  tail constant={target:.8f}")
    print(f"{'n':>4} {'t':>7} {'scaled/limit - 1':>17} {'m=2 share':>10}")
    for n in args.n:
        for t, r in zip(grid, integrate_density(p, n, grid)):
            scaled = r.value * math.exp((1.0 - lam) * t) * lam**n
            lead = spectral_term(p, 1, n).contribution(t)
            second = spectral_term(p, 2, n).contribution(t)
            print(f"{n:4d} {t:7.2f} {scaled / target - 1.0:17.6e} {second / lead:10.6f}")


if __name__ == "__main__":
    main()

"""Light traffic: the t = O(1) expansion p^(0) + rho p^(1).

The remainder should scale like rho^2, so the last column should settle to
a constant as rho decreases.

    python3 scripts/light_traffic.py --rho 0.1 0.03 0.01 0.003 --n 0 1 3
"""

import argparse

from balking_ps import ModelParams
from balking_ps.asymptotics import p0_light, p1_light
from balking_ps.master_ode import integrate_density


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--rho", type=float, nargs="+", default=[0.1, 0.03, 0.01, 0.003])
    ap.add_argument("--n", type=int, nargs="+", default=[0, 1, 3])
    ap.add_argument("--t", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    args = ap.parse_args()

    print(f"{'rho':>7} {'n':>3} {'max|err|':>11} {'max|err|/rho^2':>15}")
    for rho in args.rho:
        p = ModelParams(rho)
        for n in args.n:
            worst = max(
                abs(r.value - p0_light(n, t) - rho * p1_light(n, t))
                for t, r in zip(args.t, integrate_density(p, n, args.t))
            )
            print(f"{rho:7.3f} {n:3d} {worst:11.3e} {worst / rho**2:15.4f}")


if __name__ == "__main__":
    main()

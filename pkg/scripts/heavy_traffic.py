"""Heavy-traffic expansion against the master-equation oracle.

For each rho the script compares rho p_n(t) at n = N rho, t = T rho with the
one- and two-term expansions.  The one-term error should fall like 1/rho and
the two-term error like 1/rho^2.

    python3 scripts/heavy_traffic.py --rho 25 50 100 200 --N 1 --T 0.5 1 2
"""

import argparse

from balking_ps import ModelParams
from balking_ps.asymptotics import heavy_p0, heavy_p1
from balking_ps.master_ode import integrate_density


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--rho", type=float, nargs="+", default=[25.0, 50.0, 100.0, 200.0])
    ap.add_argument("--N", type=float, default=1.0)
    ap.add_argument("--T", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    args = ap.parse_args()

    print(f"{'rho':>7} {'T':>5} {'rho*|err1|':>12} {'rho^2*|err2|':>13}")
    for rho in args.rho:
        n = round(args.N * rho)
        N = n / rho
        exact = integrate_density(ModelParams(rho), n, [T * rho for T in args.T])
        for T, r in zip(args.T, exact):
            p0, p1 = heavy_p0(N, T), heavy_p1(N, T)
            err1 = rho * r.value - p0
            err2 = err1 - p1 / rho
            print(f"{rho:7.1f} {T:5.2f} {rho * abs(err1):12.5f} {rho**2 * abs(err2):13.5f}")


if __name__ == "__main__":
    main()

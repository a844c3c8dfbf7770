"""High-replicate risk differences for the high-dimensional priors.

Useful for telling MC noise from a genuinely negative risk difference when
nu lies outside (0, d/2 - 1], e.g. the upper-envelope prior with nu = 1 at d = 3.
"""

import argparse

from predrisk.prior import parse_prior
from predrisk.risk import kl_risk_diff_mc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--prior", default="highdim-upper")
    ap.add_argument("--nu", type=float, default=1.0)
    ap.add_argument("--xi", default="0,10,30,100,300,1000")
    ap.add_argument("--reps", type=int, default=50_000)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=99)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    spec = parse_prior(args.prior, None if args.prior == "kato" else args.nu, args.n, args.d)
    print(f"{spec.label()} d={args.d} n={args.n} nu={spec.nu:g} (nu <= d/2-1: {spec.nu <= args.d / 2 - 1})")
    for xi in (float(x) for x in args.xi.split(",")):
        e = kl_risk_diff_mc(xi, spec, args.n, args.d, args.reps, args.trials, args.seed, threads=args.threads)
        print(f"  xi={xi:<8g} diff={e.mean:+.3e}  se={e.std_error:.1e}  z={e.mean / e.std_error:+6.1f}")


if __name__ == "__main__":
    main()

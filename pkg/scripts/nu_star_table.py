"""Print the domination thresholds nu*(d) for n = 2 next to the reference values."""

import argparse

from predrisk.bounds import g_fn, h_fn, nu_star

REFERENCE = {1: 0.25, 2: 0.33, 3: 0.18, 4: 0.05}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tol", type=float, default=1e-6)
    ap.add_argument("--step", type=float, default=1e-3, help="scan step before Brent refinement")
    args = ap.parse_args()

    print(f"{'d':>2} {'nu*':>10} {'reference':>9} {'|diff|':>8} {'h(2,d)':>9} {'g at nu*/2':>11}")
    for d in range(1, 5):
        res = nu_star(d, 2, tol=args.tol, step=args.step)
        v = res.nu_star
        print(f"{d:>2} {v:>10.6f} {REFERENCE[d]:>9.2f} {abs(v - REFERENCE[d]):>8.4f} "
              f"{h_fn(2, d):>9.5f} {g_fn(2, d, v / 2):>11.5f}")


if __name__ == "__main__":
    main()

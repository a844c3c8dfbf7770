"""Command-line entry point.

Exit codes: 0 success, 1 check failure, 2 usage error, 3 computation
incomplete (nustar without a root), 4 partial grid failure.
"""

import argparse
import csv
import io
import json
import logging
import math
import sys
import time

import numpy as np

from . import __version__
from .bayes import gm_predictive_logpdf
from .bounds import NoRootError, nu_star
from .checks import SUITES, run_suite
from .model import SingularStatisticError, SufficientStats, best_equivariant_logpdf, plug_in_logpdf
from .prior import parse_prior
from .risk import DEFAULT_NU_VALUES, ExperimentGrid, default_xi_values, resolve_threads, run_grid
from .specfun import DomainError

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_INCOMPLETE, EXIT_PARTIAL = 0, 1, 2, 3, 4

CSV_HEADER = ["xi", "nu", "d", "n", "prior", "riskdiff_mean", "riskdiff_se", "reps", "trials", "seed"]

log = logging.getLogger("predrisk")


class UsageError(Exception):
    pass


def fmt_float(x):
    """17 significant digits: parses back to the identical double."""
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else format(float(x), ".17g")


def parse_float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"not a comma-separated list of numbers: {text!r}") from None


def parse_xi_spec(text):
    """``a:b:k`` (k evenly spaced points from a to b) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"--xi range must be a:b:k, got {text!r}")
        try:
            a, b, k = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise UsageError(f"--xi range must be a:b:k, got {text!r}") from None
        if k < 1:
            raise UsageError("--xi range needs k >= 1")
        values = np.linspace(a, b, k).tolist()
    else:
        values = parse_float_list(text)
    if not values or any(v < 0 for v in values):
        raise UsageError("xi values must be non-empty and >= 0")
    return values


def seed_type(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def write_manifest(path, command, params, started):
    manifest = {
        "command": command,
        "parameters": params,
        "seed": params.get("seed"),
        "tool_version": __version__,
        "wall_clock_seconds": round(time.time() - started, 3),
        "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    with open(f"{path}.manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)


def cmd_nustar(args):
    started = time.time()
    if args.d_min > args.d_max:
        raise UsageError("--d-min must not exceed --d-max")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["d", "n", "nu_star"])
    incomplete = False
    for d in range(args.d_min, args.d_max + 1):
        try:
            res = nu_star(d, args.n, tol=args.tol)
            writer.writerow([d, args.n, fmt_float(res.nu_star)])
        except (NoRootError, DomainError) as exc:
            log.error("d=%d: %s", d, exc)
            writer.writerow([d, args.n, ""])
            incomplete = True
    sys.stdout.write(buf.getvalue())
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(buf.getvalue())
        write_manifest(args.out, "nustar", {"n": args.n, "d_min": args.d_min, "d_max": args.d_max, "tol": args.tol}, started)
    return EXIT_INCOMPLETE if incomplete else EXIT_OK


def cmd_risk_surface(args):
    started = time.time()
    nus = parse_float_list(args.nu) if args.nu is not None else list(DEFAULT_NU_VALUES)
    xis = parse_xi_spec(args.xi) if args.xi is not None else list(default_xi_values())
    if not nus or any(not v > 0 for v in nus):
        raise UsageError("nu values must be non-empty and > 0")
    if args.reps < 1 or args.trials < 1:
        raise UsageError("--reps and --trials must be >= 1")
    prior_tag = args.prior.strip().lower()
    # a prior that is invalid for every nu is a usage error; otherwise bad cells are reported per cell
    problems = []
    for nu in nus:
        try:
            parse_prior(prior_tag, None if prior_tag == "kato" else nu, args.n, args.d)
        except ValueError as exc:
            problems.append(str(exc))
    if len(problems) == len(nus):
        raise UsageError(problems[0])
    grid = ExperimentGrid(
        d=args.d, n=args.n, prior=prior_tag, xi_values=tuple(xis), nu_values=tuple(nus),
        replicates=args.reps, trials=args.trials, seed=args.seed,
    )
    cells = run_grid(grid, threads=args.threads)
    label = prior_tag if not prior_tag.startswith("ms:") else f"ms:{float(prior_tag[3:]):g}"
    failed = 0
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for c in cells:
            est = c.estimate
            if est is None:
                failed += 1
                writer.writerow([fmt_float(c.xi), fmt_float(c.nu), args.d, args.n, label, "nan", "nan", "nan", "nan", "nan"])
            else:
                writer.writerow([fmt_float(c.xi), fmt_float(c.nu), args.d, args.n, label,
                                 fmt_float(est.mean), fmt_float(est.std_error), est.replicates, est.trials, est.seed])
    params = {k: getattr(grid, k) for k in ("d", "n", "prior", "xi_values", "nu_values", "replicates", "trials", "seed")}
    params["threads"] = resolve_threads(args.threads)
    write_manifest(args.out, "risk-surface", params, started)
    if failed:
        log.error("%d of %d cells failed", failed, len(cells))
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_density(args):
    xbar = np.array(parse_float_list(args.xbar))
    y = np.array(parse_float_list(args.y))
    if xbar.shape != (args.d,) or y.shape != (args.d,):
        raise UsageError(f"--xbar and --y must both have d={args.d} entries")
    if not args.s > 0:
        raise UsageError("--s must be > 0")
    stats = SufficientStats(xbar, args.s, args.n)
    if args.mode == "plugin":
        sigma2 = args.sigma2 if args.sigma2 is not None else args.s / ((args.n - 1) * args.d)
        logpdf = plug_in_logpdf(y, xbar, sigma2)
    elif args.mode == "equivariant":
        logpdf = best_equivariant_logpdf(y, stats)
    else:
        prior_tag = (args.prior or "lowdim").strip().lower()
        if args.nu is None and prior_tag != "kato":
            raise UsageError("--mode gm needs --nu")
        try:
            spec = parse_prior(prior_tag, args.nu, args.n, args.d)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        logpdf = gm_predictive_logpdf(y, stats, spec)
    print(json.dumps({"mode": args.mode, "logpdf": float(logpdf), "pdf": math.exp(logpdf)}))
    return EXIT_OK


def cmd_check(args):
    results = run_suite(args.suite, seed=args.seed)
    for r in results:
        print(r.line(), file=sys.stderr)
    ok = all(r.passed for r in results)
    report = {"suite": args.suite, "seed": args.seed, "passed": ok, "results": [r.as_dict() for r in results]}
    print(json.dumps(report, default=float))
    return EXIT_OK if ok else EXIT_CHECK


def build_parser():
    p = argparse.ArgumentParser(prog="predrisk", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("nustar", help="domination thresholds nu* for n = 2")
    q.add_argument("--n", type=int, default=2)
    q.add_argument("--d-min", type=int, default=1)
    q.add_argument("--d-max", type=int, default=4)
    q.add_argument("--tol", type=float, default=1e-6)
    q.add_argument("--out")
    q.set_defaults(func=cmd_nustar)

    q = sub.add_parser("risk-surface", help="Monte Carlo risk-difference surface over (xi, nu)")
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--prior", required=True, help="lowdim|highdim-lower|highdim-upper|kato|ms:<b>")
    q.add_argument("--nu", help="comma list (ignored for kato)")
    q.add_argument("--xi", help="a:b:k or comma list")
    q.add_argument("--reps", type=int, default=5000)
    q.add_argument("--trials", type=int, default=10)
    q.add_argument("--seed", type=seed_type, default=0)
    q.add_argument("--threads", type=int, help="worker cap (default: $PREDRISK_THREADS or 1)")
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_risk_surface)

    q = sub.add_parser("density", help="evaluate one predictive density at one point")
    q.add_argument("--mode", choices=("plugin", "equivariant", "gm"), required=True)
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--xbar", required=True)
    q.add_argument("--s", type=float, required=True)
    q.add_argument("--y", required=True)
    q.add_argument("--nu", type=float)
    q.add_argument("--prior")
    q.add_argument("--sigma2", type=float, help="plug-in variance (default s / ((n-1) d))")
    q.set_defaults(func=cmd_density)

    q = sub.add_parser("check", help="run oracle/property suites")
    q.add_argument("--suite", choices=tuple(SUITES) + ("all",), required=True)
    q.add_argument("--seed", type=seed_type, default=0)
    q.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"predrisk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, SingularStatisticError) as exc:
        print(f"predrisk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""QMC convergence study for the two torus integrals.

Runs log||H|| and log||K|| at doubling point budgets and prints the
estimated means, the shift-based standard errors, and the observed decay
rate.  A randomized rank-1 lattice on a smooth integrand should beat the
Monte Carlo n^{-1/2} rate; this script makes that visible on a concrete
period matrix.

Usage:
    python scripts/convergence_study.py --tau fixtures/tau_random.json \
        --min-exp 10 --max-exp 16
"""

import argparse
import math
import sys

from g3theta import QmcPlan, build_frobenius_context, log_H, log_K
from g3theta.cli import parse_tau


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tau", required=True, help="period-matrix JSON file")
    ap.add_argument("--min-exp", type=int, default=10,
                    help="smallest budget as log2(points)")
    ap.add_argument("--max-exp", type=int, default=16,
                    help="largest budget as log2(points)")
    ap.add_argument("--shifts", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    tau = parse_tau(args.tau)
    ctx = build_frobenius_context(tau)
    print(f"# tau: {args.tau}  lambda_min={tau.lambda_min:.4f}  "
          f"shifts={args.shifts} seed={args.seed}")
    print(f"{'n':>9} {'log_H':>14} {'se_H':>10} {'log_K':>14} {'se_K':>10}"
          f" {'rate_H':>7} {'rate_K':>7}")
    prev_h = prev_k = None
    for exp in range(args.min_exp, args.max_exp + 1):
        plan = QmcPlan(n_points=2**exp, n_shifts=args.shifts, seed=args.seed)
        lh = log_H(tau, plan)
        lk = log_K(ctx, plan)
        rate_h = rate_k = float("nan")
        if prev_h is not None and lh.stderr > 0 and prev_h > 0:
            rate_h = math.log2(prev_h / lh.stderr)
        if prev_k is not None and lk.stderr > 0 and prev_k > 0:
            rate_k = math.log2(prev_k / lk.stderr)
        print(f"{2**exp:>9} {lh.mean:>14.8f} {lh.stderr:>10.2e} "
              f"{lk.mean:>14.8f} {lk.stderr:>10.2e} {rate_h:>7.2f} {rate_k:>7.2f}")
        prev_h, prev_k = lh.stderr, lk.stderr
    print("# rate columns: log2(stderr ratio) per doubling; 0.5 = plain MC")
    return 0


if __name__ == "__main__":
    sys.exit(main())

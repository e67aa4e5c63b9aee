"""Mean gap and Gaussian fit of I_n(rho) across dimensions, constant profile.

    python scripts/clt_sweep.py --ns 4,8,16,32,64 --trials 20000 --rho 2
"""

import argparse
import csv
import sys

import numpy as np

from kronmimo.equivalents import v_of_rho
from kronmimo.montecarlo import normality_test, run_batch
from kronmimo.profile import generate


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--ns", default="4,8,16,32,64")
    ap.add_argument("--ratio", type=float, default=1.0, help="N/n")
    ap.add_argument("--rho", type=float, default=2.0)
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--csv", help="write the table here instead of stdout")
    args = ap.parse_args()

    rows = []
    for n in (int(v) for v in args.ns.split(",")):
        p = generate("constant", max(1, round(args.ratio * n)), n, (1.0,))
        eq = v_of_rho(p, args.rho)
        batch = run_batch(p, args.rho, args.trials, seed=args.seed + n, parallelism=args.threads)
        rep = normality_test(batch, eq)
        rows.append(
            {
                "n": n,
                "N": p.big_n,
                "V": eq.v,
                "sigma2": eq.sigma2,
                "mean": batch.mean,
                "n_times_gap": n * (batch.mean - eq.v),
                "n_times_stderr": n * batch.stderr,
                "var_ratio": rep.var_ratio,
                "skewness": rep.skewness,
                "excess_kurtosis": rep.excess_kurtosis,
                "ks_p": rep.ks_p,
            }
        )
        print(f"n={n:4d} done", file=sys.stderr)

    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    writer = csv.DictWriter(out, fieldnames=list(rows[0]))
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})
    if args.csv:
        out.close()


if __name__ == "__main__":
    main()

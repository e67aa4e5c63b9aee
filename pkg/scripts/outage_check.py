"""Gaussian outage approximation against the empirical CDF of simulated I_n(rho).

    python scripts/outage_check.py --N 8 --n 4 --rho 5 --trials 50000
"""

import argparse

import numpy as np

from kronmimo.equivalents import outage_from, v_of_rho
from kronmimo.montecarlo import run_batch
from kronmimo.profile import generate, parse_generator


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--generate", default="exponential-decay:0.8")
    ap.add_argument("--N", type=int, default=8)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--rho", type=float, default=5.0)
    ap.add_argument("--trials", type=int, default=50_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    kind, params = parse_generator(args.generate)
    p = generate(kind, args.N, args.n, params)
    eq = v_of_rho(p, args.rho)
    samples = np.sort(run_batch(p, args.rho, args.trials, seed=args.seed).samples)
    print(f"V = {eq.v:.5f} nats, sigma = {eq.sigma:.5f}, sample mean {samples.mean():.5f}, sample std {samples.std():.5f}")
    print(f"{'z':>6} {'threshold':>10} {'gaussian':>10} {'empirical':>10}")
    for z in (-3, -2, -1, 0, 1, 2):
        r = eq.v + z * eq.sigma
        emp = np.searchsorted(samples, r) / samples.size
        print(f"{z:6d} {r:10.4f} {outage_from(eq, r):10.5f} {emp:10.5f}")


if __name__ == "__main__":
    main()

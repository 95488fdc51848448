#!/usr/bin/env python3
"""Full threshold-regime sweep on 1000-node small-world graphs.

Writes one CSV row per (regime, ratio) and prints a compact table.
"""

import argparse

from socialrec.experiments import REGIMES, ExperimentSpec, export_results, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replicates", type=int, default=500)
    ap.add_argument("--ratios", default="0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4")
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--k", type=int, default=10)
    ap.add_argument("--p", type=float, default=0.1)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--seed", type=int, default=20120101)
    ap.add_argument("--output", "-o", default="threshold_sweep.csv")
    args = ap.parse_args()

    ratios = tuple(float(x) for x in args.ratios.split(","))
    results = []
    for regime in REGIMES:
        spec = ExperimentSpec(n=args.n, k=args.k, p=args.p, regime=regime, ratios=ratios,
                              replicates=args.replicates, seed=args.seed, jobs=args.jobs)
        res = run_experiment(spec)
        results.append(res)
        for row in res.rows():
            print(f"{regime:>9} ratio={row['ratio']:.2f} majority={row['mean_majority_frac']:.3f} "
                  f"minority={row['mean_minority_frac']:.3f} inactive={row['mean_inactive_frac']:.3f} "
                  f"iterations={row['mean_iterations']:.2f}")
    export_results(results, args.output)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()

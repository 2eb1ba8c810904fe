#!/usr/bin/env python3
"""Sampling experiment: push-forward statistics for a logical scenario
and leaf frequencies for abstract-scenario sampling strategies."""

import argparse
from collections import Counter

from scenkit.fixtures import slope_drive_scenario
from scenkit.logic import binary_scenarios, enumerate_scenarios, sample_abstract
from scenkit.logical import sample


def ks_statistic(values, cdf):
    xs = sorted(values)
    n = len(xs)
    d = 0.0
    for i, x in enumerate(xs):
        f = cdf(x)
        d = max(d, (i + 1) / n - f, f - i / n)
    return d


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    L = slope_drive_scenario()
    draws = sample(L, None, args.count, rng_seed=args.seed)
    finals = [traj.samples[-1]["pos"] for _, traj in draws]
    ks = ks_statistic(finals, lambda v: min(max((v - 10.0) / 20.0, 0.0), 1.0))
    print(f"push-forward of the final position over {args.count} draws:")
    print(f"  min {min(finals):.3f}  max {max(finals):.3f}  KS vs uniform[10,30] {ks:.4f}")

    A = binary_scenarios(3)
    leaves = enumerate_scenarios(A)
    print(f"\nleaf frequencies over {len(leaves)} binary scenarios, 8000 draws:")
    for strategy in ("uniform-leaf", "uniform-branch", "rejection"):
        counts = Counter(
            t.sort_key() for t in sample_abstract(A, 8000, strategy, rng_seed=args.seed)
        )
        spread = ", ".join(str(counts[l.sort_key()]) for l in leaves)
        print(f"  {strategy:>14}: {spread}")


if __name__ == "__main__":
    main()

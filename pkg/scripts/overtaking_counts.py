#!/usr/bin/env python3
"""Rural overtaking experiment: tabulate the (n!)^2 * C(m+n, n) choice
counts, then synthesize and monitor every choice for one configuration."""

import argparse
import time

from scenkit.monitoring import Verdict, monitor_word
from scenkit.rural import (
    RuralConfig,
    count_lower_bound,
    enumerate_choices,
    rural_formula,
    suggested_grid,
    synthesize,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=3)
    parser.add_argument("--m", type=int, default=2)
    parser.add_argument("--table-max", type=int, default=4)
    args = parser.parse_args()

    print("choice counts (rows n, columns m):")
    header = "    " + "".join(f"{m:>10}" for m in range(args.table_max))
    print(header)
    for n in range(args.table_max + 1):
        row = "".join(f"{count_lower_bound(n, m):>10}" for m in range(args.table_max))
        print(f"{n:>3} {row}")

    cfg = RuralConfig(n=args.n, m=args.m)
    grid = suggested_grid(cfg)
    scenario = rural_formula(cfg, grid)
    choices = enumerate_choices(args.n, args.m)
    print(f"\nsynthesizing {len(choices)} choices on a {grid.duration:.0f} s grid")
    t0 = time.perf_counter()
    accepted = 0
    for choice in choices:
        trajectory = synthesize(choice, cfg, grid)
        accepted += monitor_word(trajectory, scenario) is Verdict.ACCEPTED
    dt = time.perf_counter() - t0
    print(f"accepted {accepted}/{len(choices)} in {dt:.1f} s")


if __name__ == "__main__":
    main()

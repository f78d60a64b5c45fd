#!/usr/bin/env python3
"""Record repair-loop yield statistics over many seeds.

For each seed: sample the family, repair to the target, and log how many
columns were sampled, deleted, and kept.  Deletion counts are observational
(they vary with q and the union structure of the family); nothing here is
asserted, the point is the distribution.

Example:
    python3 scripts/repair_yield.py --job ssm2 --seeds 50 --csv yield.csv
"""

import argparse
import csv
import statistics
import sys
import time

from ssmforge import ConstructionTask, construct

from run_constructions import JOBS


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--job", choices=sorted(JOBS), default="ssm2")
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--start-seed", type=int, default=0)
    ap.add_argument("--csv", help="write per-seed rows to this path")
    args = ap.parse_args(argv)

    target, family, q, _ = JOBS[args.job]
    rows = []
    for seed in range(args.start_seed, args.start_seed + args.seeds):
        t0 = time.perf_counter()
        _, report = construct(ConstructionTask(target, family, q, seed=seed))
        rows.append(
            (seed, report.initial_columns, report.deletions,
             report.final_columns, round(report.rate, 6),
             round(time.perf_counter() - t0, 2))
        )
        print(f"seed={seed:3d} sampled={rows[-1][1]:4d} "
              f"deleted={rows[-1][2]:4d} kept={rows[-1][3]:4d} "
              f"({rows[-1][5]}s)")

    deletions = [r[2] for r in rows]
    kept = [r[3] for r in rows]
    print(f"\n{args.job} over {args.seeds} seeds: "
          f"deletions mean={statistics.mean(deletions):.1f} "
          f"min={min(deletions)} max={max(deletions)}; "
          f"kept mean={statistics.mean(kept):.1f} "
          f"min={min(kept)} max={max(kept)}")

    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["seed", "sampled", "deleted", "kept", "rate", "seconds"])
            w.writerows(rows)
        print(f"wrote {args.csv}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

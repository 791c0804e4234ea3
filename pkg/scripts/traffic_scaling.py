"""Online traffic of both variants as the fleet grows, with a linear fit.

    python scripts/traffic_scaling.py --n-list 100,200,500,1000 --out scaling.csv
"""

import argparse
import csv
import statistics
import sys

from dronepriv.scenarios import BENCH_HEADER, bench_one
from dronepriv.shortlist import Variant


def fit(xs, ys):
    slope, intercept = statistics.linear_regression(xs, ys)
    r2 = statistics.correlation(xs, ys) ** 2
    return slope, intercept, r2


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-list", default="100,200,500,1000")
    ap.add_argument("--repeats", type=int, default=1)
    ap.add_argument("--radius-m", type=float, default=200.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="also write raw rows as CSV")
    args = ap.parse_args(argv)
    ns = [int(x) for x in args.n_list.split(",")]

    rows = []
    for v in Variant:
        for n in ns:
            for rep in range(args.repeats):
                rows.append(bench_one(n, v, seed=args.seed, repeat=rep, radius_m=args.radius_m))
    if args.out:
        with open(args.out, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(BENCH_HEADER)
            w.writerows(r.cells() for r in rows)

    print(f"{'variant':<14} {'n':>6} {'MB':>9} {'rounds':>6} {'ms':>9}")
    for r in rows:
        print(f"{r.variant:<14} {r.n:>6} {r.total_bytes / 1e6:>9.3f} {r.rounds:>6} {r.wall_ms:>9.1f}")
    print()
    for v in Variant:
        # bytes do not vary across repeats, only wall time does
        pts = sorted({r.n: r.total_bytes for r in rows if r.variant == v.value}.items())
        if len(pts) < 2:
            continue
        xs, ys = zip(*pts)
        slope, intercept, r2 = fit(xs, ys)
        print(f"{v.value}: bytes ~ {slope:.1f}*n + {intercept:.0f}  R^2={r2:.6f}  "
              f"bytes({xs[-1]})/bytes({xs[0]})={ys[-1] / ys[0]:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""How many drones sit near the citizen, read off the traffic alone.

At fixed fleet size the oblivious variant's transcript never changes, while
the non-oblivious variant grows with the number of nearby drones.

    python scripts/side_channel_density.py --n 200 --densities 0,1,2,5,10
"""

import argparse
import sys

from dronepriv.geometry import GeoCoord, VicinitySpec, meters_to_degree_thresholds
from dronepriv.scenarios import CITY, density_fleet, oracle_decisions, run_variant
from dronepriv.shortlist import Variant


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--densities", default="0,1,2,5,10")
    ap.add_argument("--radius-m", type=float, default=250.0)
    ap.add_argument("--lat", type=float, default=40.76)
    ap.add_argument("--lon", type=float, default=-73.97)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    citizen = GeoCoord(args.lat, args.lon)
    vic = VicinitySpec.thresholds(*meters_to_degree_thresholds(args.radius_m, citizen.lat))
    print(f"n={args.n}, vicinity {args.radius_m:.0f} m")
    print(f"{'nearby':>6} {'oblivious MB':>13} {'rounds':>6} {'non-obliv MB':>13} {'rounds':>6}")
    for k in (int(x) for x in args.densities.split(",")):
        poses = density_fleet(args.n, k, citizen, vic, CITY, seed=args.seed + k)
        actual = sum(near for near, _, _ in oracle_decisions(citizen, poses, vic))
        cells = []
        for v in (Variant.OBLIVIOUS, Variant.NON_OBLIVIOUS):
            t = run_variant(v, citizen, poses, vic, CITY, seed=args.seed + k).transcript
            cells.append(f"{t.total_bytes / 1e6:>13.6f} {t.rounds:>6}")
        print(f"{actual:>6} " + " ".join(cells))
    return 0


if __name__ == "__main__":
    sys.exit(main())

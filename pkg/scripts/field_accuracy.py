"""Hand-placed citizen/drone cases through the full two-party pipeline.

With ``--noise-m`` the drone's reported positions are perturbed before the
query (ground truth stays fixed), giving a rough feel for GPS error.

    python scripts/field_accuracy.py
    python scripts/field_accuracy.py --noise-m 5 --trials 50
"""

import argparse
import math
import random
import sys

from dronepriv.geometry import DronePose, destination_point
from dronepriv.scenarios import field_placements, run_variant
from dronepriv.shortlist import ServiceArea, Variant


def jitter(pose: DronePose, rng: random.Random, sigma_m: float) -> DronePose:
    if sigma_m <= 0:
        return pose
    # same offset at both fixes, so heading survives and only position moves
    off = (rng.uniform(0, 2 * math.pi), abs(rng.gauss(0, sigma_m)))
    return DronePose(pose.id, destination_point(pose.pos_t, *off),
                     destination_point(pose.pos_t_delta, *off), pose.camera,
                     pose.gimbal_yaw_rad)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.OBLIVIOUS.value)
    ap.add_argument("--noise-m", type=float, default=0.0)
    ap.add_argument("--trials", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    placements = field_placements()
    area = ServiceArea.around([p.citizen for p in placements] + [p.drone.pos_t for p in placements])
    rng = random.Random(args.seed)
    scores = []
    for trial in range(args.trials):
        agree = 0
        for i, pl in enumerate(placements):
            drone = jitter(pl.drone, rng, args.noise_m)
            run = run_variant(args.variant, pl.citizen, [drone], pl.vicinity, area,
                              seed=trial * 100 + i)
            d = run.decisions[0]
            agree += d.shortlisted is pl.expected
            if args.trials == 1:
                phi = "-" if d.phi_rad is None else f"{math.degrees(d.phi_rad):6.2f}"
                mark = "ok" if d.shortlisted is pl.expected else "MISS"
                print(f"{pl.name:<14} expected={str(pl.expected):<5} got={str(d.shortlisted):<5} "
                      f"phi={phi:>6}  {mark}")
        scores.append(agree)
    if args.trials == 1:
        print(f"agreement {scores[0]}/{len(placements)}")
    else:
        print(f"noise {args.noise_m} m over {args.trials} trials: mean agreement "
              f"{sum(scores) / len(scores):.2f}/{len(placements)}, worst {min(scores)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

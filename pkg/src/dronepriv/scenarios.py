"""Synthetic workloads shared by the bench command, scripts and tests."""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass

from .geometry import (CameraSpec, DronePose, GeoCoord, VicinitySpec, destination_point,
                       detect_field_of_view, field_of_view_angle, meters_to_degree_thresholds)
from .shortlist import (CitizenInput, DroneInput, ProtocolRun, ServiceArea, SessionParams, Variant,
                        run_non_oblivious_variant, run_oblivious)

# a city-sized box: the area must keep |lat|,|lon| offsets within 0.5 deg
CITY = ServiceArea(40.75, -73.98, 0.25, 0.25)


def random_pose(rng: random.Random, drone_id: str, center: GeoCoord, spread_deg: float,
                speed=(5.0, 15.0), theta_deg=(20.0, 45.0)) -> DronePose:
    p = GeoCoord(center.lat + rng.uniform(-spread_deg, spread_deg),
                 center.lon + rng.uniform(-spread_deg, spread_deg))
    q = destination_point(p, rng.uniform(0, 2 * math.pi), rng.uniform(*speed))
    return DronePose(drone_id, p, q, CameraSpec.from_half_angle(math.radians(rng.uniform(*theta_deg))))


def random_fleet(rng: random.Random, n: int, center: GeoCoord, spread_deg: float) -> list[DronePose]:
    return [random_pose(rng, f"d{i:04d}", center, spread_deg) for i in range(n)]


def density_fleet(n: int, k: int, citizen: GeoCoord, vicinity: VicinitySpec, area: ServiceArea,
                  seed: int = 0) -> list[DronePose]:
    """``n`` drones of which exactly ``k`` are inside the citizen's vicinity."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    rng = random.Random(seed)
    near_spread = 0.9 * min(vicinity.lat_deg, vicinity.lon_deg)
    out = []
    while len(out) < n:
        i = len(out)
        if i < k:
            pose = random_pose(rng, f"d{i:04d}", citizen, near_spread)
        else:
            pose = random_pose(rng, f"d{i:04d}", GeoCoord(area.lat0, area.lon0),
                               0.95 * min(area.half_lat_deg, area.half_lon_deg))
            if vicinity.contains(citizen, pose.pos_t):
                continue
        out.append(pose)
    rng.shuffle(out)
    return out


def oracle_decisions(citizen: GeoCoord, poses, vicinity: VicinitySpec) -> list[tuple[bool, float | None, bool]]:
    """Plaintext (in_vicinity, phi, shortlisted) per drone."""
    out = []
    for p in poses:
        near = vicinity.contains(citizen, p.pos_t)
        phi = field_of_view_angle(citizen, p) if near else None
        out.append((near, phi, detect_field_of_view(citizen, p, vicinity)))
    return out


def run_variant(variant: Variant | str, citizen: GeoCoord, poses, vicinity: VicinitySpec,
                area: ServiceArea, seed: int = 0) -> ProtocolRun:
    drones = [DroneInput.from_pose(p) for p in poses]
    session = SessionParams(len(drones), area, Variant(variant), citizen_seed=f"citizen/{seed}",
                            authority_seed=f"authority/{seed}", dealer_seed=f"dealer/{seed}")
    query = CitizenInput(citizen, vicinity.lat_deg, vicinity.lon_deg)
    fn = run_oblivious if Variant(variant) is Variant.OBLIVIOUS else run_non_oblivious_variant
    return fn(query, drones, None, session)


# -- hand-placed field scenario -------------------------------------------------------

@dataclass(frozen=True)
class Placement:
    name: str
    citizen: GeoCoord
    drone: DronePose
    vicinity: VicinitySpec
    expected: bool


def field_placements(origin: GeoCoord = GeoCoord(40.75, -73.98)) -> list[Placement]:
    """Twenty citizen/drone placements whose verdict is fixed by construction.

    The drone sits at ``origin`` heading along a chosen bearing with a 30 deg
    half-angle camera; the citizen stands at a chosen offset angle and range.
    Offsets stay at least 5 deg away from the cone edge and ranges at least
    20% away from the vicinity edge, so the answer never hinges on rounding.
    """
    theta = math.radians(30.0)
    cam = CameraSpec.from_half_angle(theta)
    lat_v, lon_v = meters_to_degree_thresholds(100.0, origin.lat)
    vic = VicinitySpec.thresholds(lat_v, lon_v)
    # (offset from heading deg, range m, expected)
    cases = [
        (0, 30, True), (0, 60, True), (10, 40, True), (-10, 40, True), (25, 50, True),
        (-25, 50, True), (20, 70, True), (-15, 25, True),
        (35, 40, False), (-35, 40, False), (90, 40, False), (-90, 60, False),
        (180, 40, False), (150, 30, False), (-120, 50, False),
        (0, 300, False), (5, 250, False), (-5, 500, False), (45, 60, False), (60, 20, False),
    ]
    out = []
    for i, (off_deg, rng_m, expected) in enumerate(cases):
        heading = math.radians(37.0 * i)
        nxt = destination_point(origin, heading, 10.0)
        drone = DronePose(f"field-{i:02d}", origin, nxt, cam)
        citizen = destination_point(origin, heading + math.radians(off_deg), rng_m)
        out.append(Placement(f"off{off_deg:+d}_r{rng_m}", citizen, drone, vic, expected))
    return out


# -- bench -----------------------------------------------------------------------------

BENCH_HEADER = ("n", "variant", "total_bytes", "c2a_bytes", "a2c_bytes", "rounds",
                "preprocessing_bytes", "wall_ms")


@dataclass(frozen=True)
class BenchRow:
    n: int
    variant: str
    total_bytes: int
    c2a_bytes: int
    a2c_bytes: int
    rounds: int
    preprocessing_bytes: int
    wall_ms: float

    def cells(self, units: str = "bytes") -> list[str]:
        def fmt(b: int) -> str:
            return f"{b / 1e6:.3f}" if units == "mb" else str(b)
        return [str(self.n), self.variant, fmt(self.total_bytes), fmt(self.c2a_bytes),
                fmt(self.a2c_bytes), str(self.rounds), fmt(self.preprocessing_bytes),
                f"{self.wall_ms:.1f}"]


def bench_one(n: int, variant: Variant | str, seed: int = 0, repeat: int = 0,
              radius_m: float = 200.0, area: ServiceArea = CITY) -> BenchRow:
    rng = random.Random(seed * 1_000_003 + n)
    center = GeoCoord(area.lat0, area.lon0)
    citizen = GeoCoord(area.lat0 + rng.uniform(-0.1, 0.1), area.lon0 + rng.uniform(-0.1, 0.1))
    poses = random_fleet(rng, n, center, 0.9 * min(area.half_lat_deg, area.half_lon_deg))
    vic = VicinitySpec.thresholds(*meters_to_degree_thresholds(radius_m, citizen.lat))
    t0 = time.perf_counter()
    run = run_variant(variant, citizen, poses, vic, area, seed=seed * 7919 + repeat)
    wall = (time.perf_counter() - t0) * 1e3
    t = run.transcript
    return BenchRow(n, Variant(variant).value, t.total_bytes, t.c2a_bytes, t.a2c_bytes, t.rounds,
                    t.preprocessing_bytes, wall)

"""Authority-side fleet registry, JSONL ingest and a synthetic fleet generator."""

from __future__ import annotations

import json
import math
import random
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from ..geometry import CameraSpec, DronePose, GeoCoord, GeometryError, destination_point
from ..shortlist import DroneInput

REQUIRED_FIELDS = ("id", "lat_t", "lon_t", "lat_t2", "lon_t2", "theta_deg")


class FleetError(ValueError):
    pass


@dataclass(frozen=True)
class FleetEntry:
    pose: DronePose
    drone: DroneInput
    updated_at: float


def pose_from_record(rec: Mapping) -> DronePose:
    missing = [k for k in REQUIRED_FIELDS if k not in rec]
    if missing:
        raise FleetError(f"missing field(s) {', '.join(missing)}")
    if not isinstance(rec["id"], str) or not rec["id"]:
        raise FleetError("id must be a non-empty string")
    nums = {}
    for k in REQUIRED_FIELDS[1:] + ("gimbal_yaw_deg",):
        v = rec.get(k)
        if v is None and k == "gimbal_yaw_deg":
            continue
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise FleetError(f"{k} must be a number")
        nums[k] = float(v)
    theta = nums["theta_deg"]
    if not 0.0 < theta < 90.0:
        raise FleetError(f"theta_deg {theta} outside (0, 90)")
    yaw = nums.get("gimbal_yaw_deg")
    try:
        return DronePose(rec["id"], GeoCoord(nums["lat_t"], nums["lon_t"]),
                         GeoCoord(nums["lat_t2"], nums["lon_t2"]),
                         CameraSpec.from_half_angle(math.radians(theta)),
                         None if yaw is None else math.radians(yaw))
    except GeometryError as exc:
        raise FleetError(str(exc)) from None


class FleetRegistry:
    """Drones known to the authority, keyed by id.

    Updates replace the whole mapping (copy-on-write), so a snapshot taken
    for a query never changes underneath it.
    """

    def __init__(self, max_step_m: float = float(1 << 10)):
        self.max_step_m = max_step_m
        self._lock = threading.Lock()
        self._entries: Mapping[str, FleetEntry] = MappingProxyType({})

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, drone_id: str) -> bool:
        return drone_id in self._entries

    def _entry(self, pose: DronePose, now: float | None) -> FleetEntry:
        drone = DroneInput.from_pose(pose)
        if drone.dvec.norm > self.max_step_m:
            raise FleetError(f"drone {pose.id!r}: pose pair {drone.dvec.norm:.1f} m apart, "
                             f"limit {self.max_step_m:g} m")
        return FleetEntry(pose, drone, time.time() if now is None else now)

    def add(self, pose: DronePose, now: float | None = None) -> FleetRegistry:
        entry = self._entry(pose, now)
        with self._lock:
            if pose.id in self._entries:
                raise FleetError(f"duplicate drone id {pose.id!r}")
            self._entries = MappingProxyType({**self._entries, pose.id: entry})
        return self

    def update_drone(self, drone_id: str, pos_t: GeoCoord, pos_t2: GeoCoord,
                     now: float | None = None) -> FleetRegistry:
        with self._lock:
            old = self._entries.get(drone_id)
            if old is None:
                raise KeyError(f"unknown drone id {drone_id!r}")
            pose = DronePose(drone_id, pos_t, pos_t2, old.pose.camera, old.pose.gimbal_yaw_rad)
            self._entries = MappingProxyType({**self._entries, drone_id: self._entry(pose, now)})
        return self

    def snapshot(self) -> tuple[DroneInput, ...]:
        return tuple(e.drone for e in self._entries.values())

    def entries(self) -> Mapping[str, FleetEntry]:
        return self._entries

    def poses(self) -> list[DronePose]:
        return [e.pose for e in self._entries.values()]


def update_drone(registry: FleetRegistry, drone_id: str, pos_t: GeoCoord,
                 pos_t2: GeoCoord) -> FleetRegistry:
    return registry.update_drone(drone_id, pos_t, pos_t2)


def parse_fleet(lines: Iterable[str], max_step_m: float = float(1 << 10)) -> FleetRegistry:
    reg = FleetRegistry(max_step_m)
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            if not isinstance(rec, dict):
                raise FleetError("expected a JSON object")
            reg.add(pose_from_record(rec))
        except (json.JSONDecodeError, FleetError) as exc:
            raise FleetError(f"line {lineno}: {exc}") from None
    return reg


def ingest_fleet(path, max_step_m: float = float(1 << 10)) -> FleetRegistry:
    with open(path, encoding="utf-8") as fh:
        return parse_fleet(fh, max_step_m)


def pose_to_record(pose: DronePose) -> dict:
    rec = {"id": pose.id, "lat_t": pose.pos_t.lat, "lon_t": pose.pos_t.lon,
           "lat_t2": pose.pos_t_delta.lat, "lon_t2": pose.pos_t_delta.lon,
           "theta_deg": math.degrees(pose.theta_rad)}
    if pose.gimbal_yaw_rad is not None:
        rec["gimbal_yaw_deg"] = math.degrees(pose.gimbal_yaw_rad)
    return rec


@dataclass(frozen=True)
class BBox:
    lat_min: float
    lon_min: float
    lat_max: float
    lon_max: float

    def __post_init__(self):
        if not (-89.0 < self.lat_min < self.lat_max < 89.0):
            raise ValueError(f"bad latitude range [{self.lat_min}, {self.lat_max}]")
        if not (-180.0 <= self.lon_min < self.lon_max <= 180.0):
            raise ValueError(f"bad longitude range [{self.lon_min}, {self.lon_max}]")

    @classmethod
    def parse(cls, text: str) -> BBox:
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError("bbox needs lat_min,lon_min,lat_max,lon_max")
        return cls(*parts)


def generate_fleet(n: int, bbox: BBox, seed: int = 0, *, speed_mps=(5.0, 15.0),
                   interval_s: float = 1.0, theta_deg=(20.0, 45.0)) -> list[dict]:
    """``n`` drones uniform over ``bbox`` with random headings and speeds."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(seed)
    out = []
    for i in range(n):
        p = GeoCoord(rng.uniform(bbox.lat_min, bbox.lat_max), rng.uniform(bbox.lon_min, bbox.lon_max))
        q = destination_point(p, rng.uniform(0.0, 2 * math.pi), rng.uniform(*speed_mps) * interval_s)
        out.append({"id": f"drone-{i:05d}", "lat_t": p.lat, "lon_t": p.lon,
                    "lat_t2": q.lat, "lon_t2": q.lon, "theta_deg": rng.uniform(*theta_deg)})
    return out


def write_fleet(records: Iterable[dict], path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return path

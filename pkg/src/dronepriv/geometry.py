"""Plaintext field-of-view geometry.

Everything here runs in the clear. It is the reference the secret-shared
protocol is checked against, and it also backs the authority's local
precomputation (motion vectors, cosines) and the citizen's radius-to-degree
conversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

EARTH_RADIUS_M = 6_371_000.0


class GeometryError(ValueError):
    """Raised for degenerate or out-of-domain geometric inputs."""


@dataclass(frozen=True)
class GeoCoord:
    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise GeometryError(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise GeometryError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise GeometryError(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class PlanarVector:
    """East/North displacement in meters."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite vector ({self.x}, {self.y})")

    def __neg__(self) -> PlanarVector:
        return PlanarVector(-self.x, -self.y)

    def scaled(self, k: float) -> PlanarVector:
        return PlanarVector(self.x * k, self.y * k)

    def dot(self, other: PlanarVector) -> float:
        return self.x * other.x + self.y * other.y

    @property
    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    @property
    def norm_sq(self) -> float:
        return self.x * self.x + self.y * self.y


def camera_half_angle(focal_length_mm: float, sensor_dim_mm: float) -> float:
    """Half-angle of the cone of vision, ``arctan(d / 2f)``."""
    if not (focal_length_mm > 0 and sensor_dim_mm > 0):
        raise GeometryError("focal length and sensor dimension must be positive")
    return math.atan(sensor_dim_mm / (2.0 * focal_length_mm))


@dataclass(frozen=True)
class CameraSpec:
    focal_length_mm: float
    sensor_dim_mm: float

    @property
    def half_angle_rad(self) -> float:
        return camera_half_angle(self.focal_length_mm, self.sensor_dim_mm)

    @classmethod
    def from_half_angle(cls, theta_rad: float, focal_length_mm: float = 1.0) -> CameraSpec:
        """Build a camera with the given half-angle (sensor size is derived)."""
        if not 0.0 < theta_rad < math.pi / 2:
            raise GeometryError(f"half-angle {theta_rad} outside (0, pi/2)")
        return cls(focal_length_mm, 2.0 * focal_length_mm * math.tan(theta_rad))


@dataclass(frozen=True)
class DronePose:
    """Two GPS fixes taken a short interval apart, plus the camera.

    ``gimbal_yaw_rad`` is the counter-clockwise angle between the direction
    of motion and the camera axis, when the camera is gimbal-mounted.
    """

    id: str
    pos_t: GeoCoord
    pos_t_delta: GeoCoord
    camera: CameraSpec
    gimbal_yaw_rad: float | None = None

    def __post_init__(self):
        if self.pos_t == self.pos_t_delta:
            raise GeometryError(f"drone {self.id!r}: pose pair identical, direction undefined")

    @property
    def theta_rad(self) -> float:
        return self.camera.half_angle_rad

    def camera_axis(self, radius_m: float = EARTH_RADIUS_M) -> PlanarVector:
        motion = vectorize(self.pos_t, self.pos_t_delta, radius_m)
        if motion.norm == 0.0:
            raise GeometryError(f"drone {self.id!r}: zero-length motion vector")
        if self.gimbal_yaw_rad:
            return rotate_vector(motion, self.gimbal_yaw_rad)
        return motion


@dataclass(frozen=True)
class VicinitySpec:
    """Either a great-circle radius or per-axis degree thresholds.

    Threshold mode is the approximation used inside the protocol: a drone is
    nearby iff ``|dlat| <= lat_deg`` and ``|dlon| <= lon_deg``.
    """

    radius_m: float | None = None
    lat_deg: float | None = None
    lon_deg: float | None = None

    def __post_init__(self):
        has_radius = self.radius_m is not None
        has_thresholds = self.lat_deg is not None or self.lon_deg is not None
        if has_radius == has_thresholds:
            raise GeometryError("give either radius_m or both lat_deg/lon_deg")
        if has_radius and not self.radius_m > 0:
            raise GeometryError("vicinity radius must be positive")
        if has_thresholds:
            if self.lat_deg is None or self.lon_deg is None:
                raise GeometryError("both lat_deg and lon_deg are required")
            if not (self.lat_deg > 0 and self.lon_deg > 0):
                raise GeometryError("vicinity thresholds must be positive")

    @classmethod
    def radius(cls, radius_m: float) -> VicinitySpec:
        return cls(radius_m=radius_m)

    @classmethod
    def thresholds(cls, lat_deg: float, lon_deg: float) -> VicinitySpec:
        return cls(lat_deg=lat_deg, lon_deg=lon_deg)

    def contains(self, citizen: GeoCoord, drone_pos: GeoCoord,
                 radius_m: float = EARTH_RADIUS_M) -> bool:
        if self.radius_m is not None:
            return haversine_distance(citizen, drone_pos, radius_m) <= self.radius_m
        return (abs(citizen.lat - drone_pos.lat) <= self.lat_deg
                and abs(citizen.lon - drone_pos.lon) <= self.lon_deg)


def meters_per_degree(radius_m: float = EARTH_RADIUS_M) -> float:
    return radius_m * math.pi / 180.0


def vectorize(origin: GeoCoord, target: GeoCoord,
              radius_m: float = EARTH_RADIUS_M) -> PlanarVector:
    """Equirectangular projection of ``target`` with ``origin`` at (0, 0)."""
    k = meters_per_degree(radius_m)
    x = k * (target.lon - origin.lon) * math.cos(math.radians(origin.lat))
    y = k * (target.lat - origin.lat)
    return PlanarVector(x, y)


def haversine_distance(a: GeoCoord, b: GeoCoord, radius_m: float = EARTH_RADIUS_M) -> float:
    lat1, lat2 = math.radians(a.lat), math.radians(b.lat)
    dlat = lat2 - lat1
    dlon = math.radians(b.lon - a.lon)
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2.0 * radius_m * math.asin(min(1.0, math.sqrt(h)))


def clamped_arccos(x: float) -> float:
    return math.acos(max(-1.0, min(1.0, x)))


def angle_between(d: PlanarVector, c: PlanarVector) -> float:
    nd, nc = d.norm, c.norm
    if nd == 0.0 or nc == 0.0:
        raise GeometryError("angle undefined for a zero-length vector")
    return clamped_arccos(d.dot(c) / (nd * nc))


def rotate_vector(d: PlanarVector, alpha_rad: float) -> PlanarVector:
    """Rotate counter-clockwise (East towards North) by ``alpha_rad``."""
    ca, sa = math.cos(alpha_rad), math.sin(alpha_rad)
    return PlanarVector(d.x * ca - d.y * sa, d.x * sa + d.y * ca)


def field_of_view_angle(citizen: GeoCoord, drone: DronePose,
                        radius_m: float = EARTH_RADIUS_M) -> float:
    """Angle between the camera axis and the drone-to-citizen vector."""
    axis = drone.camera_axis(radius_m)
    return angle_between(axis, vectorize(drone.pos_t, citizen, radius_m))


def detect_field_of_view(citizen: GeoCoord, drone: DronePose, vicinity: VicinitySpec,
                         radius_m: float = EARTH_RADIUS_M) -> bool:
    """True iff the citizen is nearby and inside the drone's horizontal cone."""
    if not vicinity.contains(citizen, drone.pos_t, radius_m):
        return False
    return field_of_view_angle(citizen, drone, radius_m) <= drone.theta_rad


def vertical_fov_check(altitude_m: float, dist_m: float, theta_rad: float) -> bool:
    if not dist_m > 0:
        raise GeometryError("horizontal distance must be positive")
    if altitude_m < 0:
        raise GeometryError("altitude must be non-negative")
    return math.atan(altitude_m / dist_m) < theta_rad


def meters_to_degree_thresholds(radius_m: float, at_lat_deg: float,
                                earth_radius_m: float = EARTH_RADIUS_M) -> tuple[float, float]:
    """Convert a radius to (lat, lon) difference thresholds at a latitude."""
    if not radius_m > 0:
        raise GeometryError("radius must be positive")
    if not abs(at_lat_deg) < 89.0:
        raise GeometryError(f"latitude {at_lat_deg} too close to a pole")
    lat_vic = radius_m / meters_per_degree(earth_radius_m)
    return lat_vic, lat_vic / math.cos(math.radians(at_lat_deg))


def destination_point(origin: GeoCoord, bearing_rad: float, distance_m: float,
                      radius_m: float = EARTH_RADIUS_M) -> GeoCoord:
    """Inverse of :func:`vectorize` for a displacement given as bearing/length.

    ``bearing_rad`` is measured counter-clockwise from East, matching the
    planar frame. The returned point projects back to exactly that vector.
    """
    k = meters_per_degree(radius_m)
    x = distance_m * math.cos(bearing_rad)
    y = distance_m * math.sin(bearing_rad)
    lat = origin.lat + y / k
    lon = origin.lon + x / (k * math.cos(math.radians(origin.lat)))
    return GeoCoord(lat, lon)

import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from dronepriv.geometry import (EARTH_RADIUS_M, CameraSpec, DronePose, GeoCoord, GeometryError,
                                PlanarVector, VicinitySpec, angle_between, camera_half_angle,
                                destination_point, detect_field_of_view, field_of_view_angle,
                                haversine_distance, meters_per_degree, meters_to_degree_thresholds,
                                rotate_vector, vectorize, vertical_fov_check)

# frozen from a 30-digit mpmath evaluation
ATAN_075 = 0.643501108793284386802809228717
K_0001_DEG = 111.19492664455873734580833886
PHI_EXAMPLE = 0.454868504961175254750617797622
VFOV_30_100_DEG = 16.69924423399362184036884718

lats = st.floats(-70, 70)
lons = st.floats(-179, 179)
coords = st.builds(GeoCoord, lats, lons)
comps = st.floats(-1e4, 1e4, allow_nan=False)
vectors = st.builds(PlanarVector, comps, comps).filter(lambda v: v.norm > 1e-6)
angles = st.floats(-2 * math.pi, 2 * math.pi)


def cam(theta_deg):
    return CameraSpec.from_half_angle(math.radians(theta_deg))


def test_coord_ranges():
    with pytest.raises(GeometryError):
        GeoCoord(91, 0)
    with pytest.raises(GeometryError):
        GeoCoord(0, -180.5)
    with pytest.raises(GeometryError):
        GeoCoord(float("nan"), 0)


def test_camera_half_angle():
    assert camera_half_angle(3.0, 6.0) == pytest.approx(math.pi / 4, abs=1e-15)
    assert camera_half_angle(4.0, 6.0) == pytest.approx(ATAN_075, abs=1e-15)
    assert camera_half_angle(5.0, 1e-9) < 1e-9
    for f, d in [(0, 1), (1, 0), (-1, 2)]:
        with pytest.raises(GeometryError):
            camera_half_angle(f, d)


@given(st.floats(1, 89))
def test_camera_from_half_angle_round_trip(deg):
    c = cam(deg)
    assert c.half_angle_rad == pytest.approx(math.radians(deg), rel=1e-12)


def test_vectorize_examples():
    assert vectorize(GeoCoord(3, 4), GeoCoord(3, 4)) == PlanarVector(0, 0)
    v = vectorize(GeoCoord(12.0, 77.0), GeoCoord(12.001, 77.0))
    assert v.x == 0
    assert v.y == pytest.approx(K_0001_DEG, rel=1e-12)
    assert round(v.y) == 111
    e = vectorize(GeoCoord(0, 0), GeoCoord(0, 0.001))
    assert e.x == pytest.approx(K_0001_DEG, rel=1e-12) and e.y == 0
    h = vectorize(GeoCoord(60, 0), GeoCoord(60, 0.001))
    assert h.x == pytest.approx(e.x / 2, rel=1e-12)
    assert h.x == pytest.approx(haversine_distance(GeoCoord(60, 0), GeoCoord(60, 0.001)), rel=1e-3)


def test_haversine_examples():
    p = GeoCoord(12.0, 77.0)
    assert haversine_distance(p, p) == 0
    assert haversine_distance(p, GeoCoord(12.001, 77.0)) == pytest.approx(K_0001_DEG, rel=1e-9)


@given(coords, st.floats(0, 2 * math.pi), st.floats(1, 10_000))
def test_equirectangular_close_to_haversine(origin, bearing, dist):
    target = destination_point(origin, bearing, dist)
    assume(abs(target.lat) <= 70)
    assert vectorize(origin, target).norm == pytest.approx(haversine_distance(origin, target),
                                                           rel=5e-3)


@given(lats, lons, st.floats(-0.05, 0.05))
def test_vectorize_antisymmetric_at_equal_latitude(lat, lon, dlon):
    a, b = GeoCoord(lat, lon), GeoCoord(lat, max(-180, min(180, lon + dlon)))
    assert vectorize(a, b) == -vectorize(b, a)


@given(coords, st.floats(-math.pi, math.pi), st.floats(0.1, 5000))
def test_destination_point_inverts_vectorize(origin, bearing, dist):
    v = vectorize(origin, destination_point(origin, bearing, dist))
    assert v.norm == pytest.approx(dist, rel=1e-9, abs=1e-6)
    assert v.x == pytest.approx(dist * math.cos(bearing), abs=1e-6)


def test_angle_between_examples():
    assert angle_between(PlanarVector(1, 0), PlanarVector(0, 2)) == pytest.approx(math.pi / 2)
    assert angle_between(PlanarVector(1, 1), PlanarVector(2, 2)) == pytest.approx(0, abs=1e-7)
    assert angle_between(PlanarVector(1, 0), PlanarVector(-1, 0)) == pytest.approx(math.pi)
    with pytest.raises(GeometryError):
        angle_between(PlanarVector(0, 0), PlanarVector(1, 0))


@given(vectors, vectors, st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_angle_between_symmetric_scale_invariant_bounded(d, c, k, m):
    a = angle_between(d, c)
    assert 0 <= a <= math.pi
    assert angle_between(c, d) == pytest.approx(a, abs=1e-9)
    assert angle_between(d.scaled(k), c.scaled(m)) == pytest.approx(a, abs=1e-6)


def test_rotate_examples():
    d = PlanarVector(3, -2)
    assert rotate_vector(d, 0) == d
    r = rotate_vector(PlanarVector(1, 0), math.pi / 2)
    assert r.x == pytest.approx(0, abs=1e-15) and r.y == pytest.approx(1)


@given(vectors, angles)
def test_rotate_preserves_norm(d, alpha):
    assert rotate_vector(d, alpha).norm == pytest.approx(d.norm, rel=1e-12)


DRONE = DronePose("x", GeoCoord(12.0, 77.0), GeoCoord(12.001, 77.0), cam(30))
NEAR_500 = VicinitySpec.radius(500)


def test_detect_field_of_view_examples():
    assert detect_field_of_view(GeoCoord(12.002, 77.0), DRONE, NEAR_500)
    assert not detect_field_of_view(GeoCoord(12.0, 77.002), DRONE, NEAR_500)
    citizen = GeoCoord(12.001, 77.0005)
    # brute force: camera axis due North, citizen offset east by 0.0005 deg, north by 0.001 deg
    brute = math.atan2(0.0005 * math.cos(math.radians(12.0)), 0.001)
    assert brute == pytest.approx(PHI_EXAMPLE, abs=1e-12)
    assert field_of_view_angle(citizen, DRONE) == pytest.approx(PHI_EXAMPLE, abs=1e-9)
    assert detect_field_of_view(citizen, DRONE, NEAR_500) is (PHI_EXAMPLE <= math.radians(30))


def test_detect_outside_vicinity_is_false():
    assert not detect_field_of_view(GeoCoord(12.02, 77.0), DRONE, NEAR_500)
    assert not detect_field_of_view(GeoCoord(12.02, 77.0), DRONE, VicinitySpec.thresholds(0.01, 0.01))


def test_identical_pose_rejected():
    with pytest.raises(GeometryError):
        DronePose("z", GeoCoord(1, 1), GeoCoord(1, 1), cam(30))


def test_gimbal_yaw_rotates_axis():
    # camera turned 90 deg counter-clockwise from a northbound heading looks West
    d = DronePose("g", GeoCoord(12.0, 77.0), GeoCoord(12.001, 77.0), cam(30), math.pi / 2)
    west = GeoCoord(12.0, 76.999)
    assert detect_field_of_view(west, d, NEAR_500)
    assert not detect_field_of_view(GeoCoord(12.002, 77.0), d, NEAR_500)


@given(coords, st.floats(0, 2 * math.pi), st.floats(1, 30), st.floats(5, 100),
       st.floats(1, 89), st.floats(0.1, 50))
def test_on_axis_true_opposite_false(origin, heading, step, rng_m, theta_deg, scale):
    d = DronePose("p", origin, destination_point(origin, heading, step), cam(theta_deg))
    vic = VicinitySpec.radius(1000)
    ahead = destination_point(origin, heading, rng_m)
    behind = destination_point(origin, heading + math.pi, rng_m)
    assert detect_field_of_view(ahead, d, vic)
    assert not detect_field_of_view(behind, d, vic)
    # scaling the motion vector keeps the verdict
    longer = DronePose("p", origin, destination_point(origin, heading, step * scale), cam(theta_deg))
    assert detect_field_of_view(ahead, longer, vic)


def test_vertical_fov():
    assert vertical_fov_check(0, 10, 0.01)
    assert not vertical_fov_check(5, 5, math.pi / 4)
    assert vertical_fov_check(30, 100, math.radians(20)) is (VFOV_30_100_DEG < 20)
    with pytest.raises(GeometryError):
        vertical_fov_check(1, 0, 0.5)


def test_meters_to_degree_thresholds():
    lat_v, lon_v = meters_to_degree_thresholds(111, 0)
    assert lat_v == pytest.approx(0.001, rel=2e-3) and lon_v == pytest.approx(lat_v)
    tiny = meters_to_degree_thresholds(1e-9, 10)
    assert 0 < tiny[0] < 1e-12 and 0 < tiny[1] < 1e-12
    a, b = meters_to_degree_thresholds(500, 45)
    assert b / a == pytest.approx(math.sqrt(2), abs=1e-9)
    with pytest.raises(GeometryError):
        meters_to_degree_thresholds(100, 89.5)
    with pytest.raises(GeometryError):
        meters_to_degree_thresholds(0, 10)


def test_meters_per_degree_default_radius():
    assert meters_per_degree() == EARTH_RADIUS_M * math.pi / 180


def test_vicinity_spec_validation_and_inclusive_boundary():
    with pytest.raises(GeometryError):
        VicinitySpec()
    with pytest.raises(GeometryError):
        VicinitySpec(radius_m=10, lat_deg=1, lon_deg=1)
    with pytest.raises(GeometryError):
        VicinitySpec.thresholds(0, 1)
    v = VicinitySpec.thresholds(0.5, 0.25)
    assert v.contains(GeoCoord(0, 0), GeoCoord(0.5, 0.25))
    assert not v.contains(GeoCoord(0, 0), GeoCoord(0.5, 0.2500001))

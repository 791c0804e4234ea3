import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dronepriv import audit
from dronepriv.audit import (APP, KERNEL, LAUNCHER, MIDDLEWARE, SANITIZER_FE, SECURITY_LAYER,
                             AuditError, AuditPolicy, Manifest, TrailParseError, build_trail,
                             compliant_launches, empty_trail, flip_hex_bit, keygen, parse_trail,
                             record_launch, reference_measurements, sign, snapshot, verify,
                             verify_trail, verify_trail_bytes)

KEY = keygen(b"device-under-test")
POLICY = AuditPolicy(reference_measurements())


def trail_with_times(times):
    t = empty_trail(KEY)
    launches = compliant_launches()
    for i, ts in enumerate(times):
        m, meas = launches[i % len(launches)]
        t = record_launch(t, m, meas, ts, KEY)
    return t


# -- signatures ----------------------------------------------------------------------------

def test_keygen_deterministic():
    assert keygen(b"a").public_hex == keygen(b"a").public_hex
    assert keygen(b"a").public_hex != keygen(b"b").public_hex
    assert keygen("a").public_hex == keygen(b"a").public_hex


def test_sign_verify():
    sig = sign(b"msg", KEY)
    assert verify(b"msg", sig, KEY.public_bytes)
    assert not verify(b"msg", sig, keygen(b"other").public_bytes)
    assert not verify(b"msg!", sig, KEY.public_bytes)
    with pytest.raises(AuditError):
        verify(b"msg", sig[:-1], KEY.public_bytes)
    with pytest.raises(AuditError):
        verify(b"msg", sig, KEY.public_bytes[:31])


def test_random_messages_round_trip():
    rng = random.Random(0)
    other = keygen(b"x").public_bytes
    for _ in range(1000):
        m = rng.randbytes(rng.randint(0, 200))
        s = sign(m, KEY)
        assert verify(m, s, KEY.public_bytes)
        assert not verify(m, s, other)


# -- trail construction ------------------------------------------------------------------------

def test_record_launch_basics():
    t1 = trail_with_times([10])
    assert len(t1.entries) == 1 and t1.signature_valid()
    t2 = trail_with_times([10, 10, 20])
    assert [e.timestamp_ms for e in t2.entries] == [10, 10, 20]
    assert [e.manifest.app_id for e in t2.entries] == [m.app_id for m, _ in compliant_launches()]
    with pytest.raises(AuditError, match="precedes"):
        record_launch(t2, *compliant_launches()[0], 19, KEY)
    with pytest.raises(AuditError, match="key"):
        record_launch(t2, *compliant_launches()[0], 30, keygen(b"other"))


def test_hundred_appends_round_trip():
    t = trail_with_times(range(0, 100_000, 1000))
    assert len(t.entries) == 100 and t.signature_valid()
    assert parse_trail(t.to_bytes()) == t
    assert t.to_bytes() == audit.canonical_bytes(json.loads(t.to_bytes()))


def test_missing_component_rejected():
    meas = dict(reference_measurements())
    with pytest.raises(AuditError, match="attestation lacks"):
        record_launch(empty_trail(KEY), Manifest("a"), meas, 0, KEY)


def test_manifest_validation():
    with pytest.raises(AuditError):
        Manifest("")
    with pytest.raises(AuditError):
        Manifest("a", ("T", "T"))
    with pytest.raises(AuditError):
        Manifest("a", (), (), "NOTHEX")


# -- snapshots ---------------------------------------------------------------------------------

TIMES = [0, 5, 5, 9, 14, 20, 21, 30, 41, 50]
BASE = trail_with_times(TIMES)


def ids(trail):
    return [(e.timestamp_ms, e.manifest.app_id) for e in trail.entries]


def test_snapshot_examples():
    full = snapshot(BASE, 0, 50, KEY)
    assert full.entries == BASE.entries and full.signature_valid()
    empty = snapshot(BASE, 22, 29, KEY)
    assert empty.entries == () and empty.signature_valid()
    assert verify_trail(empty, POLICY).passed
    with pytest.raises(AuditError):
        snapshot(BASE, 5, 4, KEY)


@given(st.integers(-5, 55), st.integers(0, 60))
def test_snapshot_equals_filter(a, width):
    b = a + width
    s = snapshot(BASE, a, b, KEY)
    assert ids(s) == [x for x in ids(BASE) if a <= x[0] <= b]
    assert s.signature_valid()


@given(st.integers(-5, 55), st.integers(0, 60), st.integers(-5, 55), st.integers(0, 60))
def test_snapshot_nesting(a, w1, c, w2):
    b, d = a + w1, c + w2
    lo, hi = max(a, c), min(b, d)
    twice = snapshot(snapshot(BASE, a, b, KEY), c, d, KEY)
    if lo <= hi:
        assert twice.entries == snapshot(BASE, lo, hi, KEY).entries
    else:
        assert twice.entries == ()


# -- verifier ----------------------------------------------------------------------------------

def fixture(name):
    return audit.tamper_fixtures(KEY)[name]


def test_compliant_passes():
    r = verify_trail_bytes(fixture("compliant"), POLICY)
    assert r.passed and r.failed_checks() == [] and r.signature_ok


def test_rogue_subscriber_fails_check3_only():
    r = verify_trail_bytes(fixture("rogue_subscriber"), POLICY)
    assert r.failed_checks() == [3]
    assert [(v.app_id, v.reason) for v in r.check3_pubsub.violations] == \
        [("rogue", "sensitive-topic subscription: VideoFeed")]


def test_signature_flip_fails_everything():
    r = verify_trail_bytes(fixture("signature_flip"), POLICY)
    assert not r.signature_ok and r.failed_checks() == [1, 2, 3]
    assert all(v.reason == "untrusted trail" for c in (r.check1_integrity, r.check2_trusted_components,
                                                       r.check3_pubsub) for v in c.violations)


@pytest.mark.parametrize("component,check", [(KERNEL, 1), (MIDDLEWARE, 1), (SECURITY_LAYER, 1),
                                             (SANITIZER_FE, 2), (LAUNCHER, 2)])
def test_measurement_flip_fails_its_check(component, check):
    launches = [(m, dict(meas)) for m, meas in compliant_launches()]
    launches[1][1][component] = flip_hex_bit(launches[1][1][component], 7)
    r = verify_trail(build_trail(launches, KEY), POLICY)
    assert r.failed_checks() == [check]
    viol = (r.check1_integrity if check == 1 else r.check2_trusted_components).violations
    assert len(viol) == 1 and viol[0].reason.startswith(component)


def test_launched_app_measurement_checked_when_listed():
    launches = compliant_launches()
    name = launches[2][0].app_id
    db = {**reference_measurements(), f"{APP}:{name}": launches[2][1][APP]}
    trail = build_trail(launches, KEY)
    assert verify_trail(trail, AuditPolicy(db)).passed
    db[f"{APP}:{name}"] = flip_hex_bit(db[f"{APP}:{name}"], 0)
    assert verify_trail(trail, AuditPolicy(db)).failed_checks() == [2]


def test_sanitizer_contract_and_allowlist():
    good = reference_measurements()
    meas = {**good, APP: audit.measure(b"x")}
    bad_san = Manifest("Sanitizer-FE", ("PrivVideoFeed", "Leak"), ("VideoFeed",))
    r = verify_trail(build_trail([(bad_san, meas)], KEY), POLICY)
    assert r.failed_checks() == [3]
    vetted = Manifest("vetted-recorder", (), ("VideoFeed",))
    launches = compliant_launches() + [(vetted, meas)]
    assert verify_trail(build_trail(launches, KEY), POLICY).failed_checks() == [3]
    allow = AuditPolicy(good, raw_consumer_allowlist={"vetted-recorder"})
    assert verify_trail(build_trail(launches, KEY), allow).passed
    no_san = [(Manifest("navigation", (), ("Gps",)), meas)]
    assert verify_trail(build_trail(no_san, KEY), POLICY).failed_checks() == [3]


def test_policy_validation(tmp_path):
    with pytest.raises(AuditError):
        AuditPolicy(reference_measurements(), sensitive_topics={"PrivVideoFeed"})
    with pytest.raises(AuditError):
        AuditPolicy({KERNEL: "00"})
    db = tmp_path / "m.json"
    db.write_text(json.dumps(reference_measurements()))
    pol = tmp_path / "p.json"
    pol.write_text(json.dumps({"raw_consumer_allowlist": ["x"]}))
    p = AuditPolicy.from_files(db, pol)
    assert p.raw_consumer_allowlist == {"x"} and p.sensitive_topics == {"VideoFeed"}
    pol.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(AuditError):
        AuditPolicy.from_files(db, pol)


def test_parse_errors_are_structured():
    data = fixture("compliant")
    for bad in (b"", b"{}", b"[1]", data.replace(b'"entries"', b'"entriez"'),
                data[:-1] + b" }", data.replace(b":", b": ", 1)):
        with pytest.raises(TrailParseError):
            parse_trail(bad)
        assert not verify_trail_bytes(bad, POLICY).passed


def test_every_single_byte_mutation_detected():
    data = fixture("compliant")
    rng = random.Random(4)
    for i in range(len(data)):
        m = bytearray(data)
        m[i] = (m[i] + rng.randint(1, 255)) % 256
        assert not verify_trail_bytes(bytes(m), POLICY).passed, i


# -- check 3 against a brute-force scan of the subscription graph -------------------------------

topics = st.sampled_from(["VideoFeed", "Thermal", "PrivVideoFeed", "Gps", "Cmd"])
app_ids = st.sampled_from(["Sanitizer-FE", "nav", "cam", "logger", "vetted"])
manifests = st.builds(lambda a, p, s: Manifest(a, tuple(sorted(set(p))), tuple(sorted(set(s)))),
                      app_ids, st.lists(topics, max_size=3), st.lists(topics, max_size=3))


@given(st.lists(manifests, min_size=1, max_size=6),
       st.sets(st.sampled_from(["VideoFeed", "Thermal"]), min_size=1),
       st.sets(st.sampled_from(["vetted", "logger"])))
def test_check3_matches_brute_force(ms, sensitive, allow):
    pol = AuditPolicy(reference_measurements(), sensitive_topics=sensitive,
                      raw_consumer_allowlist=allow)
    meas = {**reference_measurements(), APP: audit.measure(b"a")}
    trail = build_trail([(m, meas) for m in ms], KEY)
    expected_ok = any(m.app_id == "Sanitizer-FE" for m in ms)
    for m in ms:
        if m.app_id == "Sanitizer-FE":
            expected_ok &= set(m.subscribes) == sensitive and set(m.publishes) == {"PrivVideoFeed"}
        elif m.app_id not in allow:
            expected_ok &= not (set(m.subscribes) & sensitive)
    assert verify_trail(trail, pol).check3_pubsub.passed == expected_ok

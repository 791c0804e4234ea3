"""Signed launch-time audit trails and the citizen's three-check verifier.

A trail is a list of timestamped entries, each holding the launched app's
publish/subscribe manifest and the attestation measurements taken at launch.
The device key (standing in for a key sealed in trusted hardware) signs the
canonical JSON form of the whole trail.

Checks:
  1. normal-world kernel, middleware and security layer match known-good hashes
  2. sanitizer front-end, app launcher (and the launched app, if listed) match
  3. only the sanitizer (and vetted apps) consume raw sensitive topics, and
     the sanitizer itself consumes exactly those and publishes only the
     sanitized topic
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey

KERNEL = "kernel"
MIDDLEWARE = "middleware"
SECURITY_LAYER = "security_layer"
SANITIZER_FE = "sanitizer_fe"
LAUNCHER = "launcher"
APP = "app"

PLATFORM_COMPONENTS = (KERNEL, MIDDLEWARE, SECURITY_LAYER)
TRUSTED_COMPONENTS = (SANITIZER_FE, LAUNCHER)
REQUIRED_COMPONENTS = PLATFORM_COMPONENTS + TRUSTED_COMPONENTS + (APP,)

PUBKEY_BYTES = 32
SIGNATURE_BYTES = 64
UNTRUSTED = "untrusted trail"


class AuditError(ValueError):
    """Structural problem with a trail, manifest or policy file."""


class TrailParseError(AuditError):
    pass


def _is_hex(s, nbytes: int | None = None) -> bool:
    if not isinstance(s, str) or len(s) % 2 or s != s.lower():
        return False
    try:
        raw = bytes.fromhex(s)
    except ValueError:
        return False
    return nbytes is None or len(raw) == nbytes


def measure(blob: bytes) -> str:
    return hashlib.sha256(blob).hexdigest()


def canonical_bytes(obj) -> bytes:
    """UTF-8 JSON, sorted keys, no insignificant whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False,
                      allow_nan=False).encode("utf-8")


# -- keys ------------------------------------------------------------------------

@dataclass(frozen=True)
class DeviceKey:
    private: Ed25519PrivateKey

    @property
    def public(self) -> Ed25519PublicKey:
        return self.private.public_key()

    @property
    def public_bytes(self) -> bytes:
        return self.public.public_bytes_raw()

    @property
    def public_hex(self) -> str:
        return self.public_bytes.hex()


def keygen(seed) -> DeviceKey:
    """Deterministic Ed25519 key; ``seed`` is hashed to the 32-byte secret."""
    if isinstance(seed, str):
        seed = seed.encode()
    elif isinstance(seed, int):
        seed = seed.to_bytes(max(1, (seed.bit_length() + 7) // 8), "big")
    if not isinstance(seed, (bytes, bytearray)):
        raise TypeError("seed must be bytes, str or int")
    return DeviceKey(Ed25519PrivateKey.from_private_bytes(hashlib.sha256(bytes(seed)).digest()))


def sign(message: bytes, key: DeviceKey) -> bytes:
    return key.private.sign(message)


def verify(message: bytes, signature: bytes, pubkey: bytes) -> bool:
    if len(pubkey) != PUBKEY_BYTES:
        raise AuditError(f"public key must be {PUBKEY_BYTES} bytes, got {len(pubkey)}")
    if len(signature) != SIGNATURE_BYTES:
        raise AuditError(f"signature must be {SIGNATURE_BYTES} bytes, got {len(signature)}")
    try:
        Ed25519PublicKey.from_public_bytes(pubkey).verify(signature, message)
    except (InvalidSignature, ValueError):
        return False
    return True


# -- data model ------------------------------------------------------------------

@dataclass(frozen=True)
class Manifest:
    app_id: str
    publishes: tuple[str, ...] = ()
    subscribes: tuple[str, ...] = ()
    cert_fingerprint: str = ""

    def __post_init__(self):
        if not isinstance(self.app_id, str) or not self.app_id:
            raise AuditError("manifest app_id must be a non-empty string")
        object.__setattr__(self, "publishes", tuple(self.publishes))
        object.__setattr__(self, "subscribes", tuple(self.subscribes))
        for name, topics in (("publishes", self.publishes), ("subscribes", self.subscribes)):
            if not all(isinstance(t, str) and t for t in topics):
                raise AuditError(f"{self.app_id}: {name} must list non-empty topic names")
            if len(set(topics)) != len(topics):
                raise AuditError(f"{self.app_id}: duplicate topic in {name}")
        if self.cert_fingerprint and not _is_hex(self.cert_fingerprint):
            raise AuditError(f"{self.app_id}: cert_fingerprint must be lowercase hex")

    def to_json(self) -> dict:
        return {"app_id": self.app_id, "publishes": list(self.publishes),
                "subscribes": list(self.subscribes), "cert_fingerprint": self.cert_fingerprint}

    @classmethod
    def from_json(cls, obj: Mapping) -> Manifest:
        _expect_keys(obj, {"app_id", "publishes", "subscribes", "cert_fingerprint"}, "manifest")
        if not isinstance(obj["publishes"], list) or not isinstance(obj["subscribes"], list):
            raise TrailParseError("manifest topic lists must be arrays")
        if not isinstance(obj["cert_fingerprint"], str):
            raise TrailParseError("cert_fingerprint must be a string")
        return cls(obj["app_id"], tuple(obj["publishes"]), tuple(obj["subscribes"]),
                   obj["cert_fingerprint"])


@dataclass(frozen=True)
class AttestationReport:
    measurements: Mapping[str, str]

    def __post_init__(self):
        m = dict(self.measurements)
        missing = [c for c in REQUIRED_COMPONENTS if c not in m]
        if missing:
            raise AuditError(f"attestation lacks {', '.join(missing)}")
        for comp, h in m.items():
            if not _is_hex(h):
                raise AuditError(f"measurement of {comp} is not lowercase hex")
        object.__setattr__(self, "measurements", m)

    def __getitem__(self, component: str) -> str:
        return self.measurements[component]

    def to_json(self) -> dict:
        return dict(self.measurements)


@dataclass(frozen=True)
class AuditEntry:
    timestamp_ms: int
    manifest: Manifest
    attestation: AttestationReport

    def to_json(self) -> dict:
        return {"timestamp_ms": self.timestamp_ms, "manifest": self.manifest.to_json(),
                "attestation": self.attestation.to_json()}

    @classmethod
    def from_json(cls, obj: Mapping) -> AuditEntry:
        _expect_keys(obj, {"timestamp_ms", "manifest", "attestation"}, "entry")
        ts = obj["timestamp_ms"]
        if isinstance(ts, bool) or not isinstance(ts, int) or ts < 0:
            raise TrailParseError("timestamp_ms must be a non-negative integer")
        att = obj["attestation"]
        if not isinstance(att, dict) or not all(isinstance(v, str) for v in att.values()):
            raise TrailParseError("attestation must map component names to hex strings")
        return cls(ts, Manifest.from_json(obj["manifest"]), AttestationReport(att))


@dataclass(frozen=True)
class AuditTrail:
    device_pubkey: str
    entries: tuple[AuditEntry, ...]
    signature: str

    def body(self) -> dict:
        return {"device_pubkey": self.device_pubkey, "entries": [e.to_json() for e in self.entries]}

    def signed_bytes(self) -> bytes:
        return canonical_bytes(self.body())

    def to_json(self) -> dict:
        return {**self.body(), "signature": self.signature}

    def to_bytes(self) -> bytes:
        return canonical_bytes(self.to_json())

    def signature_valid(self) -> bool:
        try:
            return verify(self.signed_bytes(), bytes.fromhex(self.signature),
                          bytes.fromhex(self.device_pubkey))
        except (AuditError, ValueError):
            return False


def _expect_keys(obj, keys: set, what: str):
    if not isinstance(obj, dict):
        raise TrailParseError(f"{what} must be a JSON object")
    if set(obj) != keys:
        raise TrailParseError(f"{what} keys {sorted(obj)} != {sorted(keys)}")


def _seal(entries: Sequence[AuditEntry], key: DeviceKey) -> AuditTrail:
    unsigned = AuditTrail(key.public_hex, tuple(entries), "")
    return AuditTrail(unsigned.device_pubkey, unsigned.entries,
                      sign(unsigned.signed_bytes(), key).hex())


def empty_trail(key: DeviceKey) -> AuditTrail:
    return _seal((), key)


def record_launch(trail: AuditTrail, manifest: Manifest, measurements: Mapping[str, str],
                  timestamp_ms: int, key: DeviceKey) -> AuditTrail:
    """Append one launch and re-sign. Timestamps may repeat but not go back."""
    if key.public_hex != trail.device_pubkey:
        raise AuditError("signing key does not match the trail's device key")
    if trail.entries and timestamp_ms < trail.entries[-1].timestamp_ms:
        raise AuditError(f"timestamp {timestamp_ms} precedes last entry "
                         f"{trail.entries[-1].timestamp_ms}")
    entry = AuditEntry(int(timestamp_ms), manifest, AttestationReport(measurements))
    return _seal(trail.entries + (entry,), key)


def snapshot(trail: AuditTrail, t_start: int, t_end: int, key: DeviceKey) -> AuditTrail:
    """Entries with ``t_start <= timestamp <= t_end``, independently signed."""
    if t_start > t_end:
        raise AuditError("t_start after t_end")
    if key.public_hex != trail.device_pubkey:
        raise AuditError("signing key does not match the trail's device key")
    return _seal([e for e in trail.entries if t_start <= e.timestamp_ms <= t_end], key)


# -- serialization -------------------------------------------------------------------

def parse_trail(data: bytes) -> AuditTrail:
    """Strict parse: the bytes must already be in canonical form."""
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise TrailParseError(f"not JSON: {exc}") from None
    _expect_keys(obj, {"device_pubkey", "entries", "signature"}, "trail")
    if not _is_hex(obj["device_pubkey"], PUBKEY_BYTES):
        raise TrailParseError("device_pubkey must be 32 bytes of lowercase hex")
    if not _is_hex(obj["signature"], SIGNATURE_BYTES):
        raise TrailParseError("signature must be 64 bytes of lowercase hex")
    if not isinstance(obj["entries"], list):
        raise TrailParseError("entries must be an array")
    try:
        entries = tuple(AuditEntry.from_json(e) for e in obj["entries"])
    except TrailParseError:
        raise
    except AuditError as exc:
        raise TrailParseError(str(exc)) from None
    trail = AuditTrail(obj["device_pubkey"], entries, obj["signature"])
    if trail.to_bytes() != data:
        raise TrailParseError("trail is not in canonical form")
    return trail


def load_trail(path) -> AuditTrail:
    return parse_trail(Path(path).read_bytes())


def dump_trail(trail: AuditTrail, path) -> Path:
    path = Path(path)
    path.write_bytes(trail.to_bytes())
    return path


# -- policy and verdicts --------------------------------------------------------------

@dataclass(frozen=True)
class AuditPolicy:
    expected: Mapping[str, str]
    sensitive_topics: frozenset = frozenset({"VideoFeed"})
    sanitizer_id: str = "Sanitizer-FE"
    sanitized_topic: str = "PrivVideoFeed"
    raw_consumer_allowlist: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "sensitive_topics", frozenset(self.sensitive_topics))
        object.__setattr__(self, "raw_consumer_allowlist", frozenset(self.raw_consumer_allowlist))
        object.__setattr__(self, "expected", dict(self.expected))
        if self.sanitized_topic in self.sensitive_topics:
            raise AuditError("sanitized topic cannot also be sensitive")
        missing = [c for c in PLATFORM_COMPONENTS + TRUSTED_COMPONENTS if c not in self.expected]
        if missing:
            raise AuditError(f"measurement database lacks {', '.join(missing)}")

    @classmethod
    def from_files(cls, measurements_path, policy_path=None) -> AuditPolicy:
        try:
            expected = json.loads(Path(measurements_path).read_text(encoding="utf-8"))
            opts = json.loads(Path(policy_path).read_text(encoding="utf-8")) if policy_path else {}
        except json.JSONDecodeError as exc:
            raise AuditError(f"bad JSON: {exc}") from None
        if not isinstance(expected, dict) or not isinstance(opts, dict):
            raise AuditError("measurement database and policy must be JSON objects")
        known = {"sensitive_topics", "sanitizer_id", "sanitized_topic", "raw_consumer_allowlist"}
        extra = set(opts) - known
        if extra:
            raise AuditError(f"unknown policy keys {sorted(extra)}")
        return cls(expected, **opts)

    def to_json(self) -> dict:
        return {"sensitive_topics": sorted(self.sensitive_topics), "sanitizer_id": self.sanitizer_id,
                "sanitized_topic": self.sanitized_topic,
                "raw_consumer_allowlist": sorted(self.raw_consumer_allowlist)}


@dataclass(frozen=True)
class Violation:
    app_id: str
    reason: str


@dataclass
class CheckResult:
    passed: bool
    violations: list[Violation] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"pass": self.passed,
                "violations": [{"app_id": v.app_id, "reason": v.reason} for v in self.violations]}


@dataclass
class VerdictReport:
    check1_integrity: CheckResult
    check2_trusted_components: CheckResult
    check3_pubsub: CheckResult
    signature_ok: bool = True

    @property
    def passed(self) -> bool:
        return (self.check1_integrity.passed and self.check2_trusted_components.passed
                and self.check3_pubsub.passed)

    def failed_checks(self) -> list[int]:
        checks = (self.check1_integrity, self.check2_trusted_components, self.check3_pubsub)
        return [i for i, c in enumerate(checks, 1) if not c.passed]

    def to_json(self) -> dict:
        return {"pass": self.passed, "signature_ok": self.signature_ok,
                "check1_integrity": self.check1_integrity.to_json(),
                "check2_trusted_components": self.check2_trusted_components.to_json(),
                "check3_pubsub": self.check3_pubsub.to_json()}


def _measurement_check(trail: AuditTrail, components, expected) -> CheckResult:
    bad = []
    for e in trail.entries:
        for comp in components:
            if e.attestation.measurements.get(comp) != expected.get(comp):
                bad.append(Violation(e.manifest.app_id, f"{comp} measurement mismatch at "
                                                        f"t={e.timestamp_ms}"))
    return CheckResult(not bad, bad)


def _app_check(trail: AuditTrail, expected) -> list[Violation]:
    bad = []
    for e in trail.entries:
        want = expected.get(f"{APP}:{e.manifest.app_id}")
        if want is not None and e.attestation[APP] != want:
            bad.append(Violation(e.manifest.app_id, f"{APP} measurement mismatch at "
                                                    f"t={e.timestamp_ms}"))
    return bad


def _pubsub_check(trail: AuditTrail, policy: AuditPolicy) -> CheckResult:
    bad = []
    seen_sanitizer = False
    permitted = {policy.sanitizer_id} | policy.raw_consumer_allowlist
    for e in trail.entries:
        m = e.manifest
        if m.app_id == policy.sanitizer_id:
            seen_sanitizer = True
            if set(m.subscribes) != policy.sensitive_topics:
                bad.append(Violation(m.app_id, "sanitizer does not subscribe exactly to the "
                                               "sensitive topics"))
            if set(m.publishes) != {policy.sanitized_topic}:
                bad.append(Violation(m.app_id, "sanitizer does not publish exactly "
                                               f"{policy.sanitized_topic}"))
        elif m.app_id not in permitted:
            for topic in sorted(policy.sensitive_topics & set(m.subscribes)):
                bad.append(Violation(m.app_id, f"sensitive-topic subscription: {topic}"))
    if trail.entries and not seen_sanitizer:
        bad.append(Violation(policy.sanitizer_id, "sanitizer front-end never launched"))
    return CheckResult(not bad, bad)


def verify_trail(trail: AuditTrail, policy: AuditPolicy) -> VerdictReport:
    if not trail.signature_valid():
        fail = [Violation("*", UNTRUSTED)]
        return VerdictReport(CheckResult(False, list(fail)), CheckResult(False, list(fail)),
                             CheckResult(False, list(fail)), signature_ok=False)
    c1 = _measurement_check(trail, PLATFORM_COMPONENTS, policy.expected)
    c2 = _measurement_check(trail, TRUSTED_COMPONENTS, policy.expected)
    c2.violations.extend(_app_check(trail, policy.expected))
    c2.passed = not c2.violations
    return VerdictReport(c1, c2, _pubsub_check(trail, policy))


def verify_trail_bytes(data: bytes, policy: AuditPolicy) -> VerdictReport:
    """Parse then verify; a structurally broken trail is reported as untrusted."""
    try:
        trail = parse_trail(data)
    except TrailParseError as exc:
        fail = [Violation("*", f"{UNTRUSTED}: {exc}")]
        return VerdictReport(CheckResult(False, list(fail)), CheckResult(False, list(fail)),
                             CheckResult(False, list(fail)), signature_ok=False)
    return verify_trail(trail, policy)


# -- fixtures -------------------------------------------------------------------------

def reference_measurements() -> dict[str, str]:
    """Known-good hashes for the simulated platform images."""
    return {c: measure(f"{c}-image-v1".encode()) for c in PLATFORM_COMPONENTS + TRUSTED_COMPONENTS}


def compliant_launches(policy: AuditPolicy | None = None) -> list[tuple[Manifest, dict]]:
    good = reference_measurements()
    sens = sorted((policy.sensitive_topics if policy else {"VideoFeed"}))
    san_id = policy.sanitizer_id if policy else "Sanitizer-FE"
    san_topic = policy.sanitized_topic if policy else "PrivVideoFeed"
    apps = [
        Manifest(san_id, (san_topic,), tuple(sens), measure(b"cert:sanitizer")),
        Manifest("navigation", ("Cmd",), ("Gps", "Imu"), measure(b"cert:navigation")),
        Manifest("survey-app", ("SurveyOut",), (san_topic, "Gps"), measure(b"cert:survey-app")),
    ]
    return [(m, {**good, APP: measure(f"app-image:{m.app_id}".encode())}) for m in apps]


def build_trail(launches, key: DeviceKey, t0_ms: int = 1_700_000_000_000,
                step_ms: int = 1_000) -> AuditTrail:
    trail = empty_trail(key)
    for i, (manifest, meas) in enumerate(launches):
        trail = record_launch(trail, manifest, meas, t0_ms + i * step_ms, key)
    return trail


def flip_hex_bit(h: str, pos: int) -> str:
    """Flip the low bit of one hex digit."""
    chars = list(h)
    chars[pos] = format(int(chars[pos], 16) ^ 1, "x")
    return "".join(chars)


def tamper_fixtures(key: DeviceKey) -> dict[str, bytes]:
    """Canonical trail bytes for the compliant trail and each tamper class."""
    launches = compliant_launches()
    out = {"compliant": build_trail(launches, key).to_bytes()}

    kernel_flip = [(m, dict(meas)) for m, meas in launches]
    kernel_flip[1][1][KERNEL] = flip_hex_bit(kernel_flip[1][1][KERNEL], 0)
    out["measurement_flip_kernel"] = build_trail(kernel_flip, key).to_bytes()

    launcher_flip = [(m, dict(meas)) for m, meas in launches]
    launcher_flip[2][1][LAUNCHER] = flip_hex_bit(launcher_flip[2][1][LAUNCHER], -1)
    out["measurement_flip_launcher"] = build_trail(launcher_flip, key).to_bytes()

    rogue = launches + [(Manifest("rogue", ("Exfil",), ("VideoFeed",), measure(b"cert:rogue")),
                         {**reference_measurements(), APP: measure(b"app-image:rogue")})]
    out["rogue_subscriber"] = build_trail(rogue, key).to_bytes()

    trail = build_trail(launches, key)
    sig = bytearray(bytes.fromhex(trail.signature))
    sig[0] ^= 0x01
    out["signature_flip"] = AuditTrail(trail.device_pubkey, trail.entries, sig.hex()).to_bytes()
    return out

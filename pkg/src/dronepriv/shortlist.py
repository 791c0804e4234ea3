"""Bulk field-of-view shortlisting between a citizen and the regulatory authority.

Two protocol variants run over the secret-sharing engine:

* ``oblivious``: every drone goes through the full vicinity and angle
  computation. The transcript depends on ``n`` alone.
* ``non-oblivious``: the vicinity predicate is opened to both parties first
  and the angle gates run only for nearby drones. Traffic grows with the
  number of nearby drones, which is exactly the leak this variant exists to
  demonstrate.

Vicinity uses squared differences, ``(c - t)^2 - V^2``, instead of absolute
values so the circuit stays purely arithmetic; the sign is unchanged. The
revealed value is multiplied by one positive mask from each party.

The citizen vector is built in cos-corrected degrees, ``(dlon*cos(lat_t),
dlat)``. The public meters-per-degree factor is applied after reveal (see
:meth:`ShortlistRecord.dotp_m2`); it cancels in the angle anyway.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass, field
from typing import Sequence

from .geometry import (EARTH_RADIUS_M, DronePose, GeoCoord, PlanarVector, clamped_arccos,
                       meters_per_degree)
from .mpc import (NEW_ROUND, BoundError, Circuit, Dealer, FixedPoint, PartyRole, Preprocessing,
                  ProtocolError, Prg, Recv, Reveal, Send, Transcript, TripleStore, Wire, evaluate,
                  run_local)
from .mpc.ring import scaled_int
from .mpc.transcript import MsgType

PROTOCOL_VERSION = 1
MASK_LIMIT = 1 << 20
NONCE_BYTES = 16


class Variant(str, enum.Enum):
    OBLIVIOUS = "oblivious"
    NON_OBLIVIOUS = "non-oblivious"

    @property
    def code(self) -> int:
        return 0 if self is Variant.OBLIVIOUS else 1

    @classmethod
    def from_code(cls, code: int) -> Variant:
        try:
            return (cls.OBLIVIOUS, cls.NON_OBLIVIOUS)[code]
        except IndexError:
            raise ProtocolError(f"unknown variant code {code}") from None


@dataclass(frozen=True)
class ScaleTable:
    """Fixed-point exponents and magnitude limits for every protocol input.

    With the defaults and a service area of at most 0.5 deg half-span, the
    largest wire (``|D|^2 * |C|^2``) stays at or below 2^125.
    """

    deg: int = 26
    cos: int = 14
    meter: int = 12
    max_step_m: float = float(1 << 10)
    mask_limit: int = MASK_LIMIT


@dataclass(frozen=True)
class ServiceArea:
    """Public box that contains every drone and every querying citizen.

    Coordinates enter the circuit relative to the centre, which bounds all
    differences by twice the half-span.
    """

    lat0: float
    lon0: float
    half_lat_deg: float = 0.5
    half_lon_deg: float = 0.5

    _FMT = ">4d"

    def contains(self, p: GeoCoord) -> bool:
        return (abs(p.lat - self.lat0) <= self.half_lat_deg
                and abs(p.lon - self.lon0) <= self.half_lon_deg)

    def to_bytes(self) -> bytes:
        return struct.pack(self._FMT, self.lat0, self.lon0, self.half_lat_deg, self.half_lon_deg)

    @classmethod
    def from_bytes(cls, data: bytes) -> ServiceArea:
        return cls(*struct.unpack(cls._FMT, data))

    @classmethod
    def around(cls, points: Sequence[GeoCoord], margin_deg: float = 0.01) -> ServiceArea:
        lats = [p.lat for p in points]
        lons = [p.lon for p in points]
        return cls((max(lats) + min(lats)) / 2, (max(lons) + min(lons)) / 2,
                   (max(lats) - min(lats)) / 2 + margin_deg,
                   (max(lons) - min(lons)) / 2 + margin_deg)


@dataclass(frozen=True)
class DroneInput:
    id: str
    pos_t: GeoCoord
    dvec: PlanarVector
    dnorm_sq: float
    cos_lat: float
    theta_rad: float

    @classmethod
    def from_pose(cls, pose: DronePose, radius_m: float = EARTH_RADIUS_M) -> DroneInput:
        """Authority-side precomputation: camera axis, its squared norm, cos(lat)."""
        axis = pose.camera_axis(radius_m)
        return cls(pose.id, pose.pos_t, axis, axis.norm_sq,
                   math.cos(math.radians(pose.pos_t.lat)), pose.theta_rad)


@dataclass(frozen=True)
class CitizenInput:
    pos: GeoCoord
    lat_vicinity_deg: float
    lon_vicinity_deg: float
    masks: tuple[tuple[int, int], ...] = ()

    def with_masks(self, masks) -> CitizenInput:
        return CitizenInput(self.pos, self.lat_vicinity_deg, self.lon_vicinity_deg, tuple(masks))


@dataclass(frozen=True)
class AuthorityMasks:
    pairs: tuple[tuple[int, int], ...]


def make_masks(rng: Prg, n: int, limit: int = MASK_LIMIT) -> tuple[tuple[int, int], ...]:
    """``n`` (lat, lon) pairs of positive integers drawn uniformly from [1, limit)."""
    if n < 1:
        raise ValueError("need at least one drone")
    if limit > MASK_LIMIT:
        raise BoundError(f"mask limit {limit} exceeds 2^20")
    return tuple((rng.randint(1, limit), rng.randint(1, limit)) for _ in range(n))


# -- circuit plan -------------------------------------------------------------

@dataclass
class DroneWires:
    lat_t: Wire
    lon_t: Wire
    cos_lat: Wire
    dx: Wire
    dy: Wire
    dnorm_sq: Wire
    c_lat: Wire
    c_lon: Wire
    r_lat: Wire
    r_lon: Wire
    dlat: Wire = None
    dlon: Wire = None
    nearby_lat: Wire = None
    nearby_lon: Wire = None
    dotp: Wire = None
    norm_sq: Wire = None


@dataclass
class CircuitPlan:
    n: int
    variant: Variant
    area: ServiceArea
    scales: ScaleTable
    circuit: Circuit
    lat_c: Wire
    lon_c: Wire
    lat_vic_sq: Wire
    lon_vic_sq: Wire
    drones: list[DroneWires] = field(default_factory=list)

    @property
    def mul_count(self) -> int:
        return self.circuit.mul_count

    def to_bytes(self) -> bytes:
        head = struct.pack(">BI", self.variant.code, self.n) + self.area.to_bytes()
        return head + self.circuit.to_bytes()

    # -- input encoding ------------------------------------------------------

    def citizen_inputs(self, citizen: CitizenInput) -> dict[int, int]:
        s = self.scales
        if not self.area.contains(citizen.pos):
            raise BoundError("citizen position outside the service area")
        if len(citizen.masks) != self.n:
            raise ProtocolError(f"citizen supplied {len(citizen.masks)} mask pairs for n={self.n}")
        if not (citizen.lat_vicinity_deg > 0 and citizen.lon_vicinity_deg > 0):
            raise BoundError("vicinity thresholds must be positive")
        lat_v = scaled_int(citizen.lat_vicinity_deg, s.deg)
        lon_v = scaled_int(citizen.lon_vicinity_deg, s.deg)
        raw = {
            self.lat_c.id: scaled_int(citizen.pos.lat - self.area.lat0, s.deg),
            self.lon_c.id: scaled_int(citizen.pos.lon - self.area.lon0, s.deg),
            self.lat_vic_sq.id: lat_v * lat_v,
            self.lon_vic_sq.id: lon_v * lon_v,
        }
        for w, (m_lat, m_lon) in zip(self.drones, citizen.masks):
            raw[w.c_lat.id] = _check_mask(m_lat, s)
            raw[w.c_lon.id] = _check_mask(m_lon, s)
        return raw

    def authority_inputs(self, drones: Sequence[DroneInput], masks: AuthorityMasks) -> dict[int, int]:
        s = self.scales
        if len(drones) != self.n or len(masks.pairs) != self.n:
            raise ProtocolError(f"authority supplied {len(drones)} drones / "
                                f"{len(masks.pairs)} masks for n={self.n}")
        raw = {}
        for w, d, (m_lat, m_lon) in zip(self.drones, drones, masks.pairs):
            if not self.area.contains(d.pos_t):
                raise BoundError(f"drone {d.id!r} outside the service area")
            if not 0 < d.cos_lat <= 1:
                raise BoundError(f"drone {d.id!r}: cos(lat) = {d.cos_lat} outside (0, 1]")
            dx = scaled_int(d.dvec.x, s.meter)
            dy = scaled_int(d.dvec.y, s.meter)
            raw[w.lat_t.id] = scaled_int(d.pos_t.lat - self.area.lat0, s.deg)
            raw[w.lon_t.id] = scaled_int(d.pos_t.lon - self.area.lon0, s.deg)
            raw[w.cos_lat.id] = scaled_int(d.cos_lat, s.cos)
            raw[w.dx.id] = dx
            raw[w.dy.id] = dy
            # squared norm of the quantised vector, so the angle is exact for it
            raw[w.dnorm_sq.id] = dx * dx + dy * dy
            raw[w.r_lat.id] = _check_mask(m_lat, s)
            raw[w.r_lon.id] = _check_mask(m_lon, s)
        return raw


def _check_mask(m: int, s: ScaleTable) -> int:
    if not 1 <= m < s.mask_limit:
        raise BoundError(f"mask {m} outside [1, {s.mask_limit})")
    return m


def build_circuit_plan(n: int, variant: Variant | str = Variant.OBLIVIOUS,
                       area: ServiceArea | None = None,
                       scales: ScaleTable | None = None) -> CircuitPlan:
    """Unrolled circuit for ``n`` drones.

    For the non-oblivious variant this is the first phase only (vicinity,
    opened to both parties); :func:`build_geometry_phase` builds the second.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    variant = Variant(variant)
    area = area or ServiceArea(0.0, 0.0)
    s = scales or ScaleTable()
    C, A = PartyRole.CITIZEN, PartyRole.AUTHORITY
    c = Circuit()

    lat_b = scaled_int(area.half_lat_deg, s.deg)
    lon_b = scaled_int(area.half_lon_deg, s.deg)
    lat_c = c.input(C, s.deg, lat_b, "lat_c")
    lon_c = c.input(C, s.deg, lon_b, "lon_c")
    # thresholds wider than the whole area carry no extra meaning
    lat_vic_sq = c.input(C, 2 * s.deg, (2 * lat_b) ** 2, "lat_vic_sq")
    lon_vic_sq = c.input(C, 2 * s.deg, (2 * lon_b) ** 2, "lon_vic_sq")
    plan = CircuitPlan(n, variant, area, s, c, lat_c, lon_c, lat_vic_sq, lon_vic_sq)

    step_b = scaled_int(s.max_step_m, s.meter)
    mask_b = s.mask_limit - 1
    for i in range(n):
        w = DroneWires(
            lat_t=c.input(A, s.deg, lat_b, f"lat_t[{i}]"),
            lon_t=c.input(A, s.deg, lon_b, f"lon_t[{i}]"),
            cos_lat=c.input(A, s.cos, 1 << s.cos, f"cos_lat[{i}]"),
            dx=c.input(A, s.meter, step_b, f"dx[{i}]"),
            dy=c.input(A, s.meter, step_b, f"dy[{i}]"),
            dnorm_sq=c.input(A, 2 * s.meter, step_b * step_b, f"dnorm_sq[{i}]"),
            c_lat=c.input(C, 0, mask_b, f"c_lat[{i}]"),
            c_lon=c.input(C, 0, mask_b, f"c_lon[{i}]"),
            r_lat=c.input(A, 0, mask_b, f"r_lat[{i}]"),
            r_lon=c.input(A, 0, mask_b, f"r_lon[{i}]"),
        )
        w.dlat = c.sub(lat_c, w.lat_t, f"dlat[{i}]")
        w.dlon = c.sub(lon_c, w.lon_t, f"dlon[{i}]")
        near_lat = c.sub(c.mul(w.dlat, w.dlat), lat_vic_sq)
        near_lon = c.sub(c.mul(w.dlon, w.dlon), lon_vic_sq)
        w.nearby_lat = c.mul(c.mul(near_lat, w.c_lat), w.r_lat, f"nearby_lat[{i}]")
        w.nearby_lon = c.mul(c.mul(near_lon, w.c_lon), w.r_lon, f"nearby_lon[{i}]")
        if variant is Variant.OBLIVIOUS:
            w.dotp, w.norm_sq = _angle_gates(c, s, w.dlat, w.dlon, w.cos_lat, w.dx, w.dy,
                                             w.dnorm_sq, i)
            for out in (w.dotp, w.norm_sq, w.nearby_lat, w.nearby_lon):
                c.reveal(out, Reveal.CITIZEN)
        else:
            c.reveal(w.nearby_lat, Reveal.BOTH)
            c.reveal(w.nearby_lon, Reveal.BOTH)
        plan.drones.append(w)
    return plan


def _angle_gates(c: Circuit, s: ScaleTable, dlat, dlon, cos_lat, dx, dy, dnorm_sq, i):
    cx = c.mul(dlon, cos_lat, f"cx[{i}]")
    cy = c.mul_public(dlat, 1 << s.cos, s.cos, f"cy[{i}]")
    dotp = c.add(c.mul(dx, cx), c.mul(dy, cy), f"dotp[{i}]")
    c_norm_sq = c.add(c.mul(cx, cx), c.mul(cy, cy), f"c_norm_sq[{i}]")
    norm_sq = c.mul(dnorm_sq, c_norm_sq, f"norm_sq[{i}]")
    return dotp, norm_sq


@dataclass
class GeometryPhase:
    circuit: Circuit
    indices: list[int]
    carry_from: dict[int, int]          # phase-2 wire id -> phase-1 wire id
    outputs: list[tuple[Wire, Wire]]    # (dotp, norm_sq) per gated drone


def build_geometry_phase(plan: CircuitPlan, indices: Sequence[int]) -> GeometryPhase:
    """Angle gates for the drones whose vicinity predicate came out true."""
    c = Circuit()
    carry_from: dict[int, int] = {}
    outputs = []

    def carry(w: Wire, label: str) -> Wire:
        new = c.carry(w.scale_exp, w.bound, label)
        carry_from[new.id] = w.id
        return new

    for i in indices:
        w = plan.drones[i]
        args = [carry(getattr(w, name), f"{name}[{i}]")
                for name in ("dlat", "dlon", "cos_lat", "dx", "dy", "dnorm_sq")]
        dotp, norm_sq = _angle_gates(c, plan.scales, *args, i)
        c.reveal(dotp, Reveal.CITIZEN)
        c.reveal(norm_sq, Reveal.CITIZEN)
        outputs.append((dotp, norm_sq))
    return GeometryPhase(c, list(indices), carry_from, outputs)


# -- records and the citizen's plaintext step ---------------------------------

@dataclass(frozen=True)
class ShortlistRecord:
    id: str
    dotp: FixedPoint | None
    norm_sq: FixedPoint | None
    nearby_lat: FixedPoint | None
    nearby_lon: FixedPoint | None

    def dotp_m2(self, radius_m: float = EARTH_RADIUS_M) -> float:
        """Dot product of the motion and citizen vectors in square meters."""
        return float(self.dotp) * meters_per_degree(radius_m)

    def norm_sq_m4(self, radius_m: float = EARTH_RADIUS_M) -> float:
        return float(self.norm_sq) * meters_per_degree(radius_m) ** 2


@dataclass(frozen=True)
class ShortlistDecision:
    id: str
    in_vicinity: bool
    phi_rad: float | None
    shortlisted: bool
    degenerate: bool = False


def _angle_decision(rec_id: str, dotp: FixedPoint, norm_sq: FixedPoint, theta: float) -> ShortlistDecision:
    n = float(norm_sq)
    if n <= 0:
        return ShortlistDecision(rec_id, True, None, False, degenerate=True)
    phi = clamped_arccos(float(dotp) / math.sqrt(n))
    return ShortlistDecision(rec_id, True, phi, phi <= theta)


def _is_nearby(nearby_lat: FixedPoint, nearby_lon: FixedPoint) -> bool:
    return nearby_lat.signed <= 0 and nearby_lon.signed <= 0


def citizen_postprocess(records: Sequence[ShortlistRecord],
                        thetas: Sequence[float]) -> list[ShortlistDecision]:
    if len(records) != len(thetas):
        raise ValueError("one theta per record required")
    out = []
    for rec, theta in zip(records, thetas):
        if not _is_nearby(rec.nearby_lat, rec.nearby_lon):
            out.append(ShortlistDecision(rec.id, False, None, False))
        else:
            out.append(_angle_decision(rec.id, rec.dotp, rec.norm_sq, theta))
    return out


# -- wire payloads --------------------------------------------------------------

_HELLO = struct.Struct(">BBI16s")


def encode_hello(version: int, variant: Variant, n: int, nonce: bytes,
                 area: ServiceArea | None = None) -> bytes:
    area = area or ServiceArea(0.0, 0.0, 0.0, 0.0)
    return _HELLO.pack(version, variant.code, n, nonce) + area.to_bytes()


def decode_hello(data: bytes) -> tuple[int, Variant, int, bytes, ServiceArea]:
    if len(data) != _HELLO.size + 32:
        raise ProtocolError(f"HELLO payload of {len(data)} bytes")
    version, code, n, nonce = _HELLO.unpack(data[:_HELLO.size])
    return version, Variant.from_code(code), n, nonce, ServiceArea.from_bytes(data[_HELLO.size:])


def encode_thetas_ids(drones: Sequence[DroneInput]) -> bytes:
    parts = [struct.pack(">I", len(drones))]
    for d in drones:
        ident = d.id.encode()
        parts.append(struct.pack(">dH", d.theta_rad, len(ident)) + ident)
    return b"".join(parts)


def decode_thetas_ids(data: bytes) -> tuple[list[str], list[float]]:
    try:
        (n,) = struct.unpack_from(">I", data)
        off = 4
        ids, thetas = [], []
        for _ in range(n):
            theta, ln = struct.unpack_from(">dH", data, off)
            off += 10
            ids.append(data[off:off + ln].decode())
            off += ln
            thetas.append(theta)
    except (struct.error, UnicodeDecodeError) as exc:
        raise ProtocolError(f"malformed THETAS_IDS payload: {exc}") from None
    if off != len(data) or len(ids) != n:
        raise ProtocolError("malformed THETAS_IDS payload")
    return ids, thetas


# -- party programs -------------------------------------------------------------

@dataclass
class CitizenOutcome:
    n: int
    variant: Variant
    ids: list[str]
    thetas: list[float]
    records: list[ShortlistRecord]
    decisions: list[ShortlistDecision]

    @property
    def shortlisted(self) -> list[str]:
        return [d.id for d in self.decisions if d.shortlisted]


@dataclass
class AuthorityOutcome:
    n: int
    variant: Variant
    opened_nearby: list[bool] | None


def citizen_program(pos: GeoCoord, lat_vicinity_deg: float, lon_vicinity_deg: float, *,
                    variant: Variant | str = Variant.OBLIVIOUS, rng: Prg, masks=None, scales: ScaleTable | None = None,
                    version: int = PROTOCOL_VERSION):
    """Citizen side of one query. Masks are drawn after ``n`` is announced.

    Triples come from the dealer through :class:`Preprocessing` requests the
    driver answers; the citizen never holds anything that reveals the
    authority's fragments.
    """
    variant = Variant(variant)
    nonce = rng.bytes(NONCE_BYTES)
    yield NEW_ROUND
    yield Send(MsgType.HELLO, encode_hello(version, variant, 0, nonce))
    peer_version, peer_variant, n, _, area = decode_hello((yield Recv(MsgType.HELLO)))
    if peer_version != version:
        raise ProtocolError(f"protocol version {peer_version}, expected {version}")
    if peer_variant is not variant:
        raise ProtocolError(f"authority answered with variant {peer_variant.value}")
    yield NEW_ROUND
    ids, thetas = decode_thetas_ids((yield Recv(MsgType.THETAS_IDS)))
    if len(ids) != n:
        raise ProtocolError(f"HELLO announced n={n} but {len(ids)} drones listed")

    if masks is None:
        masks = make_masks(rng.fork("masks"), n)
    citizen = CitizenInput(pos, lat_vicinity_deg, lon_vicinity_deg, tuple(masks))
    plan = build_circuit_plan(n, variant, area, scales)
    inputs = plan.citizen_inputs(citizen)
    triples = TripleStore(PartyRole.CITIZEN)
    triples.provision((yield Preprocessing(nonce, 0, plan.mul_count)))
    res = yield from evaluate(plan.circuit, PartyRole.CITIZEN, inputs, triples, rng)

    records, decisions = [], []
    if variant is Variant.OBLIVIOUS:
        for i, w in enumerate(plan.drones):
            records.append(ShortlistRecord(ids[i], res.outputs[w.dotp.id], res.outputs[w.norm_sq.id],
                                           res.outputs[w.nearby_lat.id], res.outputs[w.nearby_lon.id]))
        decisions = citizen_postprocess(records, thetas)
    else:
        nearby = [_is_nearby(res.outputs[w.nearby_lat.id], res.outputs[w.nearby_lon.id])
                  for w in plan.drones]
        gated = yield from _geometry_phase(plan, nearby, res.fragments, PartyRole.CITIZEN,
                                           triples, rng, nonce)
        for i, w in enumerate(plan.drones):
            dotp, norm_sq = gated.get(i, (None, None))
            records.append(ShortlistRecord(ids[i], dotp, norm_sq, res.outputs[w.nearby_lat.id],
                                           res.outputs[w.nearby_lon.id]))
            if nearby[i]:
                decisions.append(_angle_decision(ids[i], dotp, norm_sq, thetas[i]))
            else:
                decisions.append(ShortlistDecision(ids[i], False, None, False))

    yield NEW_ROUND
    yield Send(MsgType.BYE, b"")
    yield Recv(MsgType.BYE)
    return CitizenOutcome(n, variant, ids, thetas, records, decisions)


def authority_program(drones: Sequence[DroneInput], area: ServiceArea, *, rng: Prg,
                      masks: AuthorityMasks | None = None, scales: ScaleTable | None = None,
                      version: int = PROTOCOL_VERSION):
    """Authority side of one query against an immutable fleet snapshot."""
    drones = list(drones)
    n = len(drones)
    if n < 1:
        raise ProtocolError("empty fleet")
    yield NEW_ROUND
    peer_version, variant, _, nonce, _ = decode_hello((yield Recv(MsgType.HELLO)))
    if peer_version != version:
        raise ProtocolError(f"protocol version {peer_version}, expected {version}")
    yield Send(MsgType.HELLO, encode_hello(version, variant, n, nonce, area))
    yield NEW_ROUND
    yield Send(MsgType.THETAS_IDS, encode_thetas_ids(drones))

    masks = masks or AuthorityMasks(make_masks(rng.fork("masks"), n))
    plan = build_circuit_plan(n, variant, area, scales)
    inputs = plan.authority_inputs(drones, masks)
    triples = TripleStore(PartyRole.AUTHORITY)
    triples.provision((yield Preprocessing(nonce, 0, plan.mul_count)))
    res = yield from evaluate(plan.circuit, PartyRole.AUTHORITY, inputs, triples, rng)

    opened = None
    if variant is Variant.NON_OBLIVIOUS:
        opened = [_is_nearby(res.outputs[w.nearby_lat.id], res.outputs[w.nearby_lon.id])
                  for w in plan.drones]
        yield from _geometry_phase(plan, opened, res.fragments, PartyRole.AUTHORITY, triples, rng,
                                   nonce)

    yield NEW_ROUND
    yield Recv(MsgType.BYE)
    yield Send(MsgType.BYE, b"")
    return AuthorityOutcome(n, variant, opened)


def _geometry_phase(plan: CircuitPlan, nearby: list[bool], fragments, role: PartyRole,
                    triples: TripleStore, rng: Prg, nonce: bytes):
    indices = [i for i, near in enumerate(nearby) if near]
    if not indices:
        return {}
    phase = build_geometry_phase(plan, indices)
    triples.provision((yield Preprocessing(nonce, 1, phase.circuit.mul_count)))
    carried = {new: fragments[old] for new, old in phase.carry_from.items()}
    res = yield from evaluate(phase.circuit, role, {}, triples, rng, carried)
    if role is not PartyRole.CITIZEN:
        return {}
    return {i: (res.outputs[dotp.id], res.outputs[norm_sq.id])
            for i, (dotp, norm_sq) in zip(indices, phase.outputs)}


# -- in-process sessions ----------------------------------------------------------

@dataclass(frozen=True)
class SessionParams:
    n: int
    area: ServiceArea
    variant: Variant = Variant.OBLIVIOUS
    scales: ScaleTable = field(default_factory=ScaleTable)
    citizen_seed: object = None
    authority_seed: object = None
    dealer_seed: object = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        object.__setattr__(self, "variant", Variant(self.variant))


@dataclass
class ProtocolRun:
    records: list[ShortlistRecord]
    decisions: list[ShortlistDecision]
    transcript: Transcript
    authority_view: AuthorityOutcome

    @property
    def shortlisted(self) -> list[str]:
        return [d.id for d in self.decisions if d.shortlisted]


def _run(citizen: CitizenInput, drones: Sequence[DroneInput], masks: AuthorityMasks | None,
         session: SessionParams, variant: Variant) -> ProtocolRun:
    if len(drones) != session.n:
        raise ProtocolError(f"session expects n={session.n}, fleet has {len(drones)}")
    if citizen.masks and len(citizen.masks) != session.n:
        raise ProtocolError(f"citizen supplied {len(citizen.masks)} mask pairs for n={session.n}")
    run = run_local(
        citizen_program(citizen.pos, citizen.lat_vicinity_deg, citizen.lon_vicinity_deg,
                        variant=variant, rng=Prg(session.citizen_seed),
                        masks=citizen.masks or None, scales=session.scales),
        authority_program(drones, session.area, rng=Prg(session.authority_seed), masks=masks,
                          scales=session.scales),
        dealer=Dealer(session.dealer_seed),
    )
    out: CitizenOutcome = run.citizen
    return ProtocolRun(out.records, out.decisions, run.transcript, run.authority)


def run_oblivious(citizen: CitizenInput, drones: Sequence[DroneInput],
                  authority_masks: AuthorityMasks | None, session: SessionParams) -> ProtocolRun:
    return _run(citizen, drones, authority_masks, session, Variant.OBLIVIOUS)


def run_non_oblivious_variant(citizen: CitizenInput, drones: Sequence[DroneInput],
                              authority_masks: AuthorityMasks | None,
                              session: SessionParams) -> ProtocolRun:
    return _run(citizen, drones, authority_masks, session, Variant.NON_OBLIVIOUS)

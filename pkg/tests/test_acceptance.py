"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
line (also repeated in the terminal summary) and then asserts.
"""

import random
import statistics
import time

from conftest import VERDICTS
from programs import random_program, run_program
from dronepriv import audit
from dronepriv.geometry import GeoCoord, VicinitySpec, meters_to_degree_thresholds
from dronepriv.mpc import (Circuit, Dealer, PartyRole, Prg, Reveal, TripleExhaustedError,
                           TripleReuseError, evaluate, run_local)
from dronepriv.mpc.circuit import plaintext_evaluate
from dronepriv.mpc.ring import MASK, scaled_int
from dronepriv.netlink import (FRAME_OVERHEAD, AuthorityConfig, DealerClient, FleetRegistry,
                               query_as_citizen, serve_authority, serve_dealer)
from dronepriv.scenarios import (CITY, bench_one, density_fleet, field_placements,
                                 oracle_decisions, random_fleet, run_variant)
from dronepriv.shortlist import MASK_LIMIT, CitizenInput, ScaleTable, ServiceArea, Variant
from wiretap import Recorder, frames


def verdict(number: int, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    print(line)
    VERDICTS.append(line)
    assert ok, line


def vicinity_at(citizen: GeoCoord, radius_m: float) -> VicinitySpec:
    return VicinitySpec.thresholds(*meters_to_degree_thresholds(radius_m, citizen.lat))


# 1 ---------------------------------------------------------------------------------------

def test_criterion_1_oracle_equivalence():
    rng = random.Random(2024)
    t0 = time.perf_counter()
    fleets = drones = nearby = shortlisted = 0
    mismatched_sets, worst_phi = [], 0.0
    for trial in range(200):
        n = rng.randint(1, 64)
        citizen = GeoCoord(CITY.lat0 + rng.uniform(-0.12, 0.12), CITY.lon0 + rng.uniform(-0.12, 0.12))
        radius = rng.uniform(50.0, 600.0)
        vic = vicinity_at(citizen, radius)
        poses = random_fleet(rng, n, citizen, 2.5 * vic.lat_deg)
        run = run_variant(Variant.OBLIVIOUS, citizen, poses, vic, CITY, seed=trial)
        expect = oracle_decisions(citizen, poses, vic)
        want = {p.id for p, (_, _, hit) in zip(poses, expect) if hit}
        if set(run.shortlisted) != want:
            mismatched_sets.append(trial)
        for d, (near, phi, _) in zip(run.decisions, expect):
            if near and d.phi_rad is not None:
                worst_phi = max(worst_phi, abs(d.phi_rad - phi))
            if d.in_vicinity != near:
                mismatched_sets.append(trial)
        fleets += 1
        drones += n
        nearby += sum(near for near, _, _ in expect)
        shortlisted += len(want)
    elapsed = time.perf_counter() - t0
    ok = not mismatched_sets and worst_phi <= 1e-3 and elapsed < 120
    verdict(1, ok, f"{fleets} fleets, {drones} drones ({nearby} nearby, {shortlisted} shortlisted), "
                   f"id-set mismatches={len(set(mismatched_sets))}, max |dphi|={worst_phi:.2e} rad, "
                   f"{elapsed:.1f}s")


# 2 ---------------------------------------------------------------------------------------

def test_criterion_2_field_placements():
    placements = field_placements()
    area = ServiceArea.around([p.citizen for p in placements] + [p.drone.pos_t for p in placements])
    agree = 0
    for i, pl in enumerate(placements):
        run = run_variant(Variant.OBLIVIOUS, pl.citizen, [pl.drone], pl.vicinity, area, seed=i)
        agree += run.decisions[0].shortlisted is pl.expected
    verdict(2, agree == len(placements) == 20, f"{agree}/{len(placements)} placements agree")


# 3 ---------------------------------------------------------------------------------------

def test_criterion_3_obliviousness():
    details, ok = [], True
    for n in (100, 1000):
        shapes = set()
        densities = []
        for j in range(20):
            k = round(j * 20 / 19)
            rng = random.Random(n * 100 + j)
            citizen = GeoCoord(CITY.lat0 + rng.uniform(-0.1, 0.1), CITY.lon0 + rng.uniform(-0.1, 0.1))
            vic = vicinity_at(citizen, rng.uniform(100.0, 400.0))
            poses = density_fleet(n, k, citizen, vic, CITY, seed=j)
            densities.append(sum(near for near, _, _ in oracle_decisions(citizen, poses, vic)))
            run = run_variant(Variant.OBLIVIOUS, citizen, poses, vic, CITY, seed=j)
            shapes.add(run.transcript.shape())
        ok &= len(shapes) == 1 and densities == [round(j * 20 / 19) for j in range(20)]
        details.append(f"n={n}: {len(shapes)} distinct transcript shape(s) over densities "
                       f"{min(densities)}-{max(densities)}")
    verdict(3, ok, "; ".join(details))


# 4 ---------------------------------------------------------------------------------------

def test_criterion_4_density_side_channel():
    citizen = GeoCoord(40.76, -73.97)
    vic = vicinity_at(citizen, 250.0)
    sizes = []
    for k in (0, 2, 5, 10):
        poses = density_fleet(200, k, citizen, vic, CITY, seed=k)
        assert sum(near for near, _, _ in oracle_decisions(citizen, poses, vic)) == k
        sizes.append(run_variant(Variant.NON_OBLIVIOUS, citizen, poses, vic, CITY, seed=k)
                     .transcript.total_bytes)
    ok = all(a < b for a, b in zip(sizes, sizes[1:]))
    verdict(4, ok, "n=200 non-oblivious bytes at densities 0,2,5,10 = " + ", ".join(map(str, sizes)))


# 5 ---------------------------------------------------------------------------------------

def test_criterion_5_traffic_scaling():
    ns = [100, 200, 500, 1000]
    sizes = [bench_one(n, Variant.OBLIVIOUS).total_bytes for n in ns]
    r2 = statistics.correlation(ns, sizes) ** 2
    ratio = sizes[-1] / sizes[0]
    ok = r2 > 0.99 and 9 <= ratio <= 11
    verdict(5, ok, f"bytes={sizes} R^2={r2:.6f} bytes(1000)/bytes(100)={ratio:.3f}")


# 6 ---------------------------------------------------------------------------------------

def test_criterion_6_wire_fidelity():
    rng = random.Random(66)
    citizen = GeoCoord(40.751, -73.981)
    vic = vicinity_at(citizen, 400.0)
    poses = random_fleet(rng, 30, citizen, 2 * vic.lat_deg)
    reg = FleetRegistry()
    for p in poses:
        reg.add(p)
    query = CitizenInput(citizen, vic.lat_deg, vic.lon_deg)
    problems = []
    checked = 0
    # three processes' worth of roles: dealer, authority, citizen
    with serve_dealer(seed="d6") as dealer, \
            serve_authority(reg, ("127.0.0.1", 0),
                            AuthorityConfig(area=CITY, dealer=DealerClient(dealer.address),
                                            seed="a6")) as srv:
        for variant in Variant:
            local = run_variant(variant, citizen, poses, vic, CITY, seed=6)
            tap = Recorder(srv.address)
            res = query_as_citizen(tap.address, query, variant=variant,
                                   dealer=DealerClient(dealer.address), seed=f"c6-{variant.value}")
            tap.thread.join(10)
            if res.decisions != local.decisions:
                problems.append(f"{variant.value}: decisions differ")
            if res.transcript.shape() != local.transcript.shape():
                problems.append(f"{variant.value}: transcript shapes differ")
            up, down = frames(bytes(tap.c2a)), frames(bytes(tap.a2c))
            if len(tap.c2a) != res.transcript.c2a_bytes + FRAME_OVERHEAD * len(up):
                problems.append(f"{variant.value}: c2a socket bytes off")
            if len(tap.a2c) != res.transcript.a2c_bytes + FRAME_OVERHEAD * len(down):
                problems.append(f"{variant.value}: a2c socket bytes off")
            if res.wire.total_bytes != res.transcript.total_bytes + FRAME_OVERHEAD * res.wire.frames:
                problems.append(f"{variant.value}: counted socket bytes off")
            checked += len(res.decisions)
    verdict(6, not problems, f"{checked} loopback decisions, socket = transcript + "
                             f"{FRAME_OVERHEAD}*frames; " + ("; ".join(problems) or "no discrepancies"))


# 7 ---------------------------------------------------------------------------------------

def test_criterion_7_engine_soundness():
    rng = random.Random(7)
    t0 = time.perf_counter()
    outputs = triples = 0
    wrong = []
    for i in range(10_000):
        c, inputs = random_program(rng, max_gates=rng.randint(1, 50))
        run = run_program(c, inputs, seed=i)
        expect = plaintext_evaluate(c, inputs)
        for wire, to in c.outputs:
            for role, res in ((PartyRole.CITIZEN, run.citizen), (PartyRole.AUTHORITY, run.authority)):
                if to.includes(role):
                    outputs += 1
                    if res.outputs[wire].signed != expect[wire]:
                        wrong.append(i)
        # the same triples both parties drew, rebuilt from the dealer stream
        stores = [Dealer(i).store(role, b"prog", c.mul_count) for role in PartyRole]
        for tc, ta in zip(*(s.take(c.mul_count) for s in stores)):
            a, b, cc = ((tc.a + ta.a) & MASK, (tc.b + ta.b) & MASK, (tc.c + ta.c) & MASK)
            triples += 1
            if cc != (a * b) & MASK:
                wrong.append(i)
    # reuse must be refused, both for a consumed triple and for an exhausted store
    store = Dealer(0).store(PartyRole.CITIZEN, count=1)
    t = store.take(1)[0]
    t.consume()
    reuse_rejected = False
    try:
        t.consume()
    except TripleReuseError:
        reuse_rejected = True
    exhausted_rejected = False
    try:
        store.take(1)
    except TripleExhaustedError:
        exhausted_rejected = True
    ok = not wrong and reuse_rejected and exhausted_rejected
    verdict(7, ok, f"10000 programs, {outputs} outputs exact, {triples} triples with c=a*b, "
                   f"reuse rejected={reuse_rejected}, failures={len(wrong)}, "
                   f"{time.perf_counter() - t0:.1f}s")


# 8 ---------------------------------------------------------------------------------------

def test_criterion_8_audit_verifier():
    t0 = time.perf_counter()
    key = audit.keygen(b"acceptance-device")
    policy = audit.AuditPolicy(audit.reference_measurements())
    fx = audit.tamper_fixtures(key)
    expected = {"compliant": [], "measurement_flip_kernel": [1],
                "measurement_flip_launcher": [2], "rogue_subscriber": [3],
                "signature_flip": [1, 2, 3]}
    got = {name: audit.verify_trail_bytes(fx[name], policy).failed_checks() for name in expected}
    data = fx["compliant"]
    undetected = 0
    for i in range(len(data)):
        for delta in (1, 0x80):
            m = bytearray(data)
            m[i] ^= delta
            if audit.verify_trail_bytes(bytes(m), policy).passed:
                undetected += 1
    ok = got == expected and undetected == 0
    verdict(8, ok, f"failed checks per fixture {got}; {2 * len(data)} single-byte mutations, "
                   f"{undetected} undetected, {time.perf_counter() - t0:.1f}s")


# 9 ---------------------------------------------------------------------------------------

def masking_circuit(k: int, diff_bound: int, mask_limit: int):
    """``k`` copies of the masking gadget: diff * citizen mask * authority mask."""
    c = Circuit()
    wires = []
    for i in range(k):
        diff = c.input(PartyRole.AUTHORITY, 0, diff_bound, f"diff[{i}]")
        cm = c.input(PartyRole.CITIZEN, 0, mask_limit - 1, f"c[{i}]")
        am = c.input(PartyRole.AUTHORITY, 0, mask_limit - 1, f"r[{i}]")
        out = c.mul(c.mul(diff, cm), am)
        c.reveal(out, Reveal.CITIZEN)
        wires.append((diff, cm, am, out))
    return c, wires


def test_criterion_9_masking():
    s = ScaleTable()
    # the largest squared-difference the vicinity gadget can carry
    half = scaled_int(0.5, s.deg)
    diff_bound = (2 * half) ** 2
    rng = random.Random(9)
    batch, draws = 2000, 100_000
    sign_ok = distinct_ok = exact_ok = 0
    distinct_cases = 0
    c, wires = masking_circuit(batch, diff_bound, MASK_LIMIT)
    for b in range(draws // batch):
        citizen_in, authority_in, expect = {}, {}, []
        for diff_w, cm_w, am_w, out_w in wires:
            pick = rng.random()
            if pick < 0.05:
                diff = rng.choice([0, 1, -1, diff_bound, -diff_bound])
            else:
                diff = rng.randint(-diff_bound, diff_bound)
            cm = 1 if rng.random() < 0.05 else rng.randrange(1, MASK_LIMIT)
            am = 1 if rng.random() < 0.05 else rng.randrange(1, MASK_LIMIT)
            citizen_in[cm_w.id] = cm
            authority_in[diff_w.id] = diff
            authority_in[am_w.id] = am
            expect.append((diff, cm, am, out_w.id))
        stores = [Dealer(f"mask/{b}").store(role, b"m", c.mul_count) for role in PartyRole]
        run = run_local(
            evaluate(c, PartyRole.CITIZEN, citizen_in, stores[0], Prg(f"c/{b}")),
            evaluate(c, PartyRole.AUTHORITY, authority_in, stores[1], Prg(f"a/{b}")))
        for diff, cm, am, wid in expect:
            masked = run.citizen.outputs[wid].signed
            sign_ok += (masked > 0) - (masked < 0) == (diff > 0) - (diff < 0)
            exact_ok += masked == diff * cm * am
            if cm > 1 and am > 1 and diff != 0:
                distinct_cases += 1
                distinct_ok += masked != diff
    ok = sign_ok == draws and exact_ok == draws and distinct_ok == distinct_cases
    verdict(9, ok, f"{draws} draws: sign preserved {sign_ok}/{draws}, masked != raw "
                   f"{distinct_ok}/{distinct_cases} (both masks > 1, raw != 0)")

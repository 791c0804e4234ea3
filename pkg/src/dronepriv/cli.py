"""Command-line entry points: fleet generation, dealer/authority/citizen, bench, oracle, audit.

Exit codes: 0 success, 1 file or parse error, 2 network or protocol failure,
3 audit verdict failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

from . import audit
from .geometry import GeoCoord, GeometryError, VicinitySpec, meters_to_degree_thresholds
from .mpc import MPCError
from .netlink import (AuthorityConfig, BBox, DealerClient, FleetError, generate_fleet, ingest_fleet,
                      parse_address, query_as_citizen, serve_authority, serve_dealer, write_fleet)
from .scenarios import BENCH_HEADER, bench_one, oracle_decisions
from .shortlist import CitizenInput, ServiceArea, Variant

EXIT_OK, EXIT_IO, EXIT_NETWORK, EXIT_AUDIT = 0, 1, 2, 3

log = logging.getLogger("dronepriv")


class UsageError(Exception):
    pass


def _area(text: str | None) -> ServiceArea | None:
    if not text:
        return None
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 4:
        raise UsageError("--area needs lat0,lon0,half_lat_deg,half_lon_deg")
    return ServiceArea(*parts)


def _vicinity(args) -> VicinitySpec:
    if args.radius_m is not None:
        return VicinitySpec.thresholds(*meters_to_degree_thresholds(args.radius_m, args.lat))
    if args.lat_vic_deg is None or args.lon_vic_deg is None:
        raise UsageError("give --radius-m or both --lat-vic-deg and --lon-vic-deg")
    return VicinitySpec.thresholds(args.lat_vic_deg, args.lon_vic_deg)


# -- commands ---------------------------------------------------------------------

def cmd_fleetgen(args) -> int:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    try:
        bbox = BBox.parse(args.bbox)
    except ValueError as exc:
        raise UsageError(f"--bbox: {exc}") from None
    write_fleet(generate_fleet(args.n, bbox, args.seed), args.out)
    print(f"wrote {args.n} drones to {args.out}")
    return EXIT_OK


def cmd_authority(args) -> int:
    registry = ingest_fleet(args.fleet)
    cfg = AuthorityConfig(area=_area(args.area), dealer=DealerClient(parse_address(args.dealer)),
                          seed=args.seed)
    server = serve_authority(registry, parse_address(args.listen), cfg)
    host, port = server.address
    area = server.area_for(registry.snapshot()) if len(registry) else cfg.area
    print(f"authority serving {len(registry)} drones on {host}:{port}", flush=True)
    if area is not None:
        print(f"service area {area.lat0},{area.lon0} +/- {area.half_lat_deg},{area.half_lon_deg} deg",
              flush=True)
    try:
        if args.max_sessions:
            for _ in range(args.max_sessions):
                server.handle_request()
        else:
            server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    for s in server.sessions:
        status = s.error or "ok"
        log.info("session %d from %s: n=%d %s", s.session_id, s.peer, s.n, status)
    return EXIT_OK


def cmd_dealer(args) -> int:
    server = serve_dealer(parse_address(args.listen), args.seed)
    host, port = server.address
    print(f"dealer serving triples on {host}:{port}", flush=True)
    try:
        if args.max_requests:
            for _ in range(args.max_requests):
                server.handle_request()
        else:
            server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    log.info("dealt %d batches", server.requests)
    return EXIT_OK


def cmd_citizen(args) -> int:
    pos = GeoCoord(args.lat, args.lon)
    vic = _vicinity(args)
    query = CitizenInput(pos, vic.lat_deg, vic.lon_deg)
    dealer = DealerClient(parse_address(args.dealer), timeout_s=args.timeout)
    res = query_as_citizen(parse_address(args.connect), query, variant=args.variant,
                           dealer=dealer, seed=args.seed, timeout_s=args.timeout)
    rows = [{"id": d.id, "in_vicinity": d.in_vicinity,
             "phi_deg": None if d.phi_rad is None else math.degrees(d.phi_rad),
             "theta_deg": math.degrees(theta), "shortlisted": d.shortlisted,
             "degenerate": d.degenerate}
            for d, theta in zip(res.decisions, res.outcome.thetas)]
    summary = {**res.transcript.summary(), "wire_bytes": res.wire.total_bytes,
               "frames": res.wire.frames}
    if args.json:
        print(json.dumps({"variant": res.outcome.variant.value, "n": res.outcome.n,
                          "decisions": rows, "transcript": summary}, indent=2))
    else:
        shown = rows if args.all else [r for r in rows if r["in_vicinity"]]
        print(f"{'id':<16} {'nearby':<7} {'phi_deg':>8} {'theta':>6}  shortlisted")
        for r in shown:
            phi = "-" if r["phi_deg"] is None else f"{r['phi_deg']:.2f}"
            print(f"{r['id']:<16} {str(r['in_vicinity']):<7} {phi:>8} {r['theta_deg']:>6.1f}  "
                  f"{'YES' if r['shortlisted'] else 'no'}")
        print(f"shortlisted {sum(r['shortlisted'] for r in rows)} of {len(rows)} drones")
        print("transcript: " + " ".join(f"{k}={v}" for k, v in summary.items()))
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        n_list = [int(x) for x in args.n_list.split(",") if x.strip()]
    except ValueError:
        raise UsageError("--n-list must be comma-separated integers") from None
    if not n_list or min(n_list) < 1:
        raise UsageError("--n-list needs positive sizes")
    variants = [Variant.OBLIVIOUS, Variant.NON_OBLIVIOUS] if args.variant == "both" \
        else [Variant(args.variant)]
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(BENCH_HEADER)
        for n in n_list:
            for v in variants:
                for rep in range(args.repeats):
                    row = bench_one(n, v, seed=args.seed, repeat=rep, radius_m=args.radius_m)
                    w.writerow(row.cells(args.units))
                    out.flush()
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_oracle(args) -> int:
    registry = ingest_fleet(args.fleet)
    pos = GeoCoord(args.lat, args.lon)
    vic = _vicinity(args)
    poses = registry.poses()
    rows = []
    for p, (near, phi, hit) in zip(poses, oracle_decisions(pos, poses, vic)):
        rows.append({"id": p.id, "in_vicinity": near,
                     "phi_deg": None if phi is None else math.degrees(phi),
                     "theta_deg": math.degrees(p.theta_rad), "shortlisted": hit})
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        for r in rows:
            if r["in_vicinity"] or args.all:
                phi = "-" if r["phi_deg"] is None else f"{r['phi_deg']:.2f}"
                print(f"{r['id']:<16} {phi:>8} {r['theta_deg']:>6.1f}  "
                      f"{'YES' if r['shortlisted'] else 'no'}")
        print(f"shortlisted {sum(r['shortlisted'] for r in rows)} of {len(rows)} drones")
    return EXIT_OK


def cmd_audit_fixture(args) -> int:
    """Write the reference measurement DB and the compliant/tampered trails."""
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    key = audit.keygen(args.key_seed)
    (out / "measurements.json").write_text(json.dumps(audit.reference_measurements(), indent=2,
                                                      sort_keys=True) + "\n")
    for name, data in audit.tamper_fixtures(key).items():
        (out / f"{name}.trail.json").write_bytes(data)
    print(f"fixtures written to {out}")
    return EXIT_OK


def cmd_audit_sign(args) -> int:
    """Build and sign a trail from a JSON list of launches."""
    key = audit.keygen(args.key_seed)
    try:
        launches = json.loads(Path(args.launches).read_text(encoding="utf-8"))
        trail = audit.empty_trail(key)
        for item in launches:
            trail = audit.record_launch(trail, audit.Manifest.from_json(item["manifest"]),
                                        item["measurements"], int(item["timestamp_ms"]), key)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise audit.AuditError(f"bad launches file: {exc}") from None
    if args.start is not None or args.end is not None:
        trail = audit.snapshot(trail, args.start if args.start is not None else 0,
                               args.end if args.end is not None else 2 ** 63, key)
    audit.dump_trail(trail, args.out)
    print(f"signed {len(trail.entries)} entries with device key {trail.device_pubkey}")
    return EXIT_OK


def cmd_audit_verify(args) -> int:
    policy = audit.AuditPolicy.from_files(args.measurements, args.policy)
    report = audit.verify_trail_bytes(Path(args.trail).read_bytes(), policy)
    print(json.dumps(report.to_json(), indent=2))
    return EXIT_OK if report.passed else EXIT_AUDIT


# -- parser -------------------------------------------------------------------------

def _add_vicinity_flags(p):
    p.add_argument("--lat", type=float, required=True)
    p.add_argument("--lon", type=float, required=True)
    p.add_argument("--radius-m", type=float)
    p.add_argument("--lat-vic-deg", type=float)
    p.add_argument("--lon-vic-deg", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dronepriv", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fleetgen", help="write a synthetic fleet as JSONL")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bbox", default="40.55,-74.2,40.95,-73.75",
                   help="lat_min,lon_min,lat_max,lon_max")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fleetgen)

    p = sub.add_parser("authority", help="serve shortlist queries for a fleet")
    p.add_argument("--fleet", required=True)
    p.add_argument("--listen", default="127.0.0.1:7450")
    p.add_argument("--area", help="lat0,lon0,half_lat_deg,half_lon_deg (default: fleet bbox)")
    p.add_argument("--dealer", default="127.0.0.1:7451", help="triple dealer address")
    p.add_argument("--seed", help="fix the authority's randomness (testing)")
    p.add_argument("--max-sessions", type=int, default=0, help="exit after this many queries")
    p.set_defaults(func=cmd_authority)

    p = sub.add_parser("dealer", help="serve Beaver triples to both parties (run apart from both)")
    p.add_argument("--listen", default="127.0.0.1:7451")
    p.add_argument("--seed", help="fix the dealer's randomness (testing)")
    p.add_argument("--max-requests", type=int, default=0, help="exit after this many requests")
    p.set_defaults(func=cmd_dealer)

    p = sub.add_parser("citizen", help="query an authority for drones that may see you")
    p.add_argument("--connect", default="127.0.0.1:7450")
    _add_vicinity_flags(p)
    p.add_argument("--variant", choices=[v.value for v in Variant], default=Variant.OBLIVIOUS.value)
    p.add_argument("--dealer", default="127.0.0.1:7451", help="triple dealer address")
    p.add_argument("--seed", help="fix the citizen's randomness (testing)")
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--json", action="store_true")
    p.add_argument("--all", action="store_true", help="list drones outside the vicinity too")
    p.set_defaults(func=cmd_citizen)

    p = sub.add_parser("bench", help="measure traffic and latency, CSV out")
    p.add_argument("--n-list", default="100,200,500,1000")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--variant", choices=["oblivious", "non-oblivious", "both"], default="oblivious")
    p.add_argument("--radius-m", type=float, default=200.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--units", choices=["bytes", "mb"], default="bytes")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="plaintext field-of-view check against a fleet file")
    p.add_argument("--fleet", required=True)
    _add_vicinity_flags(p)
    p.add_argument("--json", action="store_true")
    p.add_argument("--all", action="store_true")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("audit-fixture", help="write reference measurements and sample trails")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--key-seed", default="device-0")
    p.set_defaults(func=cmd_audit_fixture)

    p = sub.add_parser("audit-sign", help="sign a trail from a launches JSON file")
    p.add_argument("--launches", required=True)
    p.add_argument("--key-seed", default="device-0")
    p.add_argument("--start", type=int, help="snippet start (ms)")
    p.add_argument("--end", type=int, help="snippet end (ms)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_audit_sign)

    p = sub.add_parser("audit-verify", help="run the three citizen checks on a trail")
    p.add_argument("--trail", required=True)
    p.add_argument("--measurements", required=True)
    p.add_argument("--policy")
    p.set_defaults(func=cmd_audit_verify)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (OSError, MPCError) as exc:
        if isinstance(exc, (FileNotFoundError, IsADirectoryError, PermissionError)):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"network error: {exc}", file=sys.stderr)
        return EXIT_NETWORK
    except (FleetError, audit.AuditError, GeometryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

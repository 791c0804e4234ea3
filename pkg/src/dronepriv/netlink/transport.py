"""Socket driver for party programs, the authority server and the citizen client."""

from __future__ import annotations

import itertools
import logging
import socket
import socketserver
import threading
from dataclasses import dataclass, field

from ..mpc import MPCError, NewRound, Preprocessing, ProtocolError, Prg, Recv, Send, Transcript
from ..mpc.channel import check_incoming, fetch_triples
from ..mpc.shares import PartyRole
from ..mpc.transcript import MsgType
from ..shortlist import (CitizenInput, CitizenOutcome, ScaleTable, ServiceArea, Variant,
                         authority_program, citizen_program)
from .fleet import FleetRegistry
from .framing import KNOWN_TYPES, FRAME_OVERHEAD, MAX_PAYLOAD, encode_frame, error_frame, parse_header

log = logging.getLogger(__name__)


class ConnectionClosed(ProtocolError):
    pass


@dataclass
class WireStats:
    bytes_sent: int = 0
    bytes_received: int = 0
    frames_sent: int = 0
    frames_received: int = 0

    @property
    def total_bytes(self) -> int:
        return self.bytes_sent + self.bytes_received

    @property
    def frames(self) -> int:
        return self.frames_sent + self.frames_received


class FramedSocket:
    """Blocking frame I/O that counts every byte it moves."""

    def __init__(self, sock: socket.socket, max_payload: int = MAX_PAYLOAD,
                 known: frozenset = KNOWN_TYPES):
        self.sock = sock
        self.max_payload = max_payload
        self.known = known
        self.stats = WireStats()

    def send_frame(self, msg_type: int, payload: bytes):
        data = encode_frame(msg_type, payload, self.max_payload, self.known)
        self.sock.sendall(data)
        self.stats.bytes_sent += len(data)
        self.stats.frames_sent += 1

    def _recv_exact(self, n: int) -> bytes:
        buf = bytearray()
        while len(buf) < n:
            chunk = self.sock.recv(min(n - len(buf), 1 << 20))
            if not chunk:
                raise ConnectionClosed(f"peer closed the connection ({len(buf)}/{n} bytes read)")
            buf += chunk
        return bytes(buf)

    def recv_frame(self) -> tuple[int, bytes]:
        header = self._recv_exact(FRAME_OVERHEAD)
        self.stats.bytes_received += FRAME_OVERHEAD
        length, code = parse_header(header, self.max_payload, self.known)
        payload = self._recv_exact(length)
        self.stats.bytes_received += length
        self.stats.frames_received += 1
        return (MsgType(code) if code in KNOWN_TYPES else code), payload

    def send_error(self, reason: str):
        try:
            data = error_frame(reason)
            self.sock.sendall(data)
            self.stats.bytes_sent += len(data)
            self.stats.frames_sent += 1
        except OSError:
            pass


def drive(program, role: PartyRole, conn: FramedSocket, dealer=None):
    """Run one party program over a socket; returns (result, transcript).

    ``dealer`` answers the program's triple requests (a ``Dealer`` or a
    ``DealerClient``). A failure on this side is reported to the peer with an
    ERROR frame before the exception propagates.
    """
    t = Transcript()
    value = None
    try:
        while True:
            try:
                op = program.send(value)
            except StopIteration as stop:
                return stop.value, t
            value = None
            if isinstance(op, Send):
                conn.send_frame(op.msg_type, op.payload)
                t.record(role.outbound, op.msg_type, len(op.payload))
            elif isinstance(op, Recv):
                msg_type, payload = conn.recv_frame()
                check_incoming(op.msg_type, msg_type, payload)
                t.record(role.peer.outbound, msg_type, len(payload))
                value = payload
            elif isinstance(op, NewRound):
                t.next_round()
            elif isinstance(op, Preprocessing):
                value = fetch_triples(dealer, role, op, t)
            else:
                raise TypeError(f"unknown party operation {op!r}")
    except ConnectionClosed:
        raise
    except (MPCError, ValueError) as exc:
        if not (isinstance(exc, ProtocolError) and str(exc).startswith("peer aborted")):
            conn.send_error(f"{type(exc).__name__}: {exc}")
        raise
    finally:
        program.close()


# -- authority ----------------------------------------------------------------

@dataclass
class QuerySession:
    session_id: int
    peer: str
    variant: Variant | None = None
    n: int = 0
    transcript: Transcript | None = None
    wire: WireStats = field(default_factory=WireStats)
    error: str | None = None


@dataclass
class AuthorityConfig:
    area: ServiceArea | None = None
    dealer: object = None           # Dealer or DealerClient, never co-located with a seed here
    seed: object = None
    scales: ScaleTable = field(default_factory=ScaleTable)
    max_payload: int = MAX_PAYLOAD
    timeout_s: float | None = 60.0


class AuthorityServer(socketserver.ThreadingTCPServer):
    """Serves concurrent citizen queries, each against its own fleet snapshot."""

    # server_close() waits for in-flight sessions
    daemon_threads = False
    block_on_close = True
    allow_reuse_address = True

    def __init__(self, registry: FleetRegistry, address, config: AuthorityConfig | None = None):
        self.registry = registry
        self.config = config or AuthorityConfig()
        self.sessions: list[QuerySession] = []
        self._ids = itertools.count(1)
        self._lock = threading.Lock()
        self._thread: threading.Thread | None = None
        super().__init__(address, _SessionHandler)

    @property
    def address(self) -> tuple[str, int]:
        return self.server_address[:2]

    def area_for(self, drones) -> ServiceArea:
        if self.config.area is not None:
            return self.config.area
        return ServiceArea.around([d.pos_t for d in drones], margin_deg=0.02)

    def start(self) -> AuthorityServer:
        self._thread = threading.Thread(target=self.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self.shutdown()
        self.server_close()
        if self._thread:
            self._thread.join()

    def __enter__(self):
        return self.start() if self._thread is None else self

    def __exit__(self, *exc):
        self.stop()


class _SessionHandler(socketserver.BaseRequestHandler):
    def handle(self):
        server: AuthorityServer = self.server
        cfg = server.config
        with server._lock:
            sess = QuerySession(next(server._ids), f"{self.client_address[0]}:{self.client_address[1]}")
            server.sessions.append(sess)
        self.request.settimeout(cfg.timeout_s)
        conn = FramedSocket(self.request, cfg.max_payload)
        drones = server.registry.snapshot()
        sess.n = len(drones)
        try:
            rng = Prg(cfg.seed).fork(f"session/{sess.session_id}") if cfg.seed is not None else Prg()
            program = authority_program(drones, server.area_for(drones) if drones else None,
                                        rng=rng, scales=cfg.scales)
            outcome, sess.transcript = drive(program, PartyRole.AUTHORITY, conn, cfg.dealer)
            sess.variant = outcome.variant
        except (MPCError, ValueError, OSError) as exc:
            sess.error = f"{type(exc).__name__}: {exc}"
            log.info("session %d aborted: %s", sess.session_id, sess.error)
        finally:
            sess.wire = conn.stats


def serve_authority(registry: FleetRegistry, address=("127.0.0.1", 0),
                    config: AuthorityConfig | None = None) -> AuthorityServer:
    """Bind the authority service; call ``start()`` or ``serve_forever()``."""
    return AuthorityServer(registry, address, config)


# -- citizen ------------------------------------------------------------------

@dataclass
class QueryResult:
    outcome: CitizenOutcome
    transcript: Transcript
    wire: WireStats

    @property
    def decisions(self):
        return self.outcome.decisions


def query_as_citizen(address, citizen: CitizenInput, *, variant: Variant | str = Variant.OBLIVIOUS,
                     dealer=None, seed=None, scales: ScaleTable | None = None,
                     timeout_s: float | None = 60.0, max_payload: int = MAX_PAYLOAD) -> QueryResult:
    """One full query. Network failures surface as ``OSError``."""
    program = citizen_program(citizen.pos, citizen.lat_vicinity_deg, citizen.lon_vicinity_deg,
                              variant=variant, rng=Prg(seed), masks=citizen.masks or None,
                              scales=scales)
    with socket.create_connection(tuple(address), timeout=timeout_s) as sock:
        conn = FramedSocket(sock, max_payload)
        outcome, transcript = drive(program, PartyRole.CITIZEN, conn, dealer)
    return QueryResult(outcome, transcript, conn.stats)


def parse_address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address {text!r} is not host:port")
    return host or "127.0.0.1", int(port)


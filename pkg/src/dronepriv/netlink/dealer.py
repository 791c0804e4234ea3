"""The dealer as a network service, reachable by both parties but run by neither.

Each request names the caller's role, the session nonce, a batch number and
a count; the reply carries that role's fragments only, as ``3*count`` ring
elements (a, b, c per triple). A given (role, nonce, batch) is dealt once, so
a second request for the same half is refused rather than served again.
"""

from __future__ import annotations

import logging
import socket
import socketserver
import struct
import threading

from ..mpc import Dealer, ELEMENT_BYTES, MPCError, PartyRole, ProtocolError, TripleShare
from ..mpc.ring import decode_elements, encode_elements
from .framing import MAX_PAYLOAD
from .transport import ConnectionClosed, FramedSocket

log = logging.getLogger(__name__)

TRIPLE_REQUEST = 0x21
TRIPLE_BATCH = 0x22
DEALER_ERROR = 0x7F
DEALER_TYPES = frozenset({TRIPLE_REQUEST, TRIPLE_BATCH, DEALER_ERROR})

_REQUEST = struct.Struct(">BIIB")
MAX_TRIPLES = MAX_PAYLOAD // (3 * ELEMENT_BYTES)


def encode_request(role: PartyRole, nonce: bytes, batch: int, count: int) -> bytes:
    if len(nonce) > 255:
        raise ValueError("nonce longer than 255 bytes")
    return _REQUEST.pack(int(role), batch, count, len(nonce)) + bytes(nonce)


def decode_request(data: bytes) -> tuple[PartyRole, bytes, int, int]:
    if len(data) < _REQUEST.size:
        raise ProtocolError("short triple request")
    role, batch, count, ln = _REQUEST.unpack_from(data)
    if len(data) != _REQUEST.size + ln or role not in (0, 1):
        raise ProtocolError("malformed triple request")
    return PartyRole(role), bytes(data[_REQUEST.size:]), batch, count


class DealerServer(socketserver.ThreadingTCPServer):
    daemon_threads = False
    block_on_close = True
    allow_reuse_address = True

    def __init__(self, address=("127.0.0.1", 0), seed=None):
        self.dealer = Dealer(seed)
        self.dealt: set[tuple[int, bytes, int]] = set()
        self.requests = 0
        self._lock = threading.Lock()
        self._thread: threading.Thread | None = None
        super().__init__(address, _DealerHandler)

    @property
    def address(self) -> tuple[str, int]:
        return self.server_address[:2]

    def claim(self, role: PartyRole, nonce: bytes, batch: int):
        key = (int(role), nonce, batch)
        with self._lock:
            if key in self.dealt:
                raise ProtocolError(f"{role.name.lower()} half of batch {batch} already dealt")
            self.dealt.add(key)
            self.requests += 1

    def start(self) -> DealerServer:
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


class _DealerHandler(socketserver.BaseRequestHandler):
    def handle(self):
        server: DealerServer = self.server
        self.request.settimeout(30)
        conn = FramedSocket(self.request, known=DEALER_TYPES)
        try:
            code, payload = conn.recv_frame()
            if code != TRIPLE_REQUEST:
                raise ProtocolError(f"expected a triple request, got type 0x{code:02x}")
            role, nonce, batch, count = decode_request(payload)
            if count > MAX_TRIPLES:
                raise ProtocolError(f"{count} triples exceed the per-request limit {MAX_TRIPLES}")
            server.claim(role, nonce, batch)
            shares = server.dealer.deal(role, nonce, batch, count)
            conn.send_frame(TRIPLE_BATCH, encode_elements(v for t in shares for v in (t.a, t.b, t.c)))
        except (MPCError, ValueError) as exc:
            log.info("dealer refused %s: %s", self.client_address, exc)
            conn.send_frame(DEALER_ERROR, str(exc).encode()[:1024])
        except OSError as exc:
            log.info("dealer connection from %s failed: %s", self.client_address, exc)


def serve_dealer(address=("127.0.0.1", 0), seed=None) -> DealerServer:
    """Bind the dealer service; call ``start()`` or ``serve_forever()``."""
    return DealerServer(address, seed)


class DealerClient:
    """Fetches one party's fragments from a :class:`DealerServer`."""

    def __init__(self, address, timeout_s: float | None = 60.0):
        self.address = tuple(address)
        self.timeout_s = timeout_s

    def deal(self, role: PartyRole, nonce: bytes, batch: int, count: int) -> list[TripleShare]:
        with socket.create_connection(self.address, timeout=self.timeout_s) as sock:
            conn = FramedSocket(sock, known=DEALER_TYPES)
            conn.send_frame(TRIPLE_REQUEST, encode_request(role, nonce, batch, count))
            try:
                code, payload = conn.recv_frame()
            except ConnectionClosed:
                raise ProtocolError("dealer closed the connection") from None
        if code == DEALER_ERROR:
            raise ProtocolError("dealer refused: " + payload.decode("utf-8", "replace"))
        if code != TRIPLE_BATCH:
            raise ProtocolError(f"unexpected dealer reply type 0x{code:02x}")
        vals = decode_elements(payload)
        if len(vals) != 3 * count:
            raise ProtocolError(f"dealer sent {len(vals) // 3} of {count} triples")
        return [TripleShare(i, *vals[3 * i:3 * i + 3]) for i in range(count)]

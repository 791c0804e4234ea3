"""Two-party additive shares, Beaver triples and the trusted dealer.

The dealer stands in for OT-based preprocessing. It is a trusted third party
in the semi-honest model: it could rebuild both parties' fragments, so it
must run apart from both of them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .errors import ScaleMismatchError, TripleExhaustedError, TripleReuseError
from .prg import Prg
from .ring import ELEMENT_BYTES, MASK, FixedPoint
from .transcript import Direction, MsgType, Transcript


class PartyRole(enum.IntEnum):
    CITIZEN = 0
    AUTHORITY = 1

    @property
    def peer(self) -> PartyRole:
        return PartyRole(1 - self)

    @property
    def outbound(self) -> Direction:
        return Direction.C2A if self is PartyRole.CITIZEN else Direction.A2C


@dataclass(frozen=True)
class Share:
    party: PartyRole
    fragment: int
    scale_exp: int


def share(value: FixedPoint, rng: Prg) -> tuple[Share, Share]:
    """Split into (citizen, authority) fragments; the citizen's is uniform."""
    r = rng.ring_element()
    return (Share(PartyRole.CITIZEN, r, value.scale_exp),
            Share(PartyRole.AUTHORITY, (value.raw - r) & MASK, value.scale_exp))


def reconstruct(a: Share, b: Share) -> FixedPoint:
    if a.party == b.party:
        raise ValueError("need one fragment from each party")
    if a.scale_exp != b.scale_exp:
        raise ScaleMismatchError(f"fragments at scales {a.scale_exp} and {b.scale_exp}")
    return FixedPoint((a.fragment + b.fragment) & MASK, a.scale_exp)


def _check_pair(x: Share, y: Share):
    if x.party != y.party:
        raise ValueError("cannot combine fragments held by different parties")
    if x.scale_exp != y.scale_exp:
        raise ScaleMismatchError(f"scale 2^{x.scale_exp} vs 2^{y.scale_exp}")


def add(x: Share, y: Share) -> Share:
    _check_pair(x, y)
    return Share(x.party, (x.fragment + y.fragment) & MASK, x.scale_exp)


def sub(x: Share, y: Share) -> Share:
    _check_pair(x, y)
    return Share(x.party, (x.fragment - y.fragment) & MASK, x.scale_exp)


def add_public(x: Share, c: FixedPoint) -> Share:
    """Add a public constant; only the citizen's fragment moves."""
    if c.scale_exp != x.scale_exp:
        raise ScaleMismatchError(f"constant at 2^{c.scale_exp}, share at 2^{x.scale_exp}")
    if x.party is PartyRole.CITIZEN:
        return Share(x.party, (x.fragment + c.raw) & MASK, x.scale_exp)
    return x


def mul_public(x: Share, c: int | FixedPoint) -> Share:
    """Multiply by a public integer (scale 0) or fixed-point constant."""
    if isinstance(c, FixedPoint):
        return Share(x.party, (x.fragment * c.raw) & MASK, x.scale_exp + c.scale_exp)
    return Share(x.party, (x.fragment * c) & MASK, x.scale_exp)


@dataclass
class TripleShare:
    """One party's fragments of a Beaver triple. Usable exactly once."""

    index: int
    a: int
    b: int
    c: int
    used: bool = False

    def consume(self):
        if self.used:
            raise TripleReuseError(f"triple #{self.index} already consumed")
        self.used = True


@dataclass
class BeaverTriple:
    citizen: TripleShare
    authority: TripleShare

    def of(self, role: PartyRole) -> TripleShare:
        return self.citizen if role is PartyRole.CITIZEN else self.authority

    def reconstructed(self) -> tuple[int, int, int]:
        return ((self.citizen.a + self.authority.a) & MASK,
                (self.citizen.b + self.authority.b) & MASK,
                (self.citizen.c + self.authority.c) & MASK)


# one party's (a, b, c) fragments; the dealer sends that much to each party
TRIPLE_FRAGMENT_BYTES = 3 * ELEMENT_BYTES
TRIPLE_PREPROCESSING_BYTES = 2 * TRIPLE_FRAGMENT_BYTES


def _draw_triple(prg: Prg, index: int) -> BeaverTriple:
    a, b, ra, rb, rc = prg.ring_elements(5)
    c = (a * b) & MASK
    return BeaverTriple(
        TripleShare(index, ra, rb, rc),
        TripleShare(index, (a - ra) & MASK, (b - rb) & MASK, (c - rc) & MASK),
    )


def dealer_generate_triples(seed, count: int) -> list[BeaverTriple]:
    """Both halves of ``count`` triples, for in-process tests of one multiplication."""
    prg = Prg(seed)
    return [_draw_triple(prg, i) for i in range(count)]


class Dealer:
    """Trusted third party that hands each party only its own triple fragments.

    Dealing is stateless: ``(nonce, batch)`` fixes the triples, so the two
    parties fetch independently and still receive matching halves. Whoever
    holds the seed can rebuild both halves, which is why the dealer must
    never run inside either party.
    """

    def __init__(self, seed=None):
        # seeds often arrive as command-line text; 7 and "7" must agree
        self._root = Prg(str(seed) if isinstance(seed, int) else seed)

    def deal(self, role: PartyRole, nonce: bytes, batch: int, count: int) -> list[TripleShare]:
        if count < 0 or batch < 0:
            raise ValueError("batch and count must be non-negative")
        prg = self._root.fork(f"triples/{bytes(nonce).hex()}/{batch}")
        return [_draw_triple(prg, i).of(PartyRole(role)) for i in range(count)]

    def store(self, role: PartyRole, nonce: bytes = b"", count: int = 0, batch: int = 0) -> TripleStore:
        s = TripleStore(role)
        s.provision(self.deal(role, nonce, batch, count))
        return s


class TripleStore:
    """One party's triple fragments, drawn strictly in delivery order.

    Drawing beyond what the dealer delivered is an error rather than a silent
    extension.
    """

    def __init__(self, role: PartyRole):
        self.role = role
        self._queue: list[TripleShare] = []
        self._cursor = 0

    def provision(self, shares: Sequence[TripleShare]):
        self._queue.extend(shares)

    @property
    def capacity(self) -> int:
        return len(self._queue)

    @property
    def consumed(self) -> int:
        return self._cursor

    @property
    def preprocessing_bytes(self) -> int:
        """Dealer traffic for this many triples, both parties' deliveries together."""
        return self.capacity * TRIPLE_PREPROCESSING_BYTES

    def take(self, k: int) -> list[TripleShare]:
        if self._cursor + k > self.capacity:
            raise TripleExhaustedError(
                f"need {k} triples, {self.capacity - self._cursor} provisioned left")
        out = self._queue[self._cursor:self._cursor + k]
        self._cursor += k
        return out


def beaver_open(x: Share, y: Share, t: TripleShare) -> tuple[int, int]:
    """This party's fragments of ``d = x - a`` and ``e = y - b``."""
    _check_pair_party(x, y)
    t.consume()
    return (x.fragment - t.a) & MASK, (y.fragment - t.b) & MASK


def beaver_close(role: PartyRole, d: int, e: int, t: TripleShare, scale_exp: int) -> Share:
    """Fragment of ``x*y`` given the opened ``d`` and ``e``."""
    z = t.c + d * t.b + e * t.a
    if role is PartyRole.CITIZEN:
        z += d * e
    return Share(role, z & MASK, scale_exp)


def _check_pair_party(x: Share, y: Share):
    if x.party != y.party:
        raise ValueError("cannot combine fragments held by different parties")


def mul(xs: tuple[Share, Share], ys: tuple[Share, Share], triple: BeaverTriple,
        transcript: Transcript | None = None) -> tuple[Share, Share]:
    """Beaver multiplication with both parties simulated in-process.

    ``xs``/``ys`` are (citizen, authority) pairs. One exchange round: each
    party sends its two masked fragments (32 bytes) to the other.
    """
    opened = []
    for role in PartyRole:
        x, y = xs[role], ys[role]
        if x.party is not role or y.party is not role:
            raise ValueError("share pairs must be ordered (citizen, authority)")
        opened.append(beaver_open(x, y, triple.of(role)))
    d = (opened[0][0] + opened[1][0]) & MASK
    e = (opened[0][1] + opened[1][1]) & MASK
    if transcript is not None:
        transcript.next_round()
        for role in PartyRole:
            transcript.record(role.outbound, MsgType.MUL_ROUND, 2 * ELEMENT_BYTES)
    scale = xs[0].scale_exp + ys[0].scale_exp
    return tuple(beaver_close(role, d, e, triple.of(role), scale) for role in PartyRole)


def reveal_to(pair: tuple[Share, Share], recipient: PartyRole,
              transcript: Transcript | None = None) -> FixedPoint:
    """Open a shared value to ``recipient`` only.

    The other party sends its fragment; the recipient sends nothing.
    """
    if transcript is not None:
        transcript.next_round()
        transcript.record(recipient.peer.outbound, MsgType.REVEAL, ELEMENT_BYTES)
    return reconstruct(*pair)

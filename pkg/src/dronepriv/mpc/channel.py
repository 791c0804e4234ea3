"""I/O-free party programs and the in-process driver that runs two of them.

A party is a generator that yields :class:`Send`, :class:`Recv`,
:class:`NewRound` and :class:`Preprocessing` operations and finally returns
its result. Drivers perform the operations: :func:`run_local` pairs two
generators through in-memory queues, ``netlink`` runs one generator against
a socket. Both record the same :class:`Transcript`, so in-process and wire
runs are comparable byte for byte.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Generator

from .errors import ProtocolError
from .shares import TRIPLE_PREPROCESSING_BYTES, PartyRole
from .transcript import MsgType, Transcript


@dataclass(frozen=True)
class Send:
    msg_type: MsgType
    payload: bytes


@dataclass(frozen=True)
class Recv:
    msg_type: MsgType


@dataclass(frozen=True)
class NewRound:
    pass


@dataclass(frozen=True)
class Preprocessing:
    """Ask the dealer for ``count`` triples; the reply is this party's fragments."""

    nonce: bytes
    batch: int
    count: int


NEW_ROUND = NewRound()

PartyProgram = Generator[Any, Any, Any]


def exchange(role: PartyRole, msg_type: MsgType, payload: bytes):
    """Symmetric round: citizen writes first, authority reads first.

    The fixed order keeps socket runs deadlock-free and makes both parties
    record messages in the same order.
    """
    if role is PartyRole.CITIZEN:
        yield Send(msg_type, payload)
        reply = yield Recv(msg_type)
    else:
        reply = yield Recv(msg_type)
        yield Send(msg_type, payload)
    return reply


def check_incoming(expected: MsgType, got: MsgType, payload: bytes):
    if got == MsgType.ERROR:
        raise ProtocolError("peer aborted: " + payload.decode("utf-8", "replace"))
    if got != expected:
        raise ProtocolError(f"expected {expected.name}, got {MsgType(got).name}")


def fetch_triples(dealer, role: PartyRole, op: Preprocessing, t: Transcript):
    if dealer is None:
        raise ProtocolError("party asked for triples but no dealer is attached")
    shares = dealer.deal(role, op.nonce, op.batch, op.count)
    if len(shares) != op.count:
        raise ProtocolError(f"dealer delivered {len(shares)} of {op.count} triples")
    t.preprocessing_bytes += op.count * TRIPLE_PREPROCESSING_BYTES
    return shares


@dataclass
class LocalRun:
    citizen: Any
    authority: Any
    transcript: Transcript
    authority_transcript: Transcript


def run_local(citizen: PartyProgram, authority: PartyProgram, dealer=None) -> LocalRun:
    """Drive both party programs to completion in this thread.

    ``dealer`` (a :class:`~dronepriv.mpc.shares.Dealer` or anything with the
    same ``deal`` method) answers :class:`Preprocessing` requests.
    """
    gens = {PartyRole.CITIZEN: citizen, PartyRole.AUTHORITY: authority}
    inbox = {role: deque() for role in PartyRole}
    transcripts = {role: Transcript() for role in PartyRole}
    results: dict[PartyRole, Any] = {}
    ops: dict[PartyRole, Any] = {}

    def advance(role, value=None):
        try:
            ops[role] = gens[role].send(value)
        except StopIteration as stop:
            results[role] = stop.value
            ops.pop(role, None)

    try:
        for role in PartyRole:
            advance(role)
        while len(results) < 2:
            progressed = False
            for role in PartyRole:
                while role in ops:
                    op = ops[role]
                    t = transcripts[role]
                    if isinstance(op, Send):
                        inbox[role.peer].append((op.msg_type, op.payload))
                        t.record(role.outbound, op.msg_type, len(op.payload))
                        advance(role)
                    elif isinstance(op, NewRound):
                        t.next_round()
                        advance(role)
                    elif isinstance(op, Preprocessing):
                        advance(role, fetch_triples(dealer, role, op, t))
                    elif isinstance(op, Recv):
                        if not inbox[role]:
                            break
                        msg_type, payload = inbox[role].popleft()
                        check_incoming(op.msg_type, msg_type, payload)
                        t.record(role.peer.outbound, msg_type, len(payload))
                        advance(role, payload)
                    else:
                        raise TypeError(f"unknown party operation {op!r}")
                    progressed = True
            if not progressed and len(results) < 2:
                raise ProtocolError("deadlock: both parties waiting for input")
    finally:
        for gen in gens.values():
            gen.close()
    return LocalRun(results[PartyRole.CITIZEN], results[PartyRole.AUTHORITY],
                    transcripts[PartyRole.CITIZEN], transcripts[PartyRole.AUTHORITY])

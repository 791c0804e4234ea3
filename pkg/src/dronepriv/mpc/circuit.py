"""Straight-line arithmetic circuits over shares, and their party-side evaluator.

Every wire carries a static scale exponent and a static bound on the
magnitude of its raw value. Bounds are propagated through the gates when the
circuit is built; any wire that could reach 2^126 is rejected then, so a
circuit that builds never overflows at run time provided inputs respect their
declared bounds (checked by the owning party before sharing).
"""

from __future__ import annotations

import enum
import hashlib
import struct
from dataclasses import dataclass, field

from .channel import NEW_ROUND, Recv, Send, exchange
from .errors import BoundError, ProtocolError, ScaleMismatchError
from .prg import Prg
from .ring import MASK, MAX_MAGNITUDE, FixedPoint, decode_elements, encode_elements, from_signed, to_signed
from .shares import PartyRole, TripleStore
from .transcript import MsgType


class Op(enum.IntEnum):
    INPUT = 1
    CARRY = 2
    ADD = 3
    SUB = 4
    MUL_PUBLIC = 5
    MUL = 6
    ADD_PUBLIC = 7


class Reveal(enum.IntEnum):
    CITIZEN = 0
    AUTHORITY = 1
    BOTH = 2

    def includes(self, role: PartyRole) -> bool:
        return self is Reveal.BOTH or int(self) == int(role)


@dataclass(frozen=True)
class Wire:
    id: int
    scale_exp: int
    bound: int


@dataclass(frozen=True)
class Gate:
    op: Op
    out: int
    args: tuple[int, ...] = ()
    owner: int = -1
    const: int = 0
    label: str = ""


@dataclass
class Circuit:
    wires: list[Wire] = field(default_factory=list)
    gates: list[Gate] = field(default_factory=list)
    outputs: list[tuple[int, Reveal]] = field(default_factory=list)
    depth_of: list[int] = field(default_factory=list)

    def _new(self, op, scale_exp, bound, args=(), owner=-1, const=0, label="") -> Wire:
        if bound >= MAX_MAGNITUDE:
            raise BoundError(f"wire {label or len(self.wires)} may reach 2^{bound.bit_length() - 1}")
        w = Wire(len(self.wires), scale_exp, bound)
        self.wires.append(w)
        self.gates.append(Gate(op, w.id, tuple(args), owner, const, label))
        if op is Op.MUL:
            depth = 1 + max(self.depth_of[a] for a in args)
        else:
            depth = max((self.depth_of[a] for a in args), default=0)
        self.depth_of.append(depth)
        return w

    def input(self, owner: PartyRole, scale_exp: int, bound: int, label: str = "") -> Wire:
        return self._new(Op.INPUT, scale_exp, bound, owner=int(owner), label=label)

    def carry(self, scale_exp: int, bound: int, label: str = "") -> Wire:
        """A wire whose fragments both parties already hold from an earlier run."""
        return self._new(Op.CARRY, scale_exp, bound, label=label)

    def add(self, x: Wire, y: Wire, label: str = "") -> Wire:
        self._same_scale(x, y)
        return self._new(Op.ADD, x.scale_exp, x.bound + y.bound, (x.id, y.id), label=label)

    def sub(self, x: Wire, y: Wire, label: str = "") -> Wire:
        self._same_scale(x, y)
        return self._new(Op.SUB, x.scale_exp, x.bound + y.bound, (x.id, y.id), label=label)

    def add_public(self, x: Wire, c: int, label: str = "") -> Wire:
        """Add a public raw constant already at ``x``'s scale."""
        return self._new(Op.ADD_PUBLIC, x.scale_exp, x.bound + abs(c), (x.id,), const=c, label=label)

    def mul_public(self, x: Wire, c: int, c_scale: int = 0, label: str = "") -> Wire:
        """Multiply by the public value ``c / 2^c_scale``; scales add."""
        return self._new(Op.MUL_PUBLIC, x.scale_exp + c_scale, x.bound * abs(c), (x.id,),
                         const=c, label=label)

    def mul(self, x: Wire, y: Wire, label: str = "") -> Wire:
        return self._new(Op.MUL, x.scale_exp + y.scale_exp, x.bound * y.bound, (x.id, y.id),
                         label=label)

    def reveal(self, x: Wire, to: Reveal):
        self.outputs.append((x.id, Reveal(to)))

    @staticmethod
    def _same_scale(x: Wire, y: Wire):
        if x.scale_exp != y.scale_exp:
            raise ScaleMismatchError(f"wires {x.id} (2^{x.scale_exp}) and {y.id} (2^{y.scale_exp})")

    # -- static properties -------------------------------------------------

    @property
    def mul_count(self) -> int:
        return sum(1 for g in self.gates if g.op is Op.MUL)

    @property
    def depth(self) -> int:
        return max(self.depth_of, default=0)

    def inputs_of(self, role: PartyRole) -> list[Gate]:
        return [g for g in self.gates if g.op is Op.INPUT and g.owner == int(role)]

    def mul_layers(self) -> list[int]:
        """Multiplication count per communication layer."""
        counts = [0] * self.depth
        for g in self.gates:
            if g.op is Op.MUL:
                counts[self.depth_of[g.out] - 1] += 1
        return counts

    def to_bytes(self) -> bytes:
        parts = [struct.pack("<III", len(self.wires), len(self.gates), len(self.outputs))]
        for g in self.gates:
            w = self.wires[g.out]
            label = g.label.encode()
            parts.append(struct.pack("<BIBbiH", g.op, g.out, len(g.args), g.owner,
                                     w.scale_exp, len(label)))
            parts.append(struct.pack(f"<{len(g.args)}I", *g.args))
            parts.append(from_signed(g.const).to_bytes(16, "little"))
            parts.append(w.bound.to_bytes(16, "little"))
            parts.append(label)
        for wire_id, to in self.outputs:
            parts.append(struct.pack("<IB", wire_id, to))
        return b"".join(parts)

    def digest(self) -> str:
        return hashlib.sha256(self.to_bytes()).hexdigest()


@dataclass
class EvalResult:
    outputs: dict[int, FixedPoint]
    fragments: list[int | None]


def evaluate(circuit: Circuit, role: PartyRole, inputs: dict[int, int], triples: TripleStore,
             rng: Prg, carried: dict[int, int] | None = None):
    """Party program evaluating ``circuit`` (use with ``yield from``).

    ``inputs`` maps this party's input wire ids to signed raw values;
    ``carried`` maps carry wire ids to fragments held from a previous run.
    Returns an :class:`EvalResult` with the outputs revealed to this party.
    """
    carried = carried or {}
    vals: list[int | None] = [None] * len(circuit.wires)

    mine = circuit.inputs_of(role)
    theirs = circuit.inputs_of(role.peer)
    if set(inputs) != {g.out for g in mine}:
        raise ProtocolError(f"{role.name} inputs do not match the circuit's input wires")
    outgoing = []
    for g in mine:
        raw = inputs[g.out]
        if abs(raw) > circuit.wires[g.out].bound:
            raise BoundError(f"input {g.label or g.out} = {raw} exceeds bound "
                             f"{circuit.wires[g.out].bound}")
        r = rng.ring_element()
        outgoing.append(r)
        vals[g.out] = (raw - r) & MASK
    for g in circuit.gates:
        if g.op is Op.CARRY:
            if g.out not in carried:
                raise ProtocolError(f"carry wire {g.out} has no fragment")
            vals[g.out] = carried[g.out] & MASK

    if mine or theirs:
        yield NEW_ROUND
        reply = yield from exchange(role, MsgType.INPUT_SHARE_BATCH, encode_elements(outgoing))
        peer_frags = decode_elements(reply)
        if len(peer_frags) != len(theirs):
            raise ProtocolError(f"expected {len(theirs)} input fragments, got {len(peer_frags)}")
        for g, frag in zip(theirs, peer_frags):
            vals[g.out] = frag

    depth_of = circuit.depth_of
    citizen = role is PartyRole.CITIZEN
    for level in range(circuit.depth + 1):
        pending = []
        for g in circuit.gates:
            d = depth_of[g.out]
            if g.op is Op.MUL:
                if d == level + 1:
                    pending.append(g)
                continue
            if d != level or g.op in (Op.INPUT, Op.CARRY):
                continue
            if g.op is Op.ADD:
                vals[g.out] = (vals[g.args[0]] + vals[g.args[1]]) & MASK
            elif g.op is Op.SUB:
                vals[g.out] = (vals[g.args[0]] - vals[g.args[1]]) & MASK
            elif g.op is Op.MUL_PUBLIC:
                vals[g.out] = (vals[g.args[0]] * g.const) & MASK
            elif g.op is Op.ADD_PUBLIC:
                vals[g.out] = (vals[g.args[0]] + (g.const if citizen else 0)) & MASK
        if not pending:
            continue
        batch = triples.take(len(pending))
        opened = []
        for g, t in zip(pending, batch):
            t.consume()
            opened.append((vals[g.args[0]] - t.a) & MASK)
            opened.append((vals[g.args[1]] - t.b) & MASK)
        yield NEW_ROUND
        reply = yield from exchange(role, MsgType.MUL_ROUND, encode_elements(opened))
        peer_open = decode_elements(reply)
        if len(peer_open) != len(opened):
            raise ProtocolError(f"expected {len(opened)} masked fragments, got {len(peer_open)}")
        for i, (g, t) in enumerate(zip(pending, batch)):
            d = (opened[2 * i] + peer_open[2 * i]) & MASK
            e = (opened[2 * i + 1] + peer_open[2 * i + 1]) & MASK
            z = t.c + d * t.b + e * t.a
            if citizen:
                z += d * e
            vals[g.out] = z & MASK

    outputs: dict[int, FixedPoint] = {}
    if circuit.outputs:
        to_peer = [w for w, to in circuit.outputs if to.includes(role.peer)]
        to_me = [w for w, to in circuit.outputs if to.includes(role)]
        yield NEW_ROUND
        sends = [Send(MsgType.REVEAL, encode_elements(vals[w] for w in to_peer))] if to_peer else []
        recvs = [Recv(MsgType.REVEAL)] if to_me else []
        # citizen writes first, authority reads first
        ordered = sends + recvs if citizen else recvs + sends
        peer_frags = None
        for op in ordered:
            got = yield op
            if isinstance(op, Recv):
                peer_frags = decode_elements(got)
        if to_me:
            if len(peer_frags) != len(to_me):
                raise ProtocolError(f"expected {len(to_me)} output fragments, got {len(peer_frags)}")
            for w, frag in zip(to_me, peer_frags):
                outputs[w] = FixedPoint((vals[w] + frag) & MASK, circuit.wires[w].scale_exp)
    return EvalResult(outputs, vals)


def plaintext_evaluate(circuit: Circuit, inputs: dict[int, int],
                       carried: dict[int, int] | None = None) -> list[int]:
    """Reference evaluation of every wire, as signed integers (no ring wrap)."""
    carried = carried or {}
    vals: list[int] = [0] * len(circuit.wires)
    for g in circuit.gates:
        if g.op is Op.INPUT:
            vals[g.out] = inputs[g.out]
        elif g.op is Op.CARRY:
            vals[g.out] = to_signed(carried[g.out])
        elif g.op is Op.ADD:
            vals[g.out] = vals[g.args[0]] + vals[g.args[1]]
        elif g.op is Op.SUB:
            vals[g.out] = vals[g.args[0]] - vals[g.args[1]]
        elif g.op is Op.MUL_PUBLIC:
            vals[g.out] = vals[g.args[0]] * g.const
        elif g.op is Op.ADD_PUBLIC:
            vals[g.out] = vals[g.args[0]] + g.const
        elif g.op is Op.MUL:
            vals[g.out] = vals[g.args[0]] * vals[g.args[1]]
    return vals

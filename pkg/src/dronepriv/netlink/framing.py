"""Length-prefixed binary frames: 4-byte big-endian length, 1-byte type, payload."""

from __future__ import annotations

import struct
from dataclasses import dataclass

from ..mpc.errors import ProtocolError
from ..mpc.transcript import MsgType

HEADER = struct.Struct(">IB")
FRAME_OVERHEAD = HEADER.size
MAX_PAYLOAD = 64 << 20

KNOWN_TYPES = frozenset(int(t) for t in MsgType)


class FrameError(ProtocolError):
    """Malformed, oversized or unknown-type frame."""


class UnknownMessageType(FrameError):
    def __init__(self, code: int):
        super().__init__(f"unknown message type 0x{code:02x}")
        self.code = code


class FrameTooLarge(FrameError):
    pass


@dataclass(frozen=True)
class Frame:
    msg_type: MsgType
    payload: bytes

    def encode(self) -> bytes:
        return encode_frame(self.msg_type, self.payload)


def encode_frame(msg_type: int, payload: bytes, max_payload: int = MAX_PAYLOAD,
                 known: frozenset = KNOWN_TYPES) -> bytes:
    if int(msg_type) not in known:
        raise UnknownMessageType(int(msg_type))
    if len(payload) > max_payload:
        raise FrameTooLarge(f"payload of {len(payload)} bytes exceeds {max_payload}")
    return HEADER.pack(len(payload), int(msg_type)) + payload


def parse_header(header: bytes, max_payload: int = MAX_PAYLOAD,
                 known: frozenset = KNOWN_TYPES) -> tuple[int, int]:
    """Validate a 5-byte header; returns (payload length, type code)."""
    length, code = HEADER.unpack(header)
    if length > max_payload:
        raise FrameTooLarge(f"announced payload of {length} bytes exceeds {max_payload}")
    if code not in known:
        raise UnknownMessageType(code)
    return length, code


def decode_frame(buf: bytes, max_payload: int = MAX_PAYLOAD) -> tuple[Frame, int] | None:
    """Decode one frame from the front of ``buf``.

    Returns ``(frame, consumed)``, or ``None`` if ``buf`` holds only part of
    a frame.
    """
    if len(buf) < FRAME_OVERHEAD:
        return None
    length, code = parse_header(buf[:FRAME_OVERHEAD], max_payload)
    end = FRAME_OVERHEAD + length
    if len(buf) < end:
        return None
    return Frame(MsgType(code), bytes(buf[FRAME_OVERHEAD:end])), end


def error_frame(reason: str) -> bytes:
    return encode_frame(MsgType.ERROR, reason.encode("utf-8", "replace")[:1024])

"""Byte-exact accounting of everything two parties exchange in a session."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Direction(enum.Enum):
    C2A = "c2a"
    A2C = "a2c"


class MsgType(enum.IntEnum):
    HELLO = 0x01
    THETAS_IDS = 0x02
    INPUT_SHARE_BATCH = 0x03
    MUL_ROUND = 0x04
    REVEAL = 0x05
    BYE = 0x06
    ERROR = 0x7F


@dataclass(frozen=True)
class MessageRecord:
    direction: Direction
    msg_type: MsgType
    size: int
    round: int


@dataclass
class Transcript:
    c2a_bytes: int = 0
    a2c_bytes: int = 0
    rounds: int = 0
    messages: list[MessageRecord] = field(default_factory=list)
    preprocessing_bytes: int = 0

    def next_round(self):
        self.rounds += 1

    def record(self, direction: Direction, msg_type: MsgType, size: int):
        if size < 0:
            raise ValueError("negative message size")
        if direction is Direction.C2A:
            self.c2a_bytes += size
        else:
            self.a2c_bytes += size
        self.messages.append(MessageRecord(direction, MsgType(msg_type), size, self.rounds))

    @property
    def total_bytes(self) -> int:
        return self.c2a_bytes + self.a2c_bytes

    def sizes(self, direction: Direction) -> list[int]:
        return [m.size for m in self.messages if m.direction is direction]

    def shape(self) -> tuple:
        """Everything observable about the session except payload contents."""
        return (self.rounds,
                tuple((m.direction.value, int(m.msg_type), m.size, m.round) for m in self.messages))

    def count(self, msg_type: MsgType, direction: Direction | None = None) -> int:
        return sum(1 for m in self.messages
                   if m.msg_type == msg_type and (direction is None or m.direction is direction))

    def bytes_of(self, msg_type: MsgType, direction: Direction | None = None) -> int:
        return sum(m.size for m in self.messages
                   if m.msg_type == msg_type and (direction is None or m.direction is direction))

    def summary(self) -> dict:
        return {
            "total_bytes": self.total_bytes,
            "c2a_bytes": self.c2a_bytes,
            "a2c_bytes": self.a2c_bytes,
            "rounds": self.rounds,
            "messages": len(self.messages),
            "preprocessing_bytes": self.preprocessing_bytes,
        }

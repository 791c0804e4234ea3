"""Arithmetic in Z/2^128 and the fixed-point encoding layered on top.

Values are plain Python ints in ``[0, 2^128)``. Signed meaning comes from
two's-complement decoding. A :class:`FixedPoint` carries a static scale
exponent; multiplication adds exponents and nothing is ever truncated, so
callers keep magnitudes below :data:`MAX_MAGNITUDE` (see ``circuit.py`` for
the static bound tracking).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import BoundError, ProtocolError

RING_BITS = 128
MOD = 1 << RING_BITS
MASK = MOD - 1
ELEMENT_BYTES = RING_BITS // 8

# |signed(raw)| must stay strictly below this at every wire
MAX_MAGNITUDE = 1 << 126


def to_signed(v: int) -> int:
    v &= MASK
    return v - MOD if v >> (RING_BITS - 1) else v


def from_signed(x: int) -> int:
    return x & MASK


def encode_elements(values) -> bytes:
    return b"".join((v & MASK).to_bytes(ELEMENT_BYTES, "little") for v in values)


def decode_elements(data: bytes) -> list[int]:
    if len(data) % ELEMENT_BYTES:
        raise ProtocolError(f"payload of {len(data)} bytes is not a whole number of ring elements")
    return [int.from_bytes(data[i:i + ELEMENT_BYTES], "little")
            for i in range(0, len(data), ELEMENT_BYTES)]


@dataclass(frozen=True)
class FixedPoint:
    raw: int
    scale_exp: int

    def __post_init__(self):
        object.__setattr__(self, "raw", self.raw & MASK)

    @property
    def signed(self) -> int:
        return to_signed(self.raw)

    def __float__(self) -> float:
        return fx_decode(self)

    def exact(self) -> Fraction:
        return Fraction(self.signed, 1 << self.scale_exp) if self.scale_exp >= 0 \
            else Fraction(self.signed * (1 << -self.scale_exp))


def round_half_away(x: float) -> int:
    """Round a finite float to the nearest int, ties away from zero."""
    mag = abs(x)
    n = math.floor(mag)
    if mag - n >= 0.5:
        n += 1
    return -int(n) if x < 0 else int(n)


def scaled_int(value, scale_exp: int) -> int:
    """``round(value * 2^scale_exp)`` with ties away from zero, exactly."""
    if isinstance(value, int):
        if scale_exp >= 0:
            return value << scale_exp
        value = Fraction(value)
    if isinstance(value, Fraction):
        f = value * Fraction(2) ** scale_exp
        mag = abs(f)
        n = mag.numerator // mag.denominator
        if mag - n >= Fraction(1, 2):
            n += 1
        return -n if f < 0 else n
    value = float(value)
    if not math.isfinite(value):
        raise BoundError(f"cannot encode non-finite value {value}")
    scaled = math.ldexp(value, scale_exp)
    if not math.isfinite(scaled):
        raise BoundError(f"{value} * 2^{scale_exp} overflows")
    return round_half_away(scaled)


def fx_encode(value, scale_exp: int) -> FixedPoint:
    n = scaled_int(value, scale_exp)
    if abs(n) >= MAX_MAGNITUDE:
        raise BoundError(f"{value} at scale 2^{scale_exp} exceeds 2^126")
    return FixedPoint(from_signed(n), scale_exp)


def fx_decode(fp: FixedPoint) -> float:
    s = fp.signed
    if fp.scale_exp >= 0:
        return s / (1 << fp.scale_exp)
    return float(s * (1 << -fp.scale_exp))

"""Seedable cryptographic PRNG (BLAKE2b keyed in counter mode)."""

from __future__ import annotations

import hashlib
import secrets

from .ring import ELEMENT_BYTES


def _seed_bytes(seed) -> bytes:
    if seed is None:
        return secrets.token_bytes(32)
    if isinstance(seed, bytes):
        return hashlib.blake2b(seed, digest_size=32, person=b"dronepriv-seed").digest()
    if isinstance(seed, int):
        return _seed_bytes(seed.to_bytes((seed.bit_length() + 8) // 8 or 1, "little", signed=True))
    if isinstance(seed, str):
        return _seed_bytes(seed.encode())
    raise TypeError(f"unsupported seed type {type(seed).__name__}")


class Prg:
    """Deterministic byte stream; ``Prg(None)`` draws a fresh OS seed."""

    _BLOCK = 64

    def __init__(self, seed=None):
        self._key = _seed_bytes(seed)
        self._counter = 0
        self._buf = b""

    def fork(self, label: str) -> Prg:
        """Independent child stream, e.g. one per party or per session."""
        return Prg(self._key + b"/" + label.encode())

    def bytes(self, n: int) -> bytes:
        while len(self._buf) < n:
            need = max(n - len(self._buf), 4096)
            blocks = []
            for _ in range(-(-need // self._BLOCK)):
                blocks.append(hashlib.blake2b(self._counter.to_bytes(16, "little"),
                                              key=self._key).digest())
                self._counter += 1
            self._buf += b"".join(blocks)
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def ring_element(self) -> int:
        return int.from_bytes(self.bytes(ELEMENT_BYTES), "little")

    def ring_elements(self, k: int) -> list[int]:
        data = self.bytes(k * ELEMENT_BYTES)
        return [int.from_bytes(data[i:i + ELEMENT_BYTES], "little")
                for i in range(0, len(data), ELEMENT_BYTES)]

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("upper bound must be positive")
        nbytes = (n.bit_length() + 7) // 8 + 1
        limit = (1 << (8 * nbytes)) // n * n
        while True:
            v = int.from_bytes(self.bytes(nbytes), "little")
            if v < limit:
                return v % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi)``."""
        return lo + self.randbelow(hi - lo)

    def random(self) -> float:
        return (int.from_bytes(self.bytes(8), "little") >> 11) / float(1 << 53)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

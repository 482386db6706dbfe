"""Deterministic byte stream for reproducible fixtures and benchmarks.

Production code paths default to ``secrets.token_bytes``; a ``Drbg`` is
injected wherever tests or the benchmark harness need replayable
randomness. The stream is SHAKE256 in counter mode over the seed.
"""

from __future__ import annotations

import hashlib
import struct


class Drbg:
    """Callable entropy source: ``drbg(n)`` yields the next n bytes."""

    _BLOCK = 64

    def __init__(self, seed: bytes | str | int):
        if isinstance(seed, int):
            seed = seed.to_bytes(8, "big", signed=False)
        elif isinstance(seed, str):
            seed = seed.encode()
        self._seed = bytes(seed)
        self._counter = 0
        self._buf = b""

    def __call__(self, n: int) -> bytes:
        while len(self._buf) < n:
            block = hashlib.shake_256(
                self._seed + struct.pack(">Q", self._counter)
            ).digest(self._BLOCK)
            self._counter += 1
            self._buf += block
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

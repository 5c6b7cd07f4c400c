"""Keyed deterministic byte stream.

Every "random" element of a converter is drawn from a stream seeded by the
server master key and the account context, so the server can rebuild the
exact same converter when a user logs in.

Seeding::

    seed    = HMAC-SHA256(master_key, encode(ctx))
    block_i = HMAC-SHA256(seed, i as 8-byte big-endian), i = 0, 1, 2, ...

``encode`` writes each context field as a 4-byte big-endian length followed
by the field bytes, in the order nonce, kind, credential, imei, imsi, attempt.
"""

from __future__ import annotations

import hashlib
import hmac
import os
import struct
from dataclasses import dataclass
from enum import Enum

from trident.errors import DerivationExhausted

MAX_ATTEMPTS = 64
KEY_ENV = "TRIDENT_MASTER_KEY"


class Kind(str, Enum):
    LN = "LN"
    LP = "LP"
    AP = "AP"


@dataclass(frozen=True)
class MasterKey:
    """32-byte server secret. Never written to the credential store."""

    key: bytes

    def __post_init__(self) -> None:
        if not isinstance(self.key, bytes) or len(self.key) != 32:
            raise ValueError("master key must be exactly 32 bytes")

    def __repr__(self) -> str:
        return "MasterKey(<redacted>)"

    @classmethod
    def from_hex(cls, text: str) -> MasterKey:
        text = text.strip()
        if len(text) != 64:
            raise ValueError("master key must be 64 hex characters")
        try:
            raw = bytes.fromhex(text)
        except ValueError:
            raise ValueError("master key is not valid hex") from None
        return cls(raw)

    @classmethod
    def from_env(cls, environ: dict[str, str] | None = None) -> MasterKey:
        env = os.environ if environ is None else environ
        value = env.get(KEY_ENV)
        if not value:
            raise ValueError(f"{KEY_ENV} is not set")
        return cls.from_hex(value)


@dataclass(frozen=True)
class StreamContext:
    nonce: bytes
    kind: Kind
    credential: str
    imei: str
    imsi: str
    attempt: int = 0

    def encode(self) -> bytes:
        attempt = struct.pack(">I", self.attempt)
        fields = (
            self.nonce,
            Kind(self.kind).value.encode("ascii"),
            self.credential.encode("utf-8"),
            self.imei.encode("utf-8"),
            self.imsi.encode("utf-8"),
            attempt,
        )
        return b"".join(struct.pack(">I", len(f)) + f for f in fields)


class Stream:
    """Counter-mode HMAC-SHA256 expander. Single owner; not thread-safe."""

    def __init__(self, seed: bytes) -> None:
        self._seed = seed
        self._counter = 0
        self._buf = b""
        self._pos = 0
        self.consumed = 0

    def fork(self) -> Stream:
        """Independent copy positioned at the same offset."""
        other = Stream(self._seed)
        other._counter = self._counter
        other._buf = self._buf
        other._pos = self._pos
        other.consumed = self.consumed
        return other

    def _refill(self) -> None:
        block = hmac.new(self._seed, self._counter.to_bytes(8, "big"), hashlib.sha256).digest()
        self._counter += 1
        self._buf = self._buf[self._pos:] + block
        self._pos = 0

    def read(self, n: int) -> bytes:
        while len(self._buf) - self._pos < n:
            self._refill()
        out = self._buf[self._pos:self._pos + n]
        self._pos += n
        self.consumed += n
        return out

    def next_uint(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi]``.

        Reads the fewest whole bytes that can express ``hi - lo`` and rejects
        values at or above the largest multiple of the range width.
        """
        if lo > hi:
            raise ValueError(f"empty range [{lo}, {hi}]")
        width = hi - lo + 1
        if width == 1:
            return lo
        nbytes = ((width - 1).bit_length() + 7) // 8
        space = 1 << (8 * nbytes)
        limit = space - space % width
        while True:
            v = int.from_bytes(self.read(nbytes), "big")
            if v < limit:
                return lo + v % width

    def next_char(self, charset: str) -> str:
        if not charset:
            raise ValueError("charset must be non-empty")
        return charset[self.next_uint(0, len(charset) - 1)]


def new_stream(key: MasterKey, ctx: StreamContext) -> Stream:
    if ctx.attempt < 0:
        raise ValueError("attempt must be non-negative")
    if ctx.attempt >= MAX_ATTEMPTS:
        raise DerivationExhausted(f"attempt {ctx.attempt} >= {MAX_ATTEMPTS}")
    seed = hmac.new(key.key, ctx.encode(), hashlib.sha256).digest()
    return Stream(seed)

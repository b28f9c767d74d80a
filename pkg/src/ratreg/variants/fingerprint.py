"""Fingerprints of (value, timestamp) pairs for the hash variant."""

import hashlib
from collections.abc import Callable
from enum import Enum

from ..register.messages import RegisterValue, Timestamp

FingerprintFn = Callable[[RegisterValue, Timestamp], bytes]


def encode_fingerprint(value: RegisterValue, ts: Timestamp) -> bytes:
    """Injective length-prefixed encoding; transparent in traces and tests."""
    body = f"{type(value).__name__}:{value}"
    return f"{len(body)}:{body}|{ts}".encode()


def sha256_fingerprint(value: RegisterValue, ts: Timestamp) -> bytes:
    """32-byte digest of the injective encoding."""
    return hashlib.sha256(encode_fingerprint(value, ts)).digest()


class FingerprintKind(str, Enum):
    SHA256 = "sha256"
    ENCODED = "encoded"

    @property
    def fn(self) -> FingerprintFn:
        return sha256_fingerprint if self is FingerprintKind.SHA256 else encode_fingerprint

"""Protocol variants: collaborative witnesses and fingerprints."""

from .coin import Coin
from .collaborative import WitnessPort, cv_read_fallback, should_vouch, witness_cross_check
from .fingerprint import FingerprintFn, FingerprintKind, encode_fingerprint, sha256_fingerprint
from .hashing import KNOWN_WINDOW, HashVerification, hash_read_verify, hash_write_decorate, refresh_known

__all__ = [
    "Coin",
    "FingerprintFn",
    "FingerprintKind",
    "HashVerification",
    "KNOWN_WINDOW",
    "WitnessPort",
    "cv_read_fallback",
    "encode_fingerprint",
    "hash_read_verify",
    "hash_write_decorate",
    "refresh_known",
    "sha256_fingerprint",
    "should_vouch",
    "witness_cross_check",
]

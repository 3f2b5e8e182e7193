"""Keyed one-way hashing, pseudonym material, and MAC-style signatures.

Identity projection works in two stages: hashing a pseudonym with the
globally distributed key yields the roadside-visible digest, and hashing
that digest again with the authority-held key yields the digest only the
issuing authority can compute.  Detection groups are short bit fields
selected from the two digests, so roadside units learn a lossy projection
while the authority can resolve ownership.

Signatures here are deterministic keyed-hash tags (HMAC-SHA1) checked
against a directory of registered signer secrets; real asymmetric
credentials are out of scope for the simulation.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidKeyError, SelectorRangeError, UnknownSignerError

DIGEST_BYTES = 20
DIGEST_BITS = DIGEST_BYTES * 8
KEY_BYTES = 32
PSEUDONYM_BYTES = 16

# Default bit-field selectors: the coarse field is the low-order byte of the
# first-stage digest, the fine field sits just above it in the second-stage
# digest so the two selectors never overlap positionally.
COARSE_BITS = 8
FINE_BITS = 16


class KeyRole(Enum):
    """What a hash key is allowed to be used for."""

    GLOBAL_COARSE = "global_coarse"
    DMV_FINE = "dmv_fine"


@dataclass(frozen=True)
class HashKey:
    role: KeyRole
    secret: bytes


@dataclass(frozen=True, order=True)
class Pseudonym:
    """Opaque byte string a vehicle signs beacons with."""

    data: bytes

    @property
    def width(self) -> int:
        return len(self.data)

    def hex(self) -> str:
        return self.data.hex()

    @classmethod
    def from_hex(cls, text: str) -> "Pseudonym":
        return cls(bytes.fromhex(text))


def keyed_hash(key: HashKey, data: bytes) -> bytes:
    """SHA-1 digest of key material prepended to the payload."""
    if not key.secret:
        raise InvalidKeyError("hash key has no secret bytes")
    return hashlib.sha1(key.secret + data).digest()


def extract_bits(digest: bytes, offset: int, width: int) -> int:
    """Bit field [offset, offset + width) of the digest.

    Bit 0 is the lowest-order bit of the digest interpreted as a big-endian
    integer, i.e. a digest ending in byte 0x2A has extract_bits(d, 0, 8) == 42.
    """
    if width < 1 or offset < 0 or offset + width > len(digest) * 8:
        raise SelectorRangeError(
            f"selector [{offset}, {offset + width}) does not fit a "
            f"{len(digest) * 8}-bit digest"
        )
    return (int.from_bytes(digest, "big") >> offset) & ((1 << width) - 1)


def extract_coarse(digest: bytes, width: int = COARSE_BITS, offset: int = 0) -> int:
    return extract_bits(digest, offset, width)


def extract_fine(digest: bytes, width: int = FINE_BITS, offset: int = COARSE_BITS) -> int:
    return extract_bits(digest, offset, width)


def _require_role(key: HashKey, role: KeyRole, what: str) -> None:
    if key.role is not role:
        raise InvalidKeyError(f"{what} requires a {role.value} key, got {key.role.value}")


def coarse_value(coarse_key: HashKey, pseudonym: Pseudonym, width: int = COARSE_BITS) -> int:
    """Roadside-computable group value of a pseudonym."""
    _require_role(coarse_key, KeyRole.GLOBAL_COARSE, "coarse_value")
    return extract_coarse(keyed_hash(coarse_key, pseudonym.data), width)


def fine_value(
    coarse_key: HashKey,
    fine_key: HashKey,
    pseudonym: Pseudonym,
    width: int = FINE_BITS,
    offset: int | None = None,
) -> int:
    """Authority-only group value: second-stage digest over the first digest.

    The fine selector starts where the coarse selector ends unless an
    explicit offset is given.
    """
    _require_role(coarse_key, KeyRole.GLOBAL_COARSE, "fine_value")
    _require_role(fine_key, KeyRole.DMV_FINE, "fine_value")
    first = keyed_hash(coarse_key, pseudonym.data)
    second = keyed_hash(fine_key, first)
    return extract_fine(second, width, COARSE_BITS if offset is None else offset)


# ---------------------------------------------------------------------------
# MAC-style signatures with a registered-signer directory
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SignatureKeyPair:
    signer_id: str
    secret: bytes


def sign(keypair: SignatureKeyPair, message: bytes) -> bytes:
    """Deterministic keyed-hash tag over the message."""
    if not keypair.secret:
        raise InvalidKeyError(f"signer {keypair.signer_id!r} has an empty secret")
    return hmac.new(keypair.secret, message, hashlib.sha1).digest()


class SignerDirectory:
    """Authority-owned registry of signer secrets.

    Verification looks the signer up here, so only registered parties can
    produce tags that check out.
    """

    def __init__(self) -> None:
        self._secrets: dict[str, bytes] = {}

    def register(self, signer_id: str, secret: bytes) -> SignatureKeyPair:
        if not secret:
            raise InvalidKeyError(f"refusing to register empty secret for {signer_id!r}")
        self._secrets[signer_id] = secret
        return SignatureKeyPair(signer_id, secret)

    def is_registered(self, signer_id: str) -> bool:
        return signer_id in self._secrets

    def signers(self) -> list[str]:
        return sorted(self._secrets)

    def verify(self, signer_id: str, message: bytes, signature: bytes) -> bool:
        try:
            secret = self._secrets[signer_id]
        except KeyError:
            raise UnknownSignerError(f"no registered signer {signer_id!r}") from None
        expected = hmac.new(secret, message, hashlib.sha1).digest()
        return hmac.compare_digest(expected, signature)

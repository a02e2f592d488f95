"""Hash constructions, signatures, and randomness.

Every protocol hash is domain separated by a single leading tag byte,
so no two usages can collide on raw input material:

    0x01  token derivation          H(0x01 || seed || LE64(e))
    0x02  challenge binding         H(0x02 || LE32(|c|) || c || nonce)
    0x03  credential digest         H(0x03 || seed || claims_digest || LE64(exp))
    0x04  claims root               H(0x04 || d_0 || ... || d_n-1)
    0x05  per-claim digest          H(0x05 || LE32(j) || label_j || 0x00 || value_j)
    0x06  registry record digest    H(0x06 || record body)

The hash is SHA-256 by default; hash_id exists so a circuit-friendly
hash can be swapped in. Signatures are Ed25519 by default and always
sign a 32-byte digest, never raw messages.
"""

from __future__ import annotations

import hashlib
import hmac as _hmac
import random as _random
import secrets
from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.serialization import (
    Encoding,
    NoEncryption,
    PrivateFormat,
    PublicFormat,
)

from .encoding import u32, u64
from .errors import InvalidKey, RandomnessUnavailable, UnsupportedConfig
from .types import Claims, DIGEST_LEN, SecurityParams

TAG_TOKEN = b"\x01"
TAG_BIND = b"\x02"
TAG_CREDENTIAL = b"\x03"
TAG_CLAIMS_ROOT = b"\x04"
TAG_CLAIM = b"\x05"
TAG_RECORD = b"\x06"

_HASHES = {
    "sha256": hashlib.sha256,
}


def get_hash(hash_id: str):
    """Return the raw digest function for hash_id.

    Only 32-byte-output hashes are admissible; everything downstream
    (tokens, digests, MAC keys) assumes that width.
    """
    try:
        ctor = _HASHES[hash_id]
    except KeyError:
        raise UnsupportedConfig(f"unknown hash: {hash_id}") from None
    if ctor().digest_size != DIGEST_LEN:
        raise UnsupportedConfig(f"hash {hash_id} does not produce {DIGEST_LEN} bytes")

    def digest(data: bytes) -> bytes:
        return ctor(data).digest()

    return digest


def hash_token(seed: bytes, e: int, hash_id: str = "sha256") -> bytes:
    """Epoch-bound token for a credential seed. Deterministic in
    (seed, e); infeasible to link across epochs without the seed."""
    return get_hash(hash_id)(TAG_TOKEN + seed + u64(e))


def hash_bind(challenge: bytes, nonce: bytes, hash_id: str = "sha256") -> bytes:
    """Binding of a verifier challenge to a fresh holder nonce. The
    challenge is length-prefixed so (challenge, nonce) splits are
    unambiguous."""
    return get_hash(hash_id)(TAG_BIND + u32(len(challenge)) + challenge + nonce)


def per_claim_digest(index: int, label: str, value: bytes, hash_id: str = "sha256") -> bytes:
    """Digest of one claim at its issuance position."""
    return get_hash(hash_id)(
        TAG_CLAIM + u32(index) + label.encode("utf-8") + b"\x00" + value
    )


def claims_root(digests, hash_id: str = "sha256") -> bytes:
    """Root digest over per-claim digests, in claim order."""
    return get_hash(hash_id)(TAG_CLAIMS_ROOT + b"".join(digests))


def hash_claims(claims: Claims, hash_id: str = "sha256") -> tuple[bytes, tuple[bytes, ...]]:
    """Per-claim digests plus their root. The root is what the issuer
    signs and what proofs expose; individual digests support selective
    disclosure."""
    digests = tuple(
        per_claim_digest(j, label, value, hash_id)
        for j, (label, value) in enumerate(claims.entries)
    )
    return claims_root(digests, hash_id), digests


def credential_digest(seed: bytes, claims_digest: bytes, exp: int, hash_id: str = "sha256") -> bytes:
    """Digest the issuer signs at issuance, binding seed, claims root,
    and expiration epoch."""
    return get_hash(hash_id)(TAG_CREDENTIAL + seed + claims_digest + u64(exp))


def record_digest(body: bytes, hash_id: str = "sha256") -> bytes:
    """Digest of a registry record body for signing."""
    return get_hash(hash_id)(TAG_RECORD + body)


def constant_time_eq(a: bytes, b: bytes) -> bool:
    return _hmac.compare_digest(a, b)


class SystemRandom:
    """Entropy from the operating system."""

    def randbytes(self, n: int) -> bytes:
        try:
            return secrets.token_bytes(n)
        except (OSError, NotImplementedError) as exc:
            raise RandomnessUnavailable(str(exc)) from exc


class SeededRandom:
    """Deterministic byte source for tests, games, and reproducible CLI
    runs. Never use for real key material."""

    def __init__(self, seed: int):
        self._rng = _random.Random(seed)

    def randbytes(self, n: int) -> bytes:
        return self._rng.randbytes(n)


SECURE_RANDOM = SystemRandom()


@dataclass(frozen=True)
class KeyPair:
    sk: bytes
    pk: bytes


class _Ed25519:
    name = "ed25519"
    sk_len = 32
    pk_len = 32

    @staticmethod
    def keypair_from_secret(secret: bytes) -> KeyPair:
        if len(secret) != 32:
            raise InvalidKey("ed25519 secret must be 32 bytes")
        priv = Ed25519PrivateKey.from_private_bytes(secret)
        pk = priv.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
        sk = priv.private_bytes(Encoding.Raw, PrivateFormat.Raw, NoEncryption())
        return KeyPair(sk=sk, pk=pk)

    @staticmethod
    def sign(sk: bytes, message: bytes) -> bytes:
        if len(sk) != 32:
            raise InvalidKey("ed25519 secret must be 32 bytes")
        return Ed25519PrivateKey.from_private_bytes(sk).sign(message)

    @staticmethod
    def verify(pk: bytes, sig: bytes, message: bytes) -> bool:
        if len(pk) != 32:
            return False
        try:
            Ed25519PublicKey.from_public_bytes(pk).verify(sig, message)
            return True
        except (InvalidSignature, ValueError, TypeError):
            return False


_SIG_SCHEMES = {
    "ed25519": _Ed25519,
}


def get_sig_scheme(sig_id: str):
    try:
        return _SIG_SCHEMES[sig_id]
    except KeyError:
        raise UnsupportedConfig(f"unknown signature scheme: {sig_id}") from None


def keygen(params: SecurityParams | None = None, rng=SECURE_RANDOM) -> KeyPair:
    """Fresh issuer keypair for the configured signature scheme."""
    params = params or SecurityParams()
    scheme = get_sig_scheme(params.sig_id)
    return scheme.keypair_from_secret(rng.randbytes(scheme.sk_len))


def keypair_from_secret(secret: bytes, sig_id: str = "ed25519") -> KeyPair:
    return get_sig_scheme(sig_id).keypair_from_secret(secret)


def sign(sk: bytes, message: bytes, sig_id: str = "ed25519") -> bytes:
    """Sign a 32-byte digest. Raw messages must be hashed first; the
    length check enforces that discipline."""
    if len(message) != DIGEST_LEN:
        raise ValueError(f"sign expects a {DIGEST_LEN}-byte digest")
    return get_sig_scheme(sig_id).sign(sk, message)


def verify(pk: bytes, sig: bytes, message: bytes, sig_id: str = "ed25519") -> bool:
    """Verify a signature over a 32-byte digest. Total: returns False on
    any malformed input rather than raising."""
    if not isinstance(message, bytes) or len(message) != DIGEST_LEN:
        return False
    if not isinstance(sig, bytes) or not isinstance(pk, bytes):
        return False
    try:
        scheme = get_sig_scheme(sig_id)
    except UnsupportedConfig:
        return False
    return scheme.verify(pk, sig, message)

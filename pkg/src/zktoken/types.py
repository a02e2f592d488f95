"""Core value types and their canonical wire encodings.

Every type here is an immutable value. The wire format is a custom
length-prefixed binary layout: little-endian fixed-width integers,
32-bit length prefixes on variable fields, and a leading version byte
(0x01) on the three objects that travel between parties as standalone
artifacts (Credential, Presentation, RegistryRecord). Encoding is
canonical: equal values produce identical bytes, and decoders reject
any non-canonical or malformed input with MalformedEncoding, so
``encode(decode(b)) == b`` for every accepted ``b``.

Set-valued fields (blacklist tokens, revocation entries) are encoded
in ascending byte order and decoders require strictly ascending input.
Claims keep issuance order; their order is part of the value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .encoding import ByteReader, U64_MAX, lp, u8, u32, u64
from .errors import MalformedEncoding

WIRE_VERSION = 0x01

TOKEN_LEN = 32
DIGEST_LEN = 32
MIN_SEED_LEN = 16
MAX_SEED_LEN = 4096

# Aliases for documentation; both are raw byte strings.
Seed = bytes
Token = bytes
Epoch = int


def check_epoch(e: int) -> int:
    if not isinstance(e, int) or isinstance(e, bool) or not 0 <= e <= U64_MAX:
        raise MalformedEncoding(f"epoch out of range: {e!r}")
    return e


def check_token(t: bytes) -> bytes:
    if not isinstance(t, bytes) or len(t) != TOKEN_LEN:
        raise MalformedEncoding(
            f"token must be {TOKEN_LEN} bytes, got {len(t) if isinstance(t, bytes) else type(t).__name__}"
        )
    return t


def check_digest(d: bytes, what: str = "digest") -> bytes:
    if not isinstance(d, bytes) or len(d) != DIGEST_LEN:
        raise MalformedEncoding(f"{what} must be {DIGEST_LEN} bytes")
    return d


def check_seed(s: bytes) -> bytes:
    if not isinstance(s, bytes) or not MIN_SEED_LEN <= len(s) <= MAX_SEED_LEN:
        raise MalformedEncoding("seed length outside supported range")
    return s


@dataclass(frozen=True)
class SecurityParams:
    """Scheme-wide security configuration.

    lambda_bits is the seed/nonce length in bits; 128 minimum, byte
    aligned. hash_id and sig_id name the hash and signature scheme and
    exist so a circuit-friendly hash can be substituted without touching
    call sites.
    """

    lambda_bits: int = 256
    hash_id: str = "sha256"
    sig_id: str = "ed25519"

    def __post_init__(self):
        if self.lambda_bits < 128 or self.lambda_bits % 8 != 0:
            raise ValueError("lambda_bits must be >= 128 and a multiple of 8")

    @property
    def seed_len(self) -> int:
        return self.lambda_bits // 8


@dataclass(frozen=True)
class EpochParams:
    """Issuer time base: genesis timestamp and epoch duration, both in
    seconds. Epoch e covers [ts0 + e*dur, ts0 + (e+1)*dur)."""

    ts0: int
    dur: int

    def __post_init__(self):
        if not 0 <= self.ts0 <= U64_MAX:
            raise ValueError("ts0 out of range")
        if not 1 <= self.dur <= U64_MAX:
            raise ValueError("epoch duration must be a positive number of seconds")


@dataclass(frozen=True)
class Claims:
    """Ordered claim list. Labels are unique non-empty UTF-8 strings
    without NUL (NUL delimits label from value inside the per-claim
    hash); values are raw bytes. Order is fixed at issuance and is part
    of the credential."""

    entries: tuple[tuple[str, bytes], ...]

    def __post_init__(self):
        entries = tuple((label, value) for label, value in self.entries)
        object.__setattr__(self, "entries", entries)
        seen = set()
        for label, value in entries:
            if not isinstance(label, str) or not label or "\x00" in label:
                raise MalformedEncoding(f"bad claim label: {label!r}")
            if not isinstance(value, bytes):
                raise MalformedEncoding(f"claim value must be bytes: {label}")
            if label in seen:
                raise MalformedEncoding(f"duplicate claim label: {label}")
            seen.add(label)

    def __len__(self) -> int:
        return len(self.entries)

    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.entries)

    def to_bytes(self) -> bytes:
        out = bytearray(u32(len(self.entries)))
        for label, value in self.entries:
            out += lp(label.encode("utf-8"))
            out += lp(value)
        return bytes(out)

    @classmethod
    def read_from(cls, r: ByteReader) -> "Claims":
        n = r.u32()
        entries = []
        for _ in range(n):
            raw_label = r.lp()
            try:
                label = raw_label.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise MalformedEncoding("claim label is not UTF-8") from exc
            value = r.lp()
            entries.append((label, value))
        return cls(tuple(entries))

    @classmethod
    def from_bytes(cls, data: bytes) -> "Claims":
        r = ByteReader(data)
        claims = cls.read_from(r)
        r.expect_end()
        return claims


@dataclass(frozen=True)
class Credential:
    """Issued credential: secret seed, claims, inclusive expiration
    epoch, and the issuer's signature binding all three."""

    seed: Seed
    claims: Claims
    exp: Epoch
    sig: bytes

    def __post_init__(self):
        check_seed(self.seed)
        check_epoch(self.exp)
        if not isinstance(self.sig, bytes) or not self.sig:
            raise MalformedEncoding("signature must be non-empty bytes")

    def to_bytes(self) -> bytes:
        return (
            u8(WIRE_VERSION)
            + lp(self.seed)
            + self.claims.to_bytes()
            + u64(self.exp)
            + lp(self.sig)
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "Credential":
        r = ByteReader(data)
        if r.u8() != WIRE_VERSION:
            raise MalformedEncoding("unsupported credential version")
        seed = r.lp()
        claims = Claims.read_from(r)
        exp = r.u64()
        sig = r.lp()
        r.expect_end()
        return cls(seed=seed, claims=claims, exp=exp, sig=sig)


@dataclass(frozen=True)
class Blacklist:
    """Published non-membership list for a single epoch: the tokens of
    every currently revoked credential, derived fresh each epoch. The
    list is replaced, never appended."""

    epoch: Epoch
    tokens: frozenset[Token] = field(default_factory=frozenset)

    def __post_init__(self):
        check_epoch(self.epoch)
        tokens = frozenset(self.tokens)
        for t in tokens:
            check_token(t)
        object.__setattr__(self, "tokens", tokens)

    def to_bytes(self) -> bytes:
        out = bytearray(u64(self.epoch))
        out += u32(len(self.tokens))
        for t in sorted(self.tokens):
            out += t
        return bytes(out)

    @classmethod
    def read_from(cls, r: ByteReader) -> "Blacklist":
        epoch = r.u64()
        n = r.u32()
        tokens = []
        prev = None
        for _ in range(n):
            t = r.take(TOKEN_LEN)
            if prev is not None and t <= prev:
                raise MalformedEncoding("blacklist tokens not strictly ascending")
            tokens.append(t)
            prev = t
        return cls(epoch=epoch, tokens=frozenset(tokens))

    @classmethod
    def from_bytes(cls, data: bytes) -> "Blacklist":
        r = ByteReader(data)
        bl = cls.read_from(r)
        r.expect_end()
        return bl


@dataclass(frozen=True)
class RevList:
    """Issuer-private revocation state: (seed, expiration) pairs for
    every revoked, not-yet-expired credential. Entries are kept sorted
    by seed; seeds are unique."""

    entries: tuple[tuple[Seed, Epoch], ...] = ()

    def __post_init__(self):
        entries = tuple((s, e) for s, e in self.entries)
        prev = None
        for s, e in entries:
            check_seed(s)
            check_epoch(e)
            if prev is not None and s <= prev:
                raise MalformedEncoding("revocation entries must be strictly ascending by seed")
            prev = s
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def seeds(self) -> frozenset[Seed]:
        return frozenset(s for s, _ in self.entries)

    def __contains__(self, seed: Seed) -> bool:
        return any(s == seed for s, _ in self.entries)

    def add(self, seed: Seed, exp: Epoch) -> "RevList":
        if seed in self:
            return self
        merged = sorted(self.entries + ((seed, exp),))
        return RevList(tuple(merged))

    def drop_expired(self, e: Epoch) -> "RevList":
        """Remove entries whose credential expired before epoch e."""
        kept = tuple((s, x) for s, x in self.entries if x >= e)
        return self if len(kept) == len(self.entries) else RevList(kept)

    def to_bytes(self) -> bytes:
        out = bytearray(u32(len(self.entries)))
        for s, e in self.entries:
            out += lp(s)
            out += u64(e)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "RevList":
        r = ByteReader(data)
        n = r.u32()
        entries = []
        for _ in range(n):
            s = r.lp()
            e = r.u64()
            entries.append((s, e))
        r.expect_end()
        return cls(tuple(entries))


@dataclass(frozen=True)
class Proof:
    """Opaque proof blob tagged with the backend that produced it."""

    backend_id: int
    body: bytes

    def __post_init__(self):
        if not 0 <= self.backend_id <= 0xFF:
            raise MalformedEncoding("backend_id must fit one byte")
        if not isinstance(self.body, bytes):
            raise MalformedEncoding("proof body must be bytes")

    def to_bytes(self) -> bytes:
        return u8(self.backend_id) + lp(self.body)

    @classmethod
    def read_from(cls, r: ByteReader) -> "Proof":
        backend_id = r.u8()
        body = r.lp()
        return cls(backend_id=backend_id, body=body)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Proof":
        r = ByteReader(data)
        p = cls.read_from(r)
        r.expect_end()
        return p


@dataclass(frozen=True)
class CommonReferenceString:
    """Backend reference string. Binds the exact relation being proven
    via the digest of its textual descriptor; params carries any
    backend-specific setup material (empty for the relation-check
    backend, which needs no trusted setup)."""

    backend_id: int
    relation_digest: bytes
    params: bytes = b""

    def __post_init__(self):
        if not 0 <= self.backend_id <= 0xFF:
            raise MalformedEncoding("backend_id must fit one byte")
        check_digest(self.relation_digest, "relation digest")
        if not isinstance(self.params, bytes):
            raise MalformedEncoding("crs params must be bytes")

    def to_bytes(self) -> bytes:
        return u8(self.backend_id) + self.relation_digest + lp(self.params)

    @classmethod
    def read_from(cls, r: ByteReader) -> "CommonReferenceString":
        backend_id = r.u8()
        digest = r.take(DIGEST_LEN)
        params = r.lp()
        return cls(backend_id=backend_id, relation_digest=digest, params=params)

    @classmethod
    def from_bytes(cls, data: bytes) -> "CommonReferenceString":
        r = ByteReader(data)
        crs = cls.read_from(r)
        r.expect_end()
        return crs


@dataclass(frozen=True)
class Presentation:
    """Holder-produced presentation covering a verification period of m
    consecutive epochs: one token per epoch, the challenge binding hash
    h, per-claim digests (with any disclosed claims in the clear), the
    credential expiration, and one proof per block of k tokens."""

    m: int
    epochs: tuple[Epoch, ...]
    tokens: tuple[Token, ...]
    h: bytes
    exp: Epoch
    claim_digests: tuple[bytes, ...]
    disclosed: tuple[tuple[int, str, bytes], ...] = ()
    proofs: tuple[Proof, ...] = ()

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 1:
            raise MalformedEncoding("m must be a positive integer")
        epochs = tuple(self.epochs)
        tokens = tuple(self.tokens)
        if len(epochs) != self.m or len(tokens) != self.m:
            raise MalformedEncoding("token and epoch counts must equal m")
        for e in epochs:
            check_epoch(e)
        for i in range(1, len(epochs)):
            if epochs[i] != epochs[i - 1] + 1:
                raise MalformedEncoding("epochs must be consecutive")
        for t in tokens:
            check_token(t)
        check_digest(self.h, "binding hash")
        check_epoch(self.exp)
        digests = tuple(self.claim_digests)
        for d in digests:
            check_digest(d, "claim digest")
        disclosed = tuple((i, label, value) for i, label, value in self.disclosed)
        prev = -1
        for i, label, value in disclosed:
            if not isinstance(i, int) or not 0 <= i < len(digests):
                raise MalformedEncoding(f"disclosed claim index out of range: {i}")
            if i <= prev:
                raise MalformedEncoding("disclosed claims must be strictly ascending by index")
            if not isinstance(label, str) or not label or "\x00" in label:
                raise MalformedEncoding("bad disclosed claim label")
            if not isinstance(value, bytes):
                raise MalformedEncoding("disclosed claim value must be bytes")
            prev = i
        proofs = tuple(self.proofs)
        if not 1 <= len(proofs) <= self.m:
            raise MalformedEncoding("proof count must be between 1 and m")
        for p in proofs:
            if not isinstance(p, Proof):
                raise MalformedEncoding("proofs must be Proof values")
        object.__setattr__(self, "epochs", epochs)
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "claim_digests", digests)
        object.__setattr__(self, "disclosed", disclosed)
        object.__setattr__(self, "proofs", proofs)

    def to_bytes(self) -> bytes:
        out = bytearray(u8(WIRE_VERSION))
        out += u32(self.m)
        for e in self.epochs:
            out += u64(e)
        for t in self.tokens:
            out += t
        out += self.h
        out += u64(self.exp)
        out += u32(len(self.claim_digests))
        for d in self.claim_digests:
            out += d
        out += u32(len(self.disclosed))
        for i, label, value in self.disclosed:
            out += u32(i)
            out += lp(label.encode("utf-8"))
            out += lp(value)
        out += u32(len(self.proofs))
        for p in self.proofs:
            out += lp(p.to_bytes())
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Presentation":
        r = ByteReader(data)
        if r.u8() != WIRE_VERSION:
            raise MalformedEncoding("unsupported presentation version")
        m = r.u32()
        if m < 1:
            raise MalformedEncoding("m must be a positive integer")
        epochs = tuple(r.u64() for _ in range(m))
        tokens = tuple(r.take(TOKEN_LEN) for _ in range(m))
        h = r.take(DIGEST_LEN)
        exp = r.u64()
        n = r.u32()
        digests = tuple(r.take(DIGEST_LEN) for _ in range(n))
        d = r.u32()
        disclosed = []
        for _ in range(d):
            idx = r.u32()
            raw_label = r.lp()
            try:
                label = raw_label.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise MalformedEncoding("disclosed label is not UTF-8") from exc
            value = r.lp()
            disclosed.append((idx, label, value))
        p = r.u32()
        proofs = tuple(Proof.from_bytes(r.lp()) for _ in range(p))
        r.expect_end()
        return cls(
            m=m,
            epochs=epochs,
            tokens=tokens,
            h=h,
            exp=exp,
            claim_digests=digests,
            disclosed=tuple(disclosed),
            proofs=proofs,
        )


@dataclass(frozen=True)
class RegistryRecord:
    """Per-issuer bundle published to the registry: verification key,
    reference string, time base, batch size k, and the current
    blacklist, all covered by record_sig under the issuer's key."""

    pk: bytes
    crs: CommonReferenceString
    ts0: int
    dur: int
    k: int
    blacklist: Blacklist
    record_sig: bytes

    def __post_init__(self):
        if not isinstance(self.pk, bytes) or not self.pk:
            raise MalformedEncoding("pk must be non-empty bytes")
        if not 0 <= self.ts0 <= U64_MAX:
            raise MalformedEncoding("ts0 out of range")
        if not 1 <= self.dur <= U64_MAX:
            raise MalformedEncoding("dur must be positive")
        if not 1 <= self.k <= 0xFFFFFFFF:
            raise MalformedEncoding("k must be a positive integer")
        if not isinstance(self.record_sig, bytes) or not self.record_sig:
            raise MalformedEncoding("record_sig must be non-empty bytes")

    @staticmethod
    def body_bytes(
        pk: bytes,
        crs: CommonReferenceString,
        ts0: int,
        dur: int,
        k: int,
        blacklist: Blacklist,
    ) -> bytes:
        """Signed portion of the record: everything but the signature."""
        return (
            u8(WIRE_VERSION)
            + lp(pk)
            + crs.to_bytes()
            + u64(ts0)
            + u64(dur)
            + u32(k)
            + blacklist.to_bytes()
        )

    def body(self) -> bytes:
        return self.body_bytes(self.pk, self.crs, self.ts0, self.dur, self.k, self.blacklist)

    def to_bytes(self) -> bytes:
        return self.body() + lp(self.record_sig)

    @classmethod
    def from_bytes(cls, data: bytes) -> "RegistryRecord":
        r = ByteReader(data)
        if r.u8() != WIRE_VERSION:
            raise MalformedEncoding("unsupported record version")
        pk = r.lp()
        crs = CommonReferenceString.read_from(r)
        ts0 = r.u64()
        dur = r.u64()
        k = r.u32()
        blacklist = Blacklist.read_from(r)
        sig = r.lp()
        r.expect_end()
        return cls(pk=pk, crs=crs, ts0=ts0, dur=dur, k=k, blacklist=blacklist, record_sig=sig)


_DECODERS = {
    Claims: Claims.from_bytes,
    Credential: Credential.from_bytes,
    Blacklist: Blacklist.from_bytes,
    RevList: RevList.from_bytes,
    Proof: Proof.from_bytes,
    CommonReferenceString: CommonReferenceString.from_bytes,
    Presentation: Presentation.from_bytes,
    RegistryRecord: RegistryRecord.from_bytes,
}


def encode(value) -> bytes:
    """Canonical encoding of any domain value. Epochs are bare ints and
    encode as eight little-endian bytes."""
    if isinstance(value, bool):
        raise MalformedEncoding("cannot encode bool")
    if isinstance(value, int):
        return u64(check_epoch(value))
    to_bytes = getattr(value, "to_bytes", None)
    if to_bytes is not None and type(value) in _DECODERS:
        return value.to_bytes()
    raise MalformedEncoding(f"cannot encode {type(value).__name__}")


def decode(data: bytes, cls):
    """Strict inverse of encode for the given type; cls=int decodes an
    epoch. Raises MalformedEncoding on any invalid or non-canonical
    input, including trailing bytes."""
    if cls is int:
        r = ByteReader(data)
        e = r.u64()
        r.expect_end()
        return e
    try:
        decoder = _DECODERS[cls]
    except KeyError:
        raise MalformedEncoding(f"cannot decode {cls!r}") from None
    try:
        return decoder(data)
    except MalformedEncoding:
        raise
    except ValueError as exc:
        raise MalformedEncoding(str(exc)) from exc


def size_of_encoding(value) -> int:
    return len(encode(value))


def blocks_needed(m: int, k: int) -> int:
    """Number of proof blocks covering m tokens at batch size k."""
    return math.ceil(m / k)

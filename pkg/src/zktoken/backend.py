"""Pluggable proof backends.

A backend turns (statement, witness) into an opaque proof and checks
proofs against statements. The only backend shipped here is the
transparent relation-check backend: its proof is a hash MAC over the
canonical statement bytes under a key derived from the witness, and
verification re-derives the key from a witness escrow and re-evaluates
the relation itself. The escrow belongs to the test harness; nothing
is zero-knowledge about this backend and it must never leave a test or
desk-bench deployment. It exists so every layer above (protocol,
registry, harness) can be exercised with honest proof semantics:
verification accepts exactly when some escrowed witness satisfies the
relation for exactly the presented statement.

A SNARK backend can register under its own backend_id with the same
interface; none is built into this distribution.
"""

from __future__ import annotations

import hashlib
from abc import ABC, abstractmethod

from . import relation as _relation
from .encoding import ByteReader, lp, u8, u32
from .errors import (
    CrsMismatch,
    MalformedEncoding,
    RelationUnsatisfied,
    UnsupportedConfig,
)
from .relation import CircuitConfig, CircuitStatement, CircuitWitness
from .types import CommonReferenceString, Proof, SecurityParams
from .crypto import constant_time_eq

RELATION_CHECK_BACKEND_ID = 1
SNARK_BACKEND_ID = 2

# Internal tags for MAC-key plumbing, disjoint from the protocol's
# 0x01..0x06 hash tags.
_TAG_KEY = b"\xe0"
_TAG_MAC = b"\xe1"
_TAG_KEY_ID = b"\xe2"

_MAX_K = 4096


class ProofBackend(ABC):
    backend_id: int

    @abstractmethod
    def setup(self, params: SecurityParams, cfg: CircuitConfig) -> CommonReferenceString:
        """Produce the reference string for this backend and relation."""

    @abstractmethod
    def prove(self, x: CircuitStatement, crs: CommonReferenceString, w: CircuitWitness) -> Proof:
        """Prove x with witness w. Refuses witnesses that do not satisfy
        the relation."""

    @abstractmethod
    def verify(self, x: CircuitStatement, crs: CommonReferenceString, proof: Proof) -> bool:
        """Check a proof against a statement. Total: malformed or alien
        proofs return False rather than raising."""


class WitnessEscrow:
    """Key-id to witness map backing relation-check verification.

    Held by the harness (or persisted beside a presentation in CLI
    runs) so the verifier side can re-derive MAC keys and re-check the
    relation. Contains seeds in the clear by design; test use only.
    """

    def __init__(self):
        self._entries: dict[bytes, CircuitWitness] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def put(self, key_id: bytes, w: CircuitWitness) -> None:
        self._entries[key_id] = w

    def get(self, key_id: bytes) -> CircuitWitness | None:
        return self._entries.get(key_id)

    def merge(self, other: "WitnessEscrow") -> None:
        self._entries.update(other._entries)

    def to_bytes(self) -> bytes:
        out = bytearray(u8(1))
        out += u32(len(self._entries))
        for key_id in sorted(self._entries):
            w = self._entries[key_id]
            out += key_id
            out += lp(w.sig)
            out += lp(w.seed)
            out += lp(w.nonce)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "WitnessEscrow":
        r = ByteReader(data)
        if r.u8() != 1:
            raise MalformedEncoding("unsupported escrow version")
        n = r.u32()
        escrow = cls()
        for _ in range(n):
            key_id = r.take(32)
            sig = r.lp()
            seed = r.lp()
            nonce = r.lp()
            escrow.put(key_id, CircuitWitness(sig=sig, seed=seed, nonce=nonce))
        r.expect_end()
        return escrow

    def save(self, path) -> None:
        with open(path, "wb") as f:
            f.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "WitnessEscrow":
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())


def _mac_key(w: CircuitWitness) -> bytes:
    return hashlib.sha256(_TAG_KEY + w.to_bytes()).digest()


def _key_id(key: bytes) -> bytes:
    return hashlib.sha256(_TAG_KEY_ID + key).digest()


def _mac(key: bytes, relation_digest: bytes, statement_bytes: bytes) -> bytes:
    return hashlib.sha256(_TAG_MAC + key + relation_digest + statement_bytes).digest()


class RelationCheckBackend(ProofBackend):
    backend_id = RELATION_CHECK_BACKEND_ID

    def __init__(
        self,
        hash_id: str = "sha256",
        sig_id: str = "ed25519",
        escrow: WitnessEscrow | None = None,
    ):
        self.hash_id = hash_id
        self.sig_id = sig_id
        self.escrow = escrow if escrow is not None else WitnessEscrow()

    def _cfg_for(self, k: int) -> CircuitConfig:
        return CircuitConfig(k=k, hash_id=self.hash_id, sig_id=self.sig_id)

    def setup(self, params: SecurityParams, cfg: CircuitConfig) -> CommonReferenceString:
        if cfg.k > _MAX_K:
            raise UnsupportedConfig(f"k={cfg.k} exceeds backend limit {_MAX_K}")
        if cfg.hash_id != self.hash_id or cfg.sig_id != self.sig_id:
            raise UnsupportedConfig("backend instantiated for a different hash/sig pair")
        # Deterministic, no trusted setup: the reference string is just
        # the relation descriptor digest.
        return CommonReferenceString(
            backend_id=self.backend_id,
            relation_digest=_relation.descriptor_digest(cfg),
            params=b"",
        )

    def _check_crs(self, x: CircuitStatement, crs: CommonReferenceString) -> CircuitConfig:
        cfg = self._cfg_for(len(x.epochs))
        if crs.backend_id != self.backend_id:
            raise CrsMismatch("reference string is for a different backend")
        if crs.relation_digest != _relation.descriptor_digest(cfg):
            raise CrsMismatch("reference string is for a different relation")
        return cfg

    def prove(self, x: CircuitStatement, crs: CommonReferenceString, w: CircuitWitness) -> Proof:
        cfg = self._check_crs(x, crs)
        if not _relation.relation_holds(x, w, cfg):
            raise RelationUnsatisfied("witness does not satisfy the relation")
        key = _mac_key(w)
        key_id = _key_id(key)
        self.escrow.put(key_id, w)
        tag = _mac(key, crs.relation_digest, x.to_bytes())
        return Proof(backend_id=self.backend_id, body=key_id + tag)

    def verify(self, x: CircuitStatement, crs: CommonReferenceString, proof: Proof) -> bool:
        try:
            cfg = self._check_crs(x, crs)
        except CrsMismatch:
            return False
        if proof.backend_id != self.backend_id or len(proof.body) != 64:
            return False
        key_id, tag = proof.body[:32], proof.body[32:]
        w = self.escrow.get(key_id)
        if w is None:
            return False
        expected = _mac(_mac_key(w), crs.relation_digest, x.to_bytes())
        if not constant_time_eq(tag, expected):
            return False
        return _relation.relation_holds(x, w, cfg)


def get_backend(name: str, escrow: WitnessEscrow | None = None, *,
                hash_id: str = "sha256", sig_id: str = "ed25519") -> ProofBackend:
    """Backend factory keyed by configuration name."""
    if name == "relation-check":
        return RelationCheckBackend(hash_id=hash_id, sig_id=sig_id, escrow=escrow)
    if name == "snark":
        raise UnsupportedConfig("snark backend is not built into this distribution")
    raise UnsupportedConfig(f"unknown backend: {name}")

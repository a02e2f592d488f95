"""The relation proven for each presentation block.

A statement covers a block of k (token, epoch) pairs. The witness is
the credential signature, the secret seed, and the presentation nonce.
The relation holds when three conditions do, evaluated in order:

    1. sig is a valid signature under pk over the credential digest
       built from (seed, claims root, exp);
    2. every token in the block equals the epoch-bound token derived
       from seed at its epoch;
    3. the binding hash h equals the hash of (challenge, nonce).

For k = 1 this is exactly the single-token relation; larger k batches
condition 2 across the block. Blocks shorter than k are padded by
repeating the final (token, epoch) pair, which keeps condition 2
satisfiable without widening the statement.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from . import crypto
from .encoding import lp, u32, u64
from .errors import EmptyBlock
from .types import check_digest, check_epoch, check_token


@dataclass(frozen=True)
class CircuitConfig:
    """Shape of the relation: batch size plus the hash and signature
    scheme the conditions are evaluated with."""

    k: int = 1
    hash_id: str = "sha256"
    sig_id: str = "ed25519"

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise ValueError("k must be a positive integer")


@dataclass(frozen=True)
class CircuitStatement:
    """Public inputs for one proof block."""

    pk: bytes
    h: bytes
    challenge: bytes
    epochs: tuple[int, ...]
    tokens: tuple[bytes, ...]
    exp: int
    claims_digest: bytes

    def __post_init__(self):
        object.__setattr__(self, "epochs", tuple(self.epochs))
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if len(self.epochs) != len(self.tokens) or not self.epochs:
            raise ValueError("statement needs equal, non-zero token and epoch counts")
        for e in self.epochs:
            check_epoch(e)
        for t in self.tokens:
            check_token(t)
        check_digest(self.h, "binding hash")
        check_digest(self.claims_digest, "claims digest")
        check_epoch(self.exp)

    def to_bytes(self) -> bytes:
        """Canonical statement bytes; what proofs bind to."""
        out = bytearray(lp(self.pk))
        out += self.h
        out += lp(self.challenge)
        out += u32(len(self.epochs))
        for e in self.epochs:
            out += u64(e)
        for t in self.tokens:
            out += t
        out += u64(self.exp)
        out += self.claims_digest
        return bytes(out)


@dataclass(frozen=True)
class CircuitWitness:
    """Private inputs: credential signature, seed, presentation nonce."""

    sig: bytes
    seed: bytes
    nonce: bytes

    def to_bytes(self) -> bytes:
        return lp(self.sig) + lp(self.seed) + lp(self.nonce)


def relation_trace(
    x: CircuitStatement, w: CircuitWitness, cfg: CircuitConfig | None = None
) -> tuple[bool, bool, bool]:
    """Evaluate the three conditions separately, in their fixed order.

    Total: structural mismatches (wrong block width for cfg.k) make the
    affected condition false instead of raising.
    """
    cfg = cfg or CircuitConfig(k=len(x.epochs))
    digest = crypto.credential_digest(w.seed, x.claims_digest, x.exp, cfg.hash_id)
    cond_sig = crypto.verify(x.pk, w.sig, digest, cfg.sig_id)
    cond_tokens = len(x.epochs) == cfg.k and all(
        crypto.hash_token(w.seed, e, cfg.hash_id) == t
        for e, t in zip(x.epochs, x.tokens)
    )
    cond_bind = crypto.hash_bind(x.challenge, w.nonce, cfg.hash_id) == x.h
    return cond_sig, cond_tokens, cond_bind


def relation_holds(
    x: CircuitStatement, w: CircuitWitness, cfg: CircuitConfig | None = None
) -> bool:
    return all(relation_trace(x, w, cfg))


def pad_block(
    tokens: tuple[bytes, ...], epochs: tuple[int, ...], k: int
) -> tuple[tuple[bytes, ...], tuple[int, ...]]:
    """Pad a final short block to width k by repeating the last
    (token, epoch) pair. The pair stays internally consistent, so a
    witness that derives the real tokens also derives the padding."""
    if len(tokens) != len(epochs):
        raise ValueError("token and epoch counts differ")
    if not tokens:
        raise EmptyBlock("cannot pad an empty block")
    if len(tokens) > k:
        raise ValueError(f"block of {len(tokens)} exceeds k={k}")
    pad = k - len(tokens)
    return (
        tuple(tokens) + (tokens[-1],) * pad,
        tuple(epochs) + (epochs[-1],) * pad,
    )


def relation_descriptor(cfg: CircuitConfig) -> str:
    """Textual description of the exact relation a reference string is
    for. Verifiers compare digests of this text to detect evaluating a
    different relation than the prover."""
    return (
        "zktoken-relation v1\n"
        f"k={cfg.k}\n"
        f"hash={cfg.hash_id}\n"
        f"sig={cfg.sig_id}\n"
        "statement=pk,h,challenge,epochs[k],tokens[k],exp,claims_digest\n"
        "witness=sig,seed,nonce\n"
        "conditions=credential-signature,token-derivation,challenge-binding\n"
    )


def descriptor_digest(cfg: CircuitConfig) -> bytes:
    return hashlib.sha256(relation_descriptor(cfg).encode("utf-8")).digest()


def split_blocks(
    tokens: tuple[bytes, ...], epochs: tuple[int, ...], k: int
) -> list[tuple[tuple[bytes, ...], tuple[int, ...]]]:
    """Chunk a presentation's tokens into proof blocks of width k, the
    last one padded."""
    if len(tokens) != len(epochs) or not tokens:
        raise EmptyBlock("no tokens to block")
    blocks = []
    for i in range(0, len(tokens), k):
        blocks.append(pad_block(tuple(tokens[i : i + k]), tuple(epochs[i : i + k]), k))
    return blocks

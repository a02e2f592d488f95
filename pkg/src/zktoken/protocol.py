"""The six procedures of the scheme plus continuous verification.

Issuer side: setup, issue, revoke, refresh. Holder side: present.
Verifier side: verification (proof check plus revocation status) and
the status-only recheck used for continuous sessions.

Time never comes from the wall clock here; every time-dependent
operation takes the epoch (or a timestamp) as an explicit argument and
callers own the clock. Epoch e covers [ts0 + e*dur, ts0 + (e+1)*dur).
A credential's exp is the last epoch index at which it may verify,
inclusive.

Revocation is deliberately lazy: revoke only updates the issuer's
private list, and holders keep verifying until the next refresh
publishes a blacklist containing their current token. Refresh derives
every revoked credential's token for the current epoch and replaces
the published blacklist wholesale; it must run every epoch or
verifiers are left checking a stale epoch's list.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from . import crypto
from .backend import ProofBackend
from .errors import (
    BlacklistEpochMismatch,
    ClockBeforeGenesis,
    ExpInPast,
    ForeignCredential,
    SessionExpired,
    UnsupportedConfig,
)
from .relation import CircuitConfig, CircuitStatement, CircuitWitness, split_blocks
from .types import (
    Blacklist,
    Claims,
    CommonReferenceString,
    Credential,
    EpochParams,
    Presentation,
    RegistryRecord,
    RevList,
    SecurityParams,
    blocks_needed,
)

REASON_UNTRUSTED_ISSUER = "untrusted-issuer"
REASON_BAD_PROOF = "bad-proof"
REASON_PERIOD_EXPIRED = "period-expired"
REASON_EXPIRED = "expired"
REASON_REVOKED = "revoked"


class PresentationExpiryWarning(UserWarning):
    """Presentation period extends past the credential's expiration."""


@dataclass
class IssuerState:
    """Issuer-private state. Single writer: revoke and refresh mutate
    the revocation list in place."""

    params: SecurityParams
    epoch_params: EpochParams
    cfg: CircuitConfig
    keys: crypto.KeyPair
    crs: CommonReferenceString
    revlist: RevList = field(default_factory=RevList)


@dataclass(frozen=True)
class VerifierPolicy:
    """Verifier-local acceptance policy. An empty trusted set is only
    valid with the explicit trust_all flag, so trusting everyone is
    always a deliberate choice. epoch_tolerance=1 lets the verifier
    retry the revocation check one epoch back to absorb clock skew
    around epoch boundaries."""

    trusted_issuers: frozenset[bytes] = frozenset()
    trust_all: bool = False
    epoch_tolerance: int = 0

    def __post_init__(self):
        object.__setattr__(self, "trusted_issuers", frozenset(self.trusted_issuers))
        if not self.trust_all and not self.trusted_issuers:
            raise ValueError("empty trusted set requires the explicit trust_all flag")
        if self.epoch_tolerance not in (0, 1):
            raise ValueError("epoch_tolerance must be 0 or 1")

    @classmethod
    def allow_any(cls, epoch_tolerance: int = 0) -> "VerifierPolicy":
        return cls(trust_all=True, epoch_tolerance=epoch_tolerance)

    def trusts(self, pk: bytes) -> bool:
        return self.trust_all or pk in self.trusted_issuers


@dataclass(frozen=True)
class VerificationResult:
    ok: bool
    reason: str | None = None


@dataclass(frozen=True)
class VerificationSession:
    """Capability produced by one successful full verification; later
    epochs within the presentation's period only recheck revocation
    status against fresh blacklists, never the proofs."""

    pk: bytes
    vp: Presentation
    challenge: bytes


def current_epoch(epoch_params: EpochParams, now: int) -> int:
    """Epoch index containing timestamp now."""
    if now < epoch_params.ts0:
        raise ClockBeforeGenesis(f"timestamp {now} predates genesis {epoch_params.ts0}")
    return (now - epoch_params.ts0) // epoch_params.dur


def setup(
    params: SecurityParams,
    epoch_params: EpochParams,
    cfg: CircuitConfig,
    backend: ProofBackend,
    rng=crypto.SECURE_RANDOM,
) -> tuple[IssuerState, RegistryRecord]:
    """Create an issuer: keypair, reference string, empty revocation
    state, and the initial registry record (empty blacklist, epoch 0)."""
    if cfg.hash_id != params.hash_id or cfg.sig_id != params.sig_id:
        raise UnsupportedConfig("params and circuit config disagree on hash/sig")
    keys = crypto.keygen(params, rng)
    crs = backend.setup(params, cfg)
    state = IssuerState(
        params=params, epoch_params=epoch_params, cfg=cfg, keys=keys, crs=crs
    )
    record = signed_record(state, Blacklist(epoch=0))
    return state, record


def signed_record(state: IssuerState, blacklist: Blacklist) -> RegistryRecord:
    """Registry record for the given blacklist, signed by the issuer."""
    body = RegistryRecord.body_bytes(
        state.keys.pk,
        state.crs,
        state.epoch_params.ts0,
        state.epoch_params.dur,
        state.cfg.k,
        blacklist,
    )
    sig = crypto.sign(
        state.keys.sk,
        crypto.record_digest(body, state.params.hash_id),
        state.params.sig_id,
    )
    return RegistryRecord(
        pk=state.keys.pk,
        crs=state.crs,
        ts0=state.epoch_params.ts0,
        dur=state.epoch_params.dur,
        k=state.cfg.k,
        blacklist=blacklist,
        record_sig=sig,
    )


def issue(
    state: IssuerState,
    claims: Claims,
    exp: int,
    now: int,
    rng=crypto.SECURE_RANDOM,
) -> Credential:
    """Issue a credential: fresh secret seed, signature over the digest
    binding (seed, claims root, exp). exp is an inclusive epoch index
    and must not already be in the past."""
    cur = current_epoch(state.epoch_params, now)
    if exp < cur:
        raise ExpInPast(f"exp {exp} is before current epoch {cur}")
    seed = rng.randbytes(state.params.seed_len)
    root, _ = crypto.hash_claims(claims, state.params.hash_id)
    digest = crypto.credential_digest(seed, root, exp, state.params.hash_id)
    sig = crypto.sign(state.keys.sk, digest, state.params.sig_id)
    return Credential(seed=seed, claims=claims, exp=exp, sig=sig)


def revoke(state: IssuerState, vc: Credential) -> IssuerState:
    """Add a credential's seed to the issuer's revocation list. Takes
    effect only at the next refresh. Idempotent; rejects credentials
    not signed by this issuer."""
    root, _ = crypto.hash_claims(vc.claims, state.params.hash_id)
    digest = crypto.credential_digest(vc.seed, root, vc.exp, state.params.hash_id)
    if not crypto.verify(state.keys.pk, vc.sig, digest, state.params.sig_id):
        raise ForeignCredential("credential was not issued under this key")
    state.revlist = state.revlist.add(vc.seed, vc.exp)
    return state


def refresh(state: IssuerState, e: int) -> Blacklist:
    """Blacklist for epoch e: drop revocation entries that expired
    before e, then derive each remaining seed's token at e. The caller
    computes e via current_epoch and publishes the result."""
    state.revlist = state.revlist.drop_expired(e)
    tokens = frozenset(
        crypto.hash_token(seed, e, state.params.hash_id)
        for seed, _ in state.revlist.entries
    )
    return Blacklist(epoch=e, tokens=tokens)


def present(
    backend: ProofBackend,
    pk: bytes,
    crs: CommonReferenceString,
    cfg: CircuitConfig,
    e: int,
    vc: Credential,
    m: int,
    challenge: bytes,
    disclose=(),
    rng=crypto.SECURE_RANDOM,
) -> Presentation:
    """Build a presentation valid for epochs e .. e+m-1.

    One token per epoch, one proof per block of cfg.k tokens (the last
    block padded by repeating the final pair), a single nonce binding
    the verifier's challenge across all blocks. Claim values stay
    hidden behind per-claim digests unless their index is in disclose.
    """
    if not isinstance(m, int) or m < 1:
        raise ValueError("m must be a positive integer")
    if not isinstance(challenge, bytes) or not challenge:
        raise ValueError("challenge must be non-empty bytes")
    indices = sorted(set(disclose))
    for i in indices:
        if not isinstance(i, int) or not 0 <= i < len(vc.claims):
            raise ValueError(f"disclosure index out of range: {i}")
    if vc.exp < e + m - 1:
        warnings.warn(
            f"presentation period ends at epoch {e + m - 1}, past exp {vc.exp}",
            PresentationExpiryWarning,
            stacklevel=2,
        )
    nonce = rng.randbytes(len(vc.seed))
    h = crypto.hash_bind(challenge, nonce, cfg.hash_id)
    root, digests = crypto.hash_claims(vc.claims, cfg.hash_id)
    epochs = tuple(range(e, e + m))
    tokens = tuple(crypto.hash_token(vc.seed, ep, cfg.hash_id) for ep in epochs)
    witness = CircuitWitness(sig=vc.sig, seed=vc.seed, nonce=nonce)
    proofs = []
    for block_tokens, block_epochs in split_blocks(tokens, epochs, cfg.k):
        x = CircuitStatement(
            pk=pk,
            h=h,
            challenge=challenge,
            epochs=block_epochs,
            tokens=block_tokens,
            exp=vc.exp,
            claims_digest=root,
        )
        proofs.append(backend.prove(x, crs, witness))
    disclosed = tuple((i, vc.claims.entries[i][0], vc.claims.entries[i][1]) for i in indices)
    return Presentation(
        m=m,
        epochs=epochs,
        tokens=tokens,
        h=h,
        exp=vc.exp,
        claim_digests=digests,
        disclosed=disclosed,
        proofs=proofs,
    )


def verify_proofs(
    backend: ProofBackend,
    pk: bytes,
    crs: CommonReferenceString,
    cfg: CircuitConfig,
    m: int,
    vp: Presentation,
    challenge: bytes,
) -> bool:
    """Check every proof block of a presentation against the agreed
    period m and challenge. Total: any structural mismatch is False."""
    if vp.m != m or len(vp.tokens) != m or len(vp.epochs) != m:
        return False
    if any(vp.epochs[i] != vp.epochs[i - 1] + 1 for i in range(1, m)):
        return False
    if len(vp.proofs) != blocks_needed(m, cfg.k):
        return False
    for i, label, value in vp.disclosed:
        if crypto.per_claim_digest(i, label, value, cfg.hash_id) != vp.claim_digests[i]:
            return False
    root = crypto.claims_root(vp.claim_digests, cfg.hash_id)
    blocks = split_blocks(vp.tokens, vp.epochs, cfg.k)
    for (block_tokens, block_epochs), proof in zip(blocks, vp.proofs):
        x = CircuitStatement(
            pk=pk,
            h=vp.h,
            challenge=challenge,
            epochs=block_epochs,
            tokens=block_tokens,
            exp=vp.exp,
            claims_digest=root,
        )
        if not backend.verify(x, crs, proof):
            return False
    return True


def revocation_status_reason(e: int, vp: Presentation, blacklist: Blacklist) -> str | None:
    if blacklist.epoch != e:
        raise BlacklistEpochMismatch(
            f"blacklist is for epoch {blacklist.epoch}, check requires {e}"
        )
    if e not in vp.epochs:
        return REASON_PERIOD_EXPIRED
    if e > vp.exp:
        return REASON_EXPIRED
    token = vp.tokens[e - vp.epochs[0]]
    if token in blacklist.tokens:
        return REASON_REVOKED
    return None


def verify_revocation_status(e: int, vp: Presentation, blacklist: Blacklist) -> bool:
    """Status-only check at epoch e: the presentation covers e, the
    credential has not expired, and its token for e is not blacklisted.
    Requires the blacklist published for exactly epoch e."""
    return revocation_status_reason(e, vp, blacklist) is None


def verification_report(
    backend: ProofBackend,
    pk: bytes,
    crs: CommonReferenceString,
    cfg: CircuitConfig,
    e: int,
    blacklist: Blacklist,
    m: int,
    vp: Presentation,
    challenge: bytes,
    policy: VerifierPolicy | None = None,
    prev_blacklist: Blacklist | None = None,
) -> VerificationResult:
    """Full verification with a machine-readable failure reason.

    Order: issuer trust, proof blocks, then revocation status at e.
    With epoch_tolerance=1 and a blacklist for e-1 supplied, a failed
    status check is retried one epoch back before rejecting.
    """
    policy = policy or VerifierPolicy.allow_any()
    if not policy.trusts(pk):
        return VerificationResult(False, REASON_UNTRUSTED_ISSUER)
    if not verify_proofs(backend, pk, crs, cfg, m, vp, challenge):
        return VerificationResult(False, REASON_BAD_PROOF)
    reason = revocation_status_reason(e, vp, blacklist)
    if (
        reason is not None
        and policy.epoch_tolerance == 1
        and e >= 1
        and prev_blacklist is not None
        and prev_blacklist.epoch == e - 1
    ):
        reason = revocation_status_reason(e - 1, vp, prev_blacklist)
    if reason is not None:
        return VerificationResult(False, reason)
    return VerificationResult(True)


def verification(
    backend: ProofBackend,
    pk: bytes,
    crs: CommonReferenceString,
    cfg: CircuitConfig,
    e: int,
    blacklist: Blacklist,
    m: int,
    vp: Presentation,
    challenge: bytes,
    policy: VerifierPolicy | None = None,
    prev_blacklist: Blacklist | None = None,
) -> bool:
    return verification_report(
        backend, pk, crs, cfg, e, blacklist, m, vp, challenge, policy, prev_blacklist
    ).ok


def start_continuous_session(
    backend: ProofBackend,
    pk: bytes,
    crs: CommonReferenceString,
    cfg: CircuitConfig,
    e: int,
    blacklist: Blacklist,
    m: int,
    vp: Presentation,
    challenge: bytes,
    policy: VerifierPolicy | None = None,
    prev_blacklist: Blacklist | None = None,
) -> VerificationSession | None:
    """Run full verification once; on success return the session under
    which later epochs are checked status-only."""
    result = verification_report(
        backend, pk, crs, cfg, e, blacklist, m, vp, challenge, policy, prev_blacklist
    )
    if not result.ok:
        return None
    return VerificationSession(pk=pk, vp=vp, challenge=challenge)


def verify_continuous(session: VerificationSession, e: int, blacklist: Blacklist) -> bool:
    """Re-check a standing session at epoch e without re-verifying
    proofs. Raises SessionExpired once e passes the presentation's last
    epoch; the holder must present afresh."""
    if e > session.vp.epochs[-1]:
        raise SessionExpired(
            f"session period ended at epoch {session.vp.epochs[-1]}, now {e}"
        )
    return verify_revocation_status(e, session.vp, blacklist)

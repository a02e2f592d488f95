"""Time-limited continuous verification for verifiable credentials.

A holder proves, once per epoch, that their credential is neither
expired nor on the issuer's current blacklist, without revealing which
credential it is. Tokens are derived from a per-credential seed and
the epoch index, so tokens from different epochs are unlinkable; the
issuer publishes only the tokens of revoked credentials for the
current epoch.

Typical flow::

    backend = get_backend("relation-check")
    state, record = setup(SecurityParams(), EpochParams(ts0=0, dur=3600),
                          CircuitConfig(k=1), backend)
    vc = issue(state, Claims((("role", b"nurse"),)), exp=52, now=0)
    vp = present(backend, state.keys.pk, state.crs, state.cfg,
                 e=0, vc=vc, m=4, challenge=b"0" * 32)
    blacklist = refresh(state, 0)
    ok = verification(backend, state.keys.pk, state.crs, state.cfg,
                      0, blacklist, 4, vp, b"0" * 32)
"""

from .backend import (
    RELATION_CHECK_BACKEND_ID,
    ProofBackend,
    RelationCheckBackend,
    WitnessEscrow,
    get_backend,
)
from .crypto import (
    KeyPair,
    SeededRandom,
    SystemRandom,
    credential_digest,
    hash_bind,
    hash_claims,
    hash_token,
    keygen,
    keypair_from_secret,
    sign,
    verify,
)
from .errors import (
    AdversaryProtocolViolation,
    BadSignature,
    BlacklistEpochMismatch,
    ClockBeforeGenesis,
    CrsMismatch,
    EpochRegression,
    ExpInPast,
    ForeignCredential,
    MalformedEncoding,
    NotFound,
    RelationUnsatisfied,
    SessionExpired,
    UnsupportedConfig,
    ZkTokenError,
)
from .protocol import (
    IssuerState,
    PresentationExpiryWarning,
    VerificationResult,
    VerificationSession,
    VerifierPolicy,
    current_epoch,
    issue,
    present,
    refresh,
    revocation_status_reason,
    revoke,
    setup,
    signed_record,
    start_continuous_session,
    verification,
    verification_report,
    verify_continuous,
    verify_proofs,
    verify_revocation_status,
)
from .registry import FileRegistry, InMemoryRegistry, Registry
from .relation import (
    CircuitConfig,
    CircuitStatement,
    CircuitWitness,
    pad_block,
    relation_descriptor,
    relation_holds,
    relation_trace,
    split_blocks,
)
from .types import (
    Blacklist,
    Claims,
    CommonReferenceString,
    Credential,
    EpochParams,
    Presentation,
    Proof,
    RegistryRecord,
    RevList,
    SecurityParams,
    blocks_needed,
    decode,
    encode,
)

__version__ = "0.1.0"

__all__ = [
    "AdversaryProtocolViolation",
    "BadSignature",
    "Blacklist",
    "BlacklistEpochMismatch",
    "CircuitConfig",
    "CircuitStatement",
    "CircuitWitness",
    "Claims",
    "ClockBeforeGenesis",
    "CommonReferenceString",
    "Credential",
    "CrsMismatch",
    "EpochParams",
    "EpochRegression",
    "ExpInPast",
    "FileRegistry",
    "ForeignCredential",
    "InMemoryRegistry",
    "IssuerState",
    "KeyPair",
    "MalformedEncoding",
    "NotFound",
    "Presentation",
    "PresentationExpiryWarning",
    "Proof",
    "ProofBackend",
    "RELATION_CHECK_BACKEND_ID",
    "RegistryRecord",
    "Registry",
    "RelationCheckBackend",
    "RelationUnsatisfied",
    "RevList",
    "SecurityParams",
    "SeededRandom",
    "SessionExpired",
    "SystemRandom",
    "UnsupportedConfig",
    "VerificationResult",
    "VerificationSession",
    "VerifierPolicy",
    "WitnessEscrow",
    "ZkTokenError",
    "blocks_needed",
    "credential_digest",
    "current_epoch",
    "decode",
    "encode",
    "hash_bind",
    "hash_claims",
    "hash_token",
    "issue",
    "keygen",
    "keypair_from_secret",
    "pad_block",
    "present",
    "refresh",
    "relation_descriptor",
    "relation_holds",
    "relation_trace",
    "revocation_status_reason",
    "revoke",
    "setup",
    "sign",
    "signed_record",
    "split_blocks",
    "start_continuous_session",
    "verification",
    "verification_report",
    "verify",
    "verify_continuous",
    "verify_proofs",
    "verify_revocation_status",
]

"""Exception types raised across the package.

Every error that callers are expected to catch derives from ZkTokenError.
Boolean protocol outcomes (a failed verification, a failed relation check)
are returned as values, not raised; exceptions mark contract violations,
malformed inputs, or unavailable capabilities.
"""

from __future__ import annotations


class ZkTokenError(Exception):
    """Base class for all package errors."""


class MalformedEncoding(ZkTokenError):
    """Byte string does not decode to a valid value of the requested type."""


class RandomnessUnavailable(ZkTokenError):
    """The operating system refused to supply entropy."""


class InvalidKey(ZkTokenError):
    """Key material has the wrong length or is otherwise unusable."""


class EmptyBlock(ZkTokenError):
    """A proof block was requested over zero tokens."""


class UnsupportedConfig(ZkTokenError):
    """Configuration names a hash, signature scheme, backend, or batch size
    the installed backends cannot serve."""


class RelationUnsatisfied(ZkTokenError):
    """Witness does not satisfy the relation for the given statement."""


class CrsMismatch(ZkTokenError):
    """Reference string was produced for a different relation."""


class ExpInPast(ZkTokenError):
    """Requested credential expiration predates the current epoch."""


class ForeignCredential(ZkTokenError):
    """Credential was not issued under this issuer's key."""


class ClockBeforeGenesis(ZkTokenError):
    """Supplied timestamp predates the issuer's genesis timestamp."""


class BlacklistEpochMismatch(ZkTokenError):
    """Blacklist is for a different epoch than the check requires."""


class SessionExpired(ZkTokenError):
    """Continuous-verification session queried past its final epoch."""


class BadSignature(ZkTokenError):
    """Registry record signature does not verify under the record's key."""


class EpochRegression(ZkTokenError):
    """Publish would move an issuer's blacklist backwards in time."""


class NotFound(ZkTokenError):
    """No registry record exists for the requested key."""


class NoValidCredential(ZkTokenError):
    """Oracle has no unrevoked, unexpired credential to present."""


class AdversaryProtocolViolation(ZkTokenError):
    """Adversary returned output outside the game's allowed shapes."""

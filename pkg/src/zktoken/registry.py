"""Public-read, authenticated-write record store.

The registry is the rendezvous point between issuers and verifiers:
one record per issuer key, replaced wholesale on every publish. Writes
are authenticated by the record's own signature and must never move an
issuer's blacklist backwards in epoch; reads are anonymous and leave
no trace (nothing here logs or records fetches). The interface is
exactly publish and fetch.

Two implementations: an in-memory store for tests and the game
harness, and a directory-backed store (one file per issuer key,
atomically replaced) for CLI runs spanning processes.
"""

from __future__ import annotations

import os
import threading
from abc import ABC, abstractmethod
from pathlib import Path

from filelock import FileLock

from . import crypto
from .errors import BadSignature, EpochRegression, NotFound
from .types import RegistryRecord


def _check_record_sig(record: RegistryRecord, hash_id: str, sig_id: str) -> None:
    digest = crypto.record_digest(record.body(), hash_id)
    if not crypto.verify(record.pk, record.record_sig, digest, sig_id):
        raise BadSignature("record signature does not verify under its own pk")


def _check_monotonic(old: RegistryRecord | None, new: RegistryRecord) -> None:
    if old is not None and new.blacklist.epoch < old.blacklist.epoch:
        raise EpochRegression(
            f"blacklist epoch {new.blacklist.epoch} behind published {old.blacklist.epoch}"
        )


class Registry(ABC):
    """Store of one signed record per issuer key."""

    @abstractmethod
    def publish(self, record: RegistryRecord) -> None:
        """Validate and store a record, replacing any previous one for
        the same pk. Rejects bad signatures and epoch regressions."""

    @abstractmethod
    def fetch(self, pk: bytes) -> RegistryRecord:
        """Return the current record for pk. Raises NotFound."""


class InMemoryRegistry(Registry):
    def __init__(self, hash_id: str = "sha256", sig_id: str = "ed25519"):
        self._hash_id = hash_id
        self._sig_id = sig_id
        self._records: dict[bytes, bytes] = {}
        self._lock = threading.Lock()

    def publish(self, record: RegistryRecord) -> None:
        _check_record_sig(record, self._hash_id, self._sig_id)
        encoded = record.to_bytes()
        with self._lock:
            old = self._records.get(record.pk)
            _check_monotonic(
                RegistryRecord.from_bytes(old) if old is not None else None, record
            )
            self._records[record.pk] = encoded

    def fetch(self, pk: bytes) -> RegistryRecord:
        data = self._records.get(pk)
        if data is None:
            raise NotFound(f"no record for pk {pk.hex()}")
        return RegistryRecord.from_bytes(data)


class FileRegistry(Registry):
    """One `<hex(pk)>.rec` file per issuer under a directory. Publishes
    write a temp file and rename into place, guarded by a directory-wide
    lock so the monotonicity check and the replace are one step."""

    def __init__(self, directory, hash_id: str = "sha256", sig_id: str = "ed25519"):
        self._dir = Path(directory)
        self._dir.mkdir(parents=True, exist_ok=True)
        self._hash_id = hash_id
        self._sig_id = sig_id
        self._lock = FileLock(str(self._dir / ".publish.lock"))

    def _path(self, pk: bytes) -> Path:
        return self._dir / f"{pk.hex()}.rec"

    def publish(self, record: RegistryRecord) -> None:
        _check_record_sig(record, self._hash_id, self._sig_id)
        encoded = record.to_bytes()
        path = self._path(record.pk)
        with self._lock:
            old = None
            if path.exists():
                old = RegistryRecord.from_bytes(path.read_bytes())
            _check_monotonic(old, record)
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(encoded)
            os.replace(tmp, path)

    def fetch(self, pk: bytes) -> RegistryRecord:
        path = self._path(pk)
        try:
            data = path.read_bytes()
        except FileNotFoundError:
            raise NotFound(f"no record for pk {pk.hex()}") from None
        return RegistryRecord.from_bytes(data)

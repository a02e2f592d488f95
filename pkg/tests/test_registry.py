"""Registry contract: publish and fetch, nothing else.

Records are validated on publish (issuer signature, epoch
monotonicity) so a fetched record can be trusted to be well-formed
and newest-wins.
"""

import inspect

import pytest

from zktoken import crypto, protocol
from zktoken.backend import RelationCheckBackend
from zktoken.errors import BadSignature, EpochRegression, NotFound
from zktoken.registry import FileRegistry, InMemoryRegistry, Registry
from zktoken.relation import CircuitConfig
from zktoken.types import EpochParams, RegistryRecord, SecurityParams


def _issuer(seed_val=51):
    backend = RelationCheckBackend()
    state, record = protocol.setup(
        SecurityParams(), EpochParams(ts0=0, dur=3600), CircuitConfig(k=1),
        backend, rng=crypto.SeededRandom(seed_val),
    )
    return state, record


def test_abstract_surface_is_publish_and_fetch_only():
    methods = {
        name for name, member in inspect.getmembers(Registry)
        if not name.startswith("_") and callable(member)
    }
    assert methods == {"publish", "fetch"}


@pytest.fixture(params=["memory", "file"])
def registry(request, tmp_path):
    if request.param == "memory":
        return InMemoryRegistry()
    return FileRegistry(tmp_path / "reg")


def test_publish_then_fetch_bit_exact(registry):
    state, record = _issuer()
    registry.publish(record)
    fetched = registry.fetch(state.keys.pk)
    assert fetched == record
    assert fetched.to_bytes() == record.to_bytes()


def test_fetch_unknown_pk(registry):
    with pytest.raises(NotFound):
        registry.fetch(b"\x42" * 32)


def test_second_publish_replaces_first(registry):
    state, record = _issuer()
    registry.publish(record)
    bl = protocol.refresh(state, 3)
    newer = protocol.signed_record(state, bl)
    registry.publish(newer)
    assert registry.fetch(state.keys.pk) == newer


def test_epoch_regression_rejected(registry):
    state, record = _issuer()
    registry.publish(record)
    newer = protocol.signed_record(state, protocol.refresh(state, 3))
    registry.publish(newer)
    stale = protocol.signed_record(state, protocol.refresh(state, 2))
    with pytest.raises(EpochRegression):
        registry.publish(stale)
    assert registry.fetch(state.keys.pk) == newer


def test_same_epoch_republish_allowed(registry):
    state, record = _issuer()
    registry.publish(record)
    registry.publish(protocol.signed_record(state, protocol.refresh(state, 0)))


def test_bad_record_signature_rejected(registry):
    state, record = _issuer()
    flipped = bytes([record.record_sig[0] ^ 1]) + record.record_sig[1:]
    forged = RegistryRecord(
        pk=record.pk, crs=record.crs, ts0=record.ts0, dur=record.dur,
        k=record.k, blacklist=record.blacklist, record_sig=flipped,
    )
    with pytest.raises(BadSignature):
        registry.publish(forged)
    with pytest.raises(NotFound):
        registry.fetch(state.keys.pk)


def test_two_issuers_coexist(registry):
    s1, r1 = _issuer(seed_val=52)
    s2, r2 = _issuer(seed_val=53)
    registry.publish(r1)
    registry.publish(r2)
    assert registry.fetch(s1.keys.pk) == r1
    assert registry.fetch(s2.keys.pk) == r2


def test_file_registry_survives_reopen(tmp_path):
    state, record = _issuer()
    FileRegistry(tmp_path / "reg").publish(record)
    assert FileRegistry(tmp_path / "reg").fetch(state.keys.pk) == record

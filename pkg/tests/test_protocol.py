"""Issuer, holder, and verifier flows end to end, without a registry.

Setup builds an issuer; issue/revoke/refresh drive its state; present
and the verification family drive the holder and verifier sides. The
failure reason ordering matters: a presentation past its period reads
period-expired even if its credential was also revoked.
"""

import warnings
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from zktoken import crypto, protocol
from zktoken.backend import RelationCheckBackend
from zktoken.errors import (
    BlacklistEpochMismatch,
    ClockBeforeGenesis,
    ExpInPast,
    ForeignCredential,
    SessionExpired,
)
from zktoken.protocol import (
    REASON_BAD_PROOF,
    REASON_EXPIRED,
    REASON_PERIOD_EXPIRED,
    REASON_REVOKED,
    REASON_UNTRUSTED_ISSUER,
    PresentationExpiryWarning,
    VerifierPolicy,
)
from zktoken.relation import CircuitConfig
from zktoken.types import (
    Blacklist,
    Claims,
    EpochParams,
    SecurityParams,
    blocks_needed,
)


# current_epoch: the three fixed examples, then the closed form.

def test_current_epoch_exact_division():
    assert protocol.current_epoch(EpochParams(ts0=0, dur=86400), 172800) == 2


def test_current_epoch_floor():
    assert protocol.current_epoch(EpochParams(ts0=0, dur=86400), 172799) == 1


def test_current_epoch_at_genesis():
    assert protocol.current_epoch(EpochParams(ts0=1000, dur=60), 1000) == 0


def test_current_epoch_before_genesis():
    with pytest.raises(ClockBeforeGenesis):
        protocol.current_epoch(EpochParams(ts0=1000, dur=60), 999)


@given(st.integers(min_value=0, max_value=2**40),
       st.integers(min_value=1, max_value=2**20),
       st.integers(min_value=0, max_value=2**41))
def test_current_epoch_matches_rational_floor(ts0, dur, now):
    if now < ts0:
        with pytest.raises(ClockBeforeGenesis):
            protocol.current_epoch(EpochParams(ts0=ts0, dur=dur), now)
    else:
        want = int(Fraction(now - ts0, dur))
        assert protocol.current_epoch(EpochParams(ts0=ts0, dur=dur), now) == want


# Shared fixture: one issuer with k=2 tokens per proof block.

@pytest.fixture
def env():
    backend = RelationCheckBackend()
    params = SecurityParams()
    cfg = CircuitConfig(k=2)
    state, record = protocol.setup(
        params, EpochParams(ts0=0, dur=3600), cfg, backend,
        rng=crypto.SeededRandom(41),
    )
    return backend, state, record


def _issue(state, exp=50, now=0, seed_val=42):
    return protocol.issue(
        state, Claims((("role", b"nurse"), ("ward", b"3"))), exp, now,
        rng=crypto.SeededRandom(seed_val),
    )


def test_setup_record_is_self_consistent(env):
    backend, state, record = env
    assert record.pk == state.keys.pk
    assert record.crs == state.crs
    assert record.k == state.cfg.k
    assert record.blacklist == Blacklist(epoch=0, tokens=frozenset())
    assert crypto.verify(
        record.pk, record.record_sig, crypto.record_digest(record.body()),
    )


def test_setup_rejects_mismatched_hash_config(env):
    backend, state, _ = env
    with pytest.raises(Exception):
        protocol.setup(
            SecurityParams(hash_id="sha256"),
            EpochParams(ts0=0, dur=60),
            CircuitConfig(k=1, hash_id="poseidon"),
            backend,
        )


def test_issue_signs_credential_digest(env):
    _, state, _ = env
    vc = _issue(state)
    root, _ = crypto.hash_claims(vc.claims)
    digest = crypto.credential_digest(vc.seed, root, vc.exp)
    assert crypto.verify(state.keys.pk, vc.sig, digest)
    assert len(vc.seed) == state.params.seed_len


def test_issue_rejects_past_expiration(env):
    _, state, _ = env
    with pytest.raises(ExpInPast):
        _issue(state, exp=1, now=3600 * 10)


def test_issue_gives_distinct_seeds(env):
    _, state, _ = env
    a = _issue(state, seed_val=1)
    b = _issue(state, seed_val=2)
    assert a.seed != b.seed


def test_revoke_adds_seed_and_is_idempotent(env):
    _, state, _ = env
    vc = _issue(state)
    assert len(state.revlist) == 0
    protocol.revoke(state, vc)
    assert state.revlist.seeds == frozenset({vc.seed})
    protocol.revoke(state, vc)
    assert len(state.revlist) == 1


def test_revoke_rejects_foreign_credential(env):
    _, state, _ = env
    other_state, _ = protocol.setup(
        SecurityParams(), EpochParams(ts0=0, dur=3600), CircuitConfig(k=2),
        RelationCheckBackend(), rng=crypto.SeededRandom(43),
    )
    foreign = _issue(other_state)
    with pytest.raises(ForeignCredential):
        protocol.revoke(state, foreign)
    assert len(state.revlist) == 0


def test_refresh_publishes_tokens_of_revoked_seeds(env):
    _, state, _ = env
    vc1 = _issue(state, seed_val=1)
    vc2 = _issue(state, seed_val=2)
    protocol.revoke(state, vc1)
    protocol.revoke(state, vc2)
    bl = protocol.refresh(state, 5)
    assert bl.epoch == 5
    assert bl.tokens == frozenset({
        crypto.hash_token(vc1.seed, 5), crypto.hash_token(vc2.seed, 5),
    })


def test_refresh_empty_revlist_gives_empty_blacklist(env):
    _, state, _ = env
    assert protocol.refresh(state, 7) == Blacklist(epoch=7, tokens=frozenset())


def test_refresh_drops_expired_entries_first(env):
    _, state, _ = env
    stale = _issue(state, exp=4, seed_val=1)
    live = _issue(state, exp=50, seed_val=2)
    protocol.revoke(state, stale)
    protocol.revoke(state, live)
    bl = protocol.refresh(state, 5)
    assert bl.tokens == frozenset({crypto.hash_token(live.seed, 5)})
    assert state.revlist.seeds == frozenset({live.seed})


def test_present_shape_and_token_derivation(env):
    backend, state, _ = env
    vc = _issue(state)
    vp = protocol.present(
        backend, state.keys.pk, state.crs, state.cfg, 10, vc, 5,
        b"c" * 32, disclose=(0,), rng=crypto.SeededRandom(44),
    )
    assert vp.m == 5
    assert vp.epochs == (10, 11, 12, 13, 14)
    assert vp.tokens == tuple(crypto.hash_token(vc.seed, e) for e in vp.epochs)
    assert len(vp.proofs) == blocks_needed(5, state.cfg.k)
    assert vp.exp == vc.exp
    assert vp.disclosed == ((0, "role", b"nurse"),)
    root, per_claim = crypto.hash_claims(vc.claims)
    assert vp.claim_digests == per_claim


def test_present_single_epoch(env):
    backend, state, _ = env
    vc = _issue(state)
    vp = protocol.present(backend, state.keys.pk, state.crs, state.cfg,
                          0, vc, 1, b"c" * 32, rng=crypto.SeededRandom(44))
    assert vp.m == 1 and len(vp.tokens) == 1 and len(vp.proofs) == 1


def test_present_warns_when_period_outlives_credential(env):
    backend, state, _ = env
    vc = _issue(state, exp=11)
    with pytest.warns(PresentationExpiryWarning):
        protocol.present(backend, state.keys.pk, state.crs, state.cfg,
                         10, vc, 5, b"c" * 32, rng=crypto.SeededRandom(44))


def test_present_validates_arguments(env):
    backend, state, _ = env
    vc = _issue(state)
    with pytest.raises(ValueError):
        protocol.present(backend, state.keys.pk, state.crs, state.cfg,
                         0, vc, 0, b"c" * 32)
    with pytest.raises(ValueError):
        protocol.present(backend, state.keys.pk, state.crs, state.cfg,
                         0, vc, 1, b"")
    with pytest.raises(ValueError):
        protocol.present(backend, state.keys.pk, state.crs, state.cfg,
                         0, vc, 1, b"c" * 32, disclose=(9,))


def _present(env, e=10, m=5, challenge=b"c" * 32, exp=50):
    backend, state, _ = env
    vc = _issue(state, exp=exp)
    vp = protocol.present(backend, state.keys.pk, state.crs, state.cfg,
                          e, vc, m, challenge, disclose=(0,),
                          rng=crypto.SeededRandom(44))
    return vc, vp


def test_verify_proofs_accepts_honest(env):
    backend, state, _ = env
    _, vp = _present(env)
    assert protocol.verify_proofs(backend, state.keys.pk, state.crs,
                                  state.cfg, 5, vp, b"c" * 32)


def test_verify_proofs_rejects_wrong_challenge_and_m(env):
    backend, state, _ = env
    _, vp = _present(env)
    assert not protocol.verify_proofs(backend, state.keys.pk, state.crs,
                                      state.cfg, 5, vp, b"x" * 32)
    assert not protocol.verify_proofs(backend, state.keys.pk, state.crs,
                                      state.cfg, 4, vp, b"c" * 32)


def test_verify_proofs_rejects_altered_disclosure(env):
    import copy
    backend, state, _ = env
    _, vp = _present(env)
    bad = copy.copy(vp)
    object.__setattr__(bad, "disclosed", ((0, "role", b"admin"),))
    assert not protocol.verify_proofs(backend, state.keys.pk, state.crs,
                                      state.cfg, 5, bad, b"c" * 32)


def test_status_reasons_in_priority_order(env):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PresentationExpiryWarning)
        _, vp = _present(env, e=10, m=3, exp=11)

    def bl(epoch, tokens=frozenset()):
        return Blacklist(epoch=epoch, tokens=tokens)

    # in period, clean
    assert protocol.revocation_status_reason(10, vp, bl(10)) is None
    # past the period wins over everything
    assert protocol.revocation_status_reason(13, vp, bl(13)) == REASON_PERIOD_EXPIRED
    # expired: e in period but past vc.exp
    assert protocol.revocation_status_reason(12, vp, bl(12)) == REASON_EXPIRED
    # revoked: token on the list
    revoked = bl(11, frozenset({vp.tokens[1]}))
    assert protocol.revocation_status_reason(11, vp, revoked) == REASON_REVOKED


def test_status_requires_matching_blacklist_epoch(env):
    _, vp = _present(env)
    with pytest.raises(BlacklistEpochMismatch):
        protocol.verify_revocation_status(
            10, vp, Blacklist(epoch=9, tokens=frozenset()))


def test_verification_full_accept_and_reject(env):
    backend, state, _ = env
    vc, vp = _present(env)
    bl = protocol.refresh(state, 10)
    assert protocol.verification(backend, state.keys.pk, state.crs, state.cfg,
                                 10, bl, 5, vp, b"c" * 32)
    protocol.revoke(state, vc)
    bl = protocol.refresh(state, 11)
    report = protocol.verification_report(
        backend, state.keys.pk, state.crs, state.cfg, 11, bl, 5, vp, b"c" * 32)
    assert (report.ok, report.reason) == (False, REASON_REVOKED)


def test_verification_report_bad_proof_reason(env):
    backend, state, _ = env
    _, vp = _present(env)
    bl = protocol.refresh(state, 10)
    report = protocol.verification_report(
        backend, state.keys.pk, state.crs, state.cfg, 10, bl, 5, vp, b"z" * 32)
    assert (report.ok, report.reason) == (False, REASON_BAD_PROOF)


def test_policy_gates_untrusted_issuer(env):
    backend, state, _ = env
    _, vp = _present(env)
    bl = protocol.refresh(state, 10)
    policy = VerifierPolicy(trusted_issuers=frozenset({b"\x01" * 32}))
    report = protocol.verification_report(
        backend, state.keys.pk, state.crs, state.cfg, 10, bl, 5, vp,
        b"c" * 32, policy)
    assert (report.ok, report.reason) == (False, REASON_UNTRUSTED_ISSUER)


def test_policy_empty_set_requires_explicit_flag():
    with pytest.raises(ValueError):
        VerifierPolicy(trusted_issuers=frozenset())
    assert VerifierPolicy.allow_any().trusts(b"\x01" * 32)
    with pytest.raises(ValueError):
        VerifierPolicy.allow_any(epoch_tolerance=2)


def test_epoch_tolerance_accepts_previous_epoch(env):
    backend, state, _ = env
    _, vp = _present(env)
    prev = protocol.refresh(state, 10)
    policy = VerifierPolicy.allow_any(epoch_tolerance=1)
    report = protocol.verification_report(
        backend, state.keys.pk, state.crs, state.cfg, 11,
        Blacklist(epoch=11, tokens=frozenset()), 5, vp, b"c" * 32,
        policy, prev_blacklist=prev)
    assert report.ok
    # without tolerance the same call ignores the stale list
    strict = protocol.verification_report(
        backend, state.keys.pk, state.crs, state.cfg, 11,
        Blacklist(epoch=11, tokens=frozenset()), 5, vp, b"c" * 32,
        VerifierPolicy.allow_any(), prev_blacklist=prev)
    assert strict.ok  # still ok: the epoch-11 list itself is clean


def test_continuous_session_lifecycle(env):
    backend, state, _ = env
    vc, vp = _present(env, e=10, m=3)
    bl10 = protocol.refresh(state, 10)
    session = protocol.start_continuous_session(
        backend, state.keys.pk, state.crs, state.cfg, 10, bl10, 3, vp,
        b"c" * 32)
    assert session is not None
    assert protocol.verify_continuous(session, 11, protocol.refresh(state, 11))
    protocol.revoke(state, vc)
    assert not protocol.verify_continuous(session, 12, protocol.refresh(state, 12))
    with pytest.raises(SessionExpired):
        protocol.verify_continuous(session, 13, protocol.refresh(state, 13))


def test_continuous_session_refuses_bad_start(env):
    backend, state, _ = env
    _, vp = _present(env, e=10, m=3)
    bl = protocol.refresh(state, 10)
    assert protocol.start_continuous_session(
        backend, state.keys.pk, state.crs, state.cfg, 10, bl, 3, vp,
        b"wrong" * 8) is None

"""Untraceability game: oracles, trial mechanics, and the sanity bound.

The omniscient adversary receives both credential seeds out of band,
so it must win essentially always; that pins the game plumbing. The
realistic adversaries are exercised at full scale in the acceptance
tests, here we only check they run and stay within loose bounds.
"""

import random

import pytest

from zktoken import crypto, game, protocol
from zktoken.errors import AdversaryProtocolViolation, NoValidCredential


def _state(seed=61, **kw):
    return game.new_game_state(random.Random(seed), **kw)


def test_new_game_state_publishes_record_and_honest_credentials():
    st = _state(honest_holders=3)
    record = st.registry.fetch(st.pk)
    assert record.pk == st.pk
    assert len(st.q_h) == 3
    for vc in st.q_h:
        root, _ = crypto.hash_claims(vc.claims)
        digest = crypto.credential_digest(vc.seed, root, vc.exp)
        assert crypto.verify(st.pk, vc.sig, digest)
        assert vc.claims.labels() == ("bit",)


def test_genvc_grows_adversary_corpus():
    st = _state()
    a = game.oracle_genvc(st)
    b = game.oracle_genvc(st)
    assert st.q_c == [a, b]
    assert a.seed != b.seed


def test_revoke_oracle_covers_only_adversary_credentials():
    st = _state()
    vc = game.oracle_genvc(st)
    honest = st.q_h[0]
    assert game.oracle_revoke(st, honest) is None
    rl = game.oracle_revoke(st, vc)
    assert rl is not None and vc.seed in rl.seeds
    again = game.oracle_revoke(st, vc)
    assert again is not None and len(st.q_r) == 1


def test_refresh_oracle_publishes_blacklist():
    st = _state()
    vc = game.oracle_genvc(st)
    game.oracle_revoke(st, vc)
    e = st.current_epoch()
    bl = game.oracle_refresh(st, e)
    assert bl.epoch == e
    assert crypto.hash_token(vc.seed, e) in bl.tokens
    assert st.registry.fetch(st.pk).blacklist == bl


def test_genvp_yields_verifying_presentation():
    st = _state()
    e = st.current_epoch()
    vp = game.oracle_genvp(st, e, 3, b"c" * 32)
    assert vp.epochs[0] == e and vp.m == 3
    assert st.q_p == [vp]
    assert protocol.verify_proofs(st.backend, st.pk, st.crs, st.cfg, 3, vp,
                                  b"c" * 32)


def test_genvp_raises_when_pool_is_empty():
    st = _state(honest_holders=1)
    game.oracle_revoke(st, st.q_h[0])  # None: not the adversary's
    protocol.revoke(st.issuer, st.q_h[0])
    with pytest.raises(NoValidCredential):
        game.oracle_genvp(st, st.current_epoch(), 2, b"c" * 32)


def test_trial_returns_bool_and_is_seed_deterministic():
    adv = game.RandomGuessAdversary()
    a = [game.run_trial(adv, random.Random(i)) for i in range(10)]
    b = [game.run_trial(adv, random.Random(i)) for i in range(10)]
    assert a == b
    assert all(isinstance(x, bool) for x in a)


def test_omniscient_adversary_wins():
    report = game.run_untraceability_game(game.OmniscientAdversary(), 60, seed=62)
    assert report.successes >= 59


def test_realistic_adversaries_hover_near_half():
    for name in ("random", "token-matcher", "replay-prober"):
        report = game.run_untraceability_game(game.ADVERSARIES[name](), 100, seed=63)
        assert 30 <= report.successes <= 70, (name, report.successes)


def test_game_report_is_reproducible():
    a = game.run_untraceability_game(game.RandomGuessAdversary(), 50, seed=64)
    b = game.run_untraceability_game(game.RandomGuessAdversary(), 50, seed=64)
    assert (a.successes, a.rate) == (b.successes, b.rate)


class _ShortChallengeAdversary(game.Adversary):
    def run_queries(self, state, rng):
        return b"short", b"c" * 32, b""

    def guess(self, pkg):
        return 0


class _BadGuessAdversary(game.Adversary):
    def run_queries(self, state, rng):
        return b"c0" * 16, b"c1" * 16, b""

    def guess(self, pkg):
        return 2


def test_malformed_challenge_is_a_protocol_violation():
    with pytest.raises(AdversaryProtocolViolation):
        game.run_trial(_ShortChallengeAdversary(), random.Random(65))


def test_out_of_range_guess_is_a_protocol_violation():
    with pytest.raises(AdversaryProtocolViolation):
        game.run_trial(_BadGuessAdversary(), random.Random(66))


def test_adversary_names_registry():
    assert set(game.ADVERSARIES) == {
        "random", "token-matcher", "replay-prober", "omniscient",
    }

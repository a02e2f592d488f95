"""Indistinguishability game for revocation untraceability.

One trial: the challenger runs an issuer, keeps a pool of honest
credentials, and lets the adversary drive oracles (issue to itself,
revoke its own credentials, trigger refreshes, request presentations).
The adversary then supplies two challenges; the challenger picks two
distinct honest, unrevoked credentials, builds one presentation from
each, lets both verification periods lapse on the simulated clock,
flips a coin b, revokes credential b, refreshes, and hands the
adversary both presentations plus the new blacklist. The adversary
wins by naming b.

The scheme's claim is that past presentations go dark once their
period ends: the new blacklist holds tokens for the current epoch
only, and tokens from other epochs are unlinkable without the seed.
So every seedless adversary should sit at coin-flip success. The
omniscient adversary is handed the seeds through a side channel and
must win essentially always; it exists to prove the harness would
notice a tracing leak.

All trial randomness flows from one seed, so runs are reproducible.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import crypto, protocol
from .backend import ProofBackend, RelationCheckBackend
from .errors import AdversaryProtocolViolation, NoValidCredential
from .protocol import IssuerState
from .registry import InMemoryRegistry
from .relation import CircuitConfig
from .types import (
    Blacklist,
    Claims,
    CommonReferenceString,
    Credential,
    EpochParams,
    Presentation,
    RevList,
    SecurityParams,
)

# Issued credentials in the game live far past any verification period,
# so expiry never masks (or fakes) a revocation signal.
_EXP_HORIZON = 100_000
_MIN_CHALLENGE_LEN = 16


@dataclass
class GameState:
    rng: random.Random
    backend: ProofBackend
    issuer: IssuerState
    registry: InMemoryRegistry
    sim_now: int
    q_h: list[Credential] = field(default_factory=list)
    q_c: list[Credential] = field(default_factory=list)
    q_r: list[Credential] = field(default_factory=list)
    q_p: list[Presentation] = field(default_factory=list)

    @property
    def pk(self) -> bytes:
        return self.issuer.keys.pk

    @property
    def crs(self) -> CommonReferenceString:
        return self.issuer.crs

    @property
    def cfg(self) -> CircuitConfig:
        return self.issuer.cfg

    def current_epoch(self) -> int:
        return protocol.current_epoch(self.issuer.epoch_params, self.sim_now)


def new_game_state(
    rng: random.Random,
    honest_holders: int = 4,
    k: int = 1,
    dur: int = 86_400,
) -> GameState:
    backend = RelationCheckBackend()
    params = SecurityParams()
    cfg = CircuitConfig(k=k)
    issuer, record = protocol.setup(params, EpochParams(ts0=0, dur=dur), cfg, backend, rng=rng)
    registry = InMemoryRegistry()
    registry.publish(record)
    state = GameState(
        rng=rng, backend=backend, issuer=issuer, registry=registry, sim_now=0
    )
    for _ in range(honest_holders):
        state.q_h.append(_issue_bit_credential(state))
    return state


def _issue_bit_credential(state: GameState) -> Credential:
    claims = Claims((("bit", bytes([state.rng.randint(0, 1)])),))
    exp = state.current_epoch() + _EXP_HORIZON
    return protocol.issue(state.issuer, claims, exp, state.sim_now, rng=state.rng)


def oracle_genvc(state: GameState) -> Credential:
    """Issue a fresh single-bit credential to the adversary."""
    vc = _issue_bit_credential(state)
    state.q_c.append(vc)
    return vc


def oracle_revoke(state: GameState, vc: Credential) -> RevList | None:
    """Revoke one of the adversary's own credentials; anything else
    returns None. The adversary sees the updated revocation list, which
    only ever holds seeds it already knows."""
    if vc not in state.q_c:
        return None
    protocol.revoke(state.issuer, vc)
    if vc not in state.q_r:
        state.q_r.append(vc)
    return state.issuer.revlist


def oracle_refresh(state: GameState, e: int) -> Blacklist:
    """Refresh and publish the blacklist for epoch e."""
    blacklist = protocol.refresh(state.issuer, e)
    state.registry.publish(protocol.signed_record(state.issuer, blacklist))
    return blacklist


def oracle_genvp(state: GameState, e: int, m: int, challenge: bytes) -> Presentation:
    """Presentation from some valid credential in Q_h or Q_c."""
    revoked = state.issuer.revlist.seeds
    pool = [
        vc
        for vc in state.q_h + state.q_c
        if vc.seed not in revoked and vc.exp >= e + m - 1
    ]
    if not pool:
        raise NoValidCredential("no unrevoked, unexpired credential available")
    vc = state.rng.choice(pool)
    vp = protocol.present(
        state.backend, state.pk, state.crs, state.cfg, e, vc, m, challenge, rng=state.rng
    )
    state.q_p.append(vp)
    return vp


@dataclass(frozen=True)
class ChallengePackage:
    """Everything the adversary sees in the guess phase."""

    vp0: Presentation
    vp1: Presentation
    pk: bytes
    crs: CommonReferenceString
    blacklist: Blacklist
    state_a1: bytes
    backend: ProofBackend
    cfg: CircuitConfig
    rng: random.Random


class Adversary:
    """Two-phase adversary. run_queries may drive the oracles and must
    output two verifier challenges plus opaque state; guess names the
    revoked presentation."""

    name = "adversary"

    def run_queries(self, state: GameState, rng: random.Random) -> tuple[bytes, bytes, bytes]:
        raise NotImplementedError

    def guess(self, pkg: ChallengePackage) -> int:
        raise NotImplementedError


class RandomGuessAdversary(Adversary):
    name = "random"

    def run_queries(self, state, rng):
        return rng.randbytes(32), rng.randbytes(32), b""

    def guess(self, pkg):
        return pkg.rng.randint(0, 1)


class TokenMatchingAdversary(Adversary):
    """Looks for a byte-level match between presentation tokens and the
    published blacklist. The blacklist is derived at an epoch past both
    presentations' periods, so matches only happen by hash collision."""

    name = "token-matcher"

    def run_queries(self, state, rng):
        # Warm up the oracles: watch a known-revoked credential enter
        # the blacklist to learn what a hit would look like.
        vc = oracle_genvc(state)
        oracle_revoke(state, vc)
        oracle_refresh(state, state.current_epoch())
        return rng.randbytes(32), rng.randbytes(32), b""

    def guess(self, pkg):
        if set(pkg.vp0.tokens) & pkg.blacklist.tokens:
            return 0
        if set(pkg.vp1.tokens) & pkg.blacklist.tokens:
            return 1
        return pkg.rng.randint(0, 1)


class ReplayProbingAdversary(Adversary):
    """Replays both presentations through full verification against the
    fresh blacklist, hoping the revoked one fails differently. Both
    fail period-expired, so the probe is uninformative."""

    name = "replay-prober"

    def run_queries(self, state, rng):
        c0, c1 = rng.randbytes(32), rng.randbytes(32)
        return c0, c1, c0 + c1

    def guess(self, pkg):
        c0, c1 = pkg.state_a1[:32], pkg.state_a1[32:64]
        e = pkg.blacklist.epoch
        outcomes = []
        for vp, challenge in ((pkg.vp0, c0), (pkg.vp1, c1)):
            outcomes.append(
                protocol.verification(
                    pkg.backend, pkg.pk, pkg.crs, pkg.cfg, e, pkg.blacklist,
                    vp.m, vp, challenge,
                )
            )
        if outcomes[0] != outcomes[1]:
            # A presentation that still verifies is not the revoked one.
            return 1 if outcomes[0] else 0
        return pkg.rng.randint(0, 1)


class OmniscientAdversary(Adversary):
    """Sanity inversion: handed both challenge seeds out of band, it
    derives each seed's token at the blacklist epoch and looks it up.
    If this does not win, the harness could not detect real tracing."""

    name = "omniscient"

    def __init__(self):
        self._seeds: tuple[bytes, bytes] | None = None

    def receive_sanity_channel(self, seed0: bytes, seed1: bytes) -> None:
        self._seeds = (seed0, seed1)

    def run_queries(self, state, rng):
        return rng.randbytes(32), rng.randbytes(32), b""

    def guess(self, pkg):
        seed0, seed1 = self._seeds
        e = pkg.blacklist.epoch
        if crypto.hash_token(seed0, e) in pkg.blacklist.tokens:
            return 0
        if crypto.hash_token(seed1, e) in pkg.blacklist.tokens:
            return 1
        return pkg.rng.randint(0, 1)


def _check_challenge(c) -> bytes:
    if not isinstance(c, bytes) or len(c) < _MIN_CHALLENGE_LEN:
        raise AdversaryProtocolViolation(
            f"challenge must be bytes of at least {_MIN_CHALLENGE_LEN}"
        )
    return c


def run_trial(adversary: Adversary, trial_rng: random.Random, m_max: int = 4) -> bool:
    """One game trial; True when the adversary names b correctly."""
    state = new_game_state(trial_rng)
    adv_rng = random.Random(trial_rng.getrandbits(64))

    out = adversary.run_queries(state, adv_rng)
    if not isinstance(out, tuple) or len(out) != 3:
        raise AdversaryProtocolViolation("query phase must return (c0, c1, state)")
    c0, c1, state_a1 = out
    _check_challenge(c0)
    _check_challenge(c1)
    if not isinstance(state_a1, bytes):
        raise AdversaryProtocolViolation("adversary state must be bytes")

    revoked = state.issuer.revlist.seeds
    pool = [vc for vc in state.q_h if vc not in state.q_c and vc not in state.q_r
            and vc.seed not in revoked]
    assert all(vc in state.q_c for vc in state.q_r), "Q_r escaped Q_c"
    vc0, vc1 = trial_rng.sample(pool, 2)
    assert vc0 != vc1

    e = state.current_epoch()
    m0 = trial_rng.randint(1, m_max)
    m1 = trial_rng.randint(1, m_max)
    vp0 = protocol.present(
        state.backend, state.pk, state.crs, state.cfg, e, vc0, m0, c0, rng=trial_rng
    )
    vp1 = protocol.present(
        state.backend, state.pk, state.crs, state.cfg, e, vc1, m1, c1, rng=trial_rng
    )
    state.q_p += [vp0, vp1]

    # Let both verification periods lapse before the coin flip.
    state.sim_now += max(m0, m1) * state.issuer.epoch_params.dur
    e2 = state.current_epoch()
    assert e2 > max(vp0.epochs[-1], vp1.epochs[-1])

    b = trial_rng.randint(0, 1)
    protocol.revoke(state.issuer, (vc0, vc1)[b])
    blacklist = protocol.refresh(state.issuer, e2)
    state.registry.publish(protocol.signed_record(state.issuer, blacklist))

    if hasattr(adversary, "receive_sanity_channel"):
        adversary.receive_sanity_channel(vc0.seed, vc1.seed)

    pkg = ChallengePackage(
        vp0=vp0,
        vp1=vp1,
        pk=state.pk,
        crs=state.crs,
        blacklist=state.registry.fetch(state.pk).blacklist,
        state_a1=state_a1,
        backend=state.backend,
        cfg=state.cfg,
        rng=adv_rng,
    )
    guess = adversary.guess(pkg)
    if guess not in (0, 1):
        raise AdversaryProtocolViolation(f"guess must be 0 or 1, got {guess!r}")
    return guess == b


@dataclass(frozen=True)
class GameReport:
    adversary: str
    trials: int
    successes: int

    @property
    def rate(self) -> float:
        return self.successes / self.trials


def run_untraceability_game(adversary: Adversary, trials: int, seed: int) -> GameReport:
    """Run independent trials with per-trial rng derived from seed."""
    master = random.Random(seed)
    successes = 0
    for _ in range(trials):
        trial_rng = random.Random(master.getrandbits(64))
        if run_trial(adversary, trial_rng):
            successes += 1
    return GameReport(adversary=adversary.name, trials=trials, successes=successes)


ADVERSARIES = {
    "random": RandomGuessAdversary,
    "token-matcher": TokenMatchingAdversary,
    "replay-prober": ReplayProbingAdversary,
    "omniscient": OmniscientAdversary,
}

"""Executable protocol property suites.

Three suites back the scheme's claims with end-to-end runs that go
through a registry (publish, fetch, verify), not just in-process calls:

  completeness  honest lifecycles verify at every epoch of the period;
  soundness     nine tamper classes are all rejected;
  boundary      presentations go dark the epoch after their period.

Each suite returns counts, never asserts; tests pin the thresholds.
"""

from __future__ import annotations

import copy
import random
import warnings
from dataclasses import dataclass, field

from . import backend as backend_mod
from . import crypto, protocol
from .backend import RelationCheckBackend
from .errors import MalformedEncoding
from .protocol import PresentationExpiryWarning
from .registry import InMemoryRegistry, Registry
from .relation import CircuitConfig, CircuitStatement, CircuitWitness, split_blocks
from .types import (
    Claims,
    Credential,
    EpochParams,
    Presentation,
    Proof,
    SecurityParams,
    decode,
)

TAMPER_CLASSES = (
    "revoked",
    "expired",
    "forged-sig",
    "mutated-token",
    "mutated-claims",
    "mutated-exp",
    "replayed-challenge",
    "m-mismatch",
    "nonconsecutive-epochs",
)


@dataclass
class SuiteReport:
    name: str
    passed: int = 0
    total: int = 0
    failures: list[str] = field(default_factory=list)

    def record(self, ok: bool, detail: str = "") -> None:
        self.total += 1
        if ok:
            self.passed += 1
        elif len(self.failures) < 10:
            self.failures.append(detail)

    @property
    def all_passed(self) -> bool:
        return self.passed == self.total


@dataclass
class _Env:
    """One issuer wired to a registry, plus the holder's fetched view."""

    rng: random.Random
    backend: RelationCheckBackend
    issuer: protocol.IssuerState
    registry: Registry
    cfg: CircuitConfig

    @property
    def pk(self) -> bytes:
        return self.issuer.keys.pk


def _mk_env(rng: random.Random, k: int, registry: Registry | None = None, dur: int = 3600) -> _Env:
    backend = RelationCheckBackend()
    cfg = CircuitConfig(k=k)
    issuer, record = protocol.setup(
        SecurityParams(), EpochParams(ts0=0, dur=dur), cfg, backend, rng=rng
    )
    registry = registry if registry is not None else InMemoryRegistry()
    registry.publish(record)
    return _Env(rng=rng, backend=backend, issuer=issuer, registry=registry, cfg=cfg)


def _rand_claims(rng: random.Random) -> Claims:
    n = rng.randint(1, 4)
    return Claims(
        tuple((f"c{i}", rng.randbytes(rng.randint(0, 12))) for i in range(n))
    )


def _refresh_publish(env: _Env, e: int):
    blacklist = protocol.refresh(env.issuer, e)
    env.registry.publish(protocol.signed_record(env.issuer, blacklist))
    return env.registry.fetch(env.pk)


def _present_via_registry(env: _Env, vc: Credential, e: int, m: int, challenge: bytes,
                          disclose=()):
    record = env.registry.fetch(env.pk)
    cfg = CircuitConfig(k=record.k, hash_id=env.cfg.hash_id, sig_id=env.cfg.sig_id)
    vp = protocol.present(
        env.backend, record.pk, record.crs, cfg, e, vc, m, challenge,
        disclose=disclose, rng=env.rng,
    )
    return vp, record


def run_completeness_suite(trials: int, seed: int, registry: Registry | None = None,
                           m_max: int = 5, k_max: int = 3) -> SuiteReport:
    """Randomized honest lifecycles. A trial passes when full
    verification succeeds at every epoch of the period and the
    continuous-session recheck agrees at each later epoch."""
    master = random.Random(seed)
    report = SuiteReport("completeness")
    for t in range(trials):
        rng = random.Random(master.getrandbits(64))
        env = _mk_env(rng, k=rng.randint(1, k_max), registry=registry)
        e0 = rng.randint(0, 50)
        now = env.issuer.epoch_params.ts0 + e0 * env.issuer.epoch_params.dur
        m = rng.randint(1, m_max)
        claims = _rand_claims(rng)
        vc = protocol.issue(
            env.issuer, claims, e0 + m + rng.randint(0, 5), now, rng=rng
        )
        challenge = rng.randbytes(32)
        disclose = tuple(i for i in range(len(claims)) if rng.random() < 0.5)
        vp, record = _present_via_registry(env, vc, e0, m, challenge, disclose)
        cfg = CircuitConfig(k=record.k)
        session = None
        ok = True
        for e in range(e0, e0 + m):
            rec = _refresh_publish(env, e)
            valid = protocol.verification(
                env.backend, rec.pk, rec.crs, cfg, e, rec.blacklist, m, vp, challenge
            )
            if session is None:
                session = protocol.start_continuous_session(
                    env.backend, rec.pk, rec.crs, cfg, e, rec.blacklist, m, vp, challenge
                )
                valid = valid and session is not None
            else:
                valid = valid and protocol.verify_continuous(session, e, rec.blacklist)
            if not valid:
                ok = False
                break
        report.record(ok, f"trial {t}: failed at honest verification")
    return report


def _honest_vp(env: _Env, rng: random.Random, e0: int, m: int):
    now = env.issuer.epoch_params.ts0 + e0 * env.issuer.epoch_params.dur
    vc = protocol.issue(env.issuer, _rand_claims(rng), e0 + m + 3, now, rng=rng)
    challenge = rng.randbytes(32)
    disclose = (0,)
    vp, record = _present_via_registry(env, vc, e0, m, challenge, disclose)
    return vc, vp, challenge, record


def _verify_at(env: _Env, e: int, m: int, vp: Presentation, challenge: bytes) -> bool:
    rec = _refresh_publish(env, e)
    cfg = CircuitConfig(k=rec.k)
    return protocol.verification(
        env.backend, rec.pk, rec.crs, cfg, e, rec.blacklist, m, vp, challenge
    )


def _forged_sig_case(env: _Env, rng: random.Random, e0: int, m: int, poison: bool) -> bool:
    """Adversarial presentation from a credential whose signature is
    garbage. Tokens, nonce, and binding hash are all computed honestly;
    only the witness cannot satisfy the relation. Returns True when the
    verifier rejects."""
    record = env.registry.fetch(env.pk)
    cfg = CircuitConfig(k=record.k)
    claims = _rand_claims(rng)
    seed = rng.randbytes(32)
    exp = e0 + m + 3
    forged = Credential(seed=seed, claims=claims, exp=exp, sig=rng.randbytes(64))
    challenge = rng.randbytes(32)
    nonce = rng.randbytes(32)
    h = crypto.hash_bind(challenge, nonce)
    root, digests = crypto.hash_claims(claims)
    epochs = tuple(range(e0, e0 + m))
    tokens = tuple(crypto.hash_token(seed, e) for e in epochs)
    witness = CircuitWitness(sig=forged.sig, seed=seed, nonce=nonce)
    proofs = []
    for block_tokens, block_epochs in split_blocks(tokens, epochs, cfg.k):
        x = CircuitStatement(
            pk=record.pk, h=h, challenge=challenge, epochs=block_epochs,
            tokens=block_tokens, exp=exp, claims_digest=root,
        )
        if poison:
            # White-box attempt: plant the bad witness in the escrow and
            # MAC the statement honestly, so rejection can only come
            # from the backend re-checking the relation itself.
            key = backend_mod._mac_key(witness)
            key_id = backend_mod._key_id(key)
            env.backend.escrow.put(key_id, witness)
            tag = backend_mod._mac(key, record.crs.relation_digest, x.to_bytes())
            proofs.append(Proof(backend_id=env.backend.backend_id, body=key_id + tag))
        else:
            proofs.append(Proof(backend_id=env.backend.backend_id, body=rng.randbytes(64)))
    vp = Presentation(
        m=m, epochs=epochs, tokens=tokens, h=h, exp=exp,
        claim_digests=digests, disclosed=(), proofs=tuple(proofs),
    )
    return not _verify_at(env, e0, m, vp, challenge)


def _bypass_replace(vp: Presentation, **fields) -> Presentation:
    """Build a structurally invalid presentation without tripping the
    constructor, to exercise verifier-side re-checks."""
    bad = copy.copy(vp)
    for name, value in fields.items():
        object.__setattr__(bad, name, value)
    return bad


def run_soundness_suite(per_class: int, seed: int,
                        registry: Registry | None = None) -> dict[str, SuiteReport]:
    """Every tamper class must be rejected end to end. A case passes
    when verification returns False (or the tampered encoding refuses
    to decode, for byte-level tampers)."""
    master = random.Random(seed)
    reports = {name: SuiteReport(name) for name in TAMPER_CLASSES}

    for i in range(per_class):
        rng = random.Random(master.getrandbits(64))
        e0 = rng.randint(0, 20)
        m = rng.randint(2, 5)
        k = rng.choice((1, 2, 4))

        env = _mk_env(rng, k=k, registry=registry)
        vc, vp, challenge, record = _honest_vp(env, rng, e0, m)
        cfg = CircuitConfig(k=record.k)

        # revoked: revoke after presenting; next refresh must kill it.
        protocol.revoke(env.issuer, vc)
        reports["revoked"].record(
            not _verify_at(env, e0, m, vp, challenge), f"case {i}: revoked accepted"
        )

        # expired: credential whose exp precedes the verification epoch.
        env2 = _mk_env(rng, k=k, registry=registry)
        now0 = env2.issuer.epoch_params.ts0
        vc2 = protocol.issue(env2.issuer, _rand_claims(rng), 0, now0, rng=rng)
        rec2 = env2.registry.fetch(env2.pk)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PresentationExpiryWarning)
            vp2 = protocol.present(
                env2.backend, rec2.pk, rec2.crs, CircuitConfig(k=rec2.k),
                1, vc2, m, challenge, rng=rng,
            )
        reports["expired"].record(
            not _verify_at(env2, 1, m, vp2, challenge), f"case {i}: expired accepted"
        )

        # forged-sig: alternate random proof bodies and escrow poisoning.
        env3 = _mk_env(rng, k=k, registry=registry)
        reports["forged-sig"].record(
            _forged_sig_case(env3, rng, e0, m, poison=bool(i % 2)),
            f"case {i}: forged signature accepted",
        )

        # The remaining classes tamper with the honest vp; re-verify
        # against a fresh issuer so earlier revocation doesn't mask them.
        env4 = _mk_env(rng, k=k, registry=registry)
        vc4, vp4, ch4, rec4 = _honest_vp(env4, rng, e0, m)

        j = rng.randrange(m)
        flipped = bytearray(vp4.tokens[j])
        flipped[rng.randrange(32)] ^= 0xFF
        bad_tokens = vp4.tokens[:j] + (bytes(flipped),) + vp4.tokens[j + 1 :]
        reports["mutated-token"].record(
            not _verify_at(env4, e0, m, _bypass_replace(vp4, tokens=bad_tokens), ch4),
            f"case {i}: mutated token accepted",
        )

        if i % 2 == 0:
            idx, label, value = vp4.disclosed[0]
            bad_disc = ((idx, label, value + b"x"),) + vp4.disclosed[1:]
            tampered = _bypass_replace(vp4, disclosed=bad_disc)
        else:
            dj = rng.randrange(len(vp4.claim_digests))
            twisted = bytearray(vp4.claim_digests[dj])
            twisted[0] ^= 0x01
            bad_digests = (
                vp4.claim_digests[:dj] + (bytes(twisted),) + vp4.claim_digests[dj + 1 :]
            )
            tampered = _bypass_replace(vp4, claim_digests=bad_digests)
        reports["mutated-claims"].record(
            not _verify_at(env4, e0, m, tampered, ch4),
            f"case {i}: mutated claims accepted",
        )

        reports["mutated-exp"].record(
            not _verify_at(env4, e0, m, _bypass_replace(vp4, exp=vp4.exp + 1), ch4),
            f"case {i}: mutated exp accepted",
        )

        reports["replayed-challenge"].record(
            not _verify_at(env4, e0, m, vp4, rng.randbytes(32)),
            f"case {i}: replayed challenge accepted",
        )

        wrong_m = m + 1 if i % 2 == 0 else m - 1
        reports["m-mismatch"].record(
            not _verify_at(env4, e0, wrong_m, vp4, ch4),
            f"case {i}: m mismatch accepted",
        )

        # Byte-level tamper: bump one inner epoch so the sequence gaps.
        raw = bytearray(vp4.to_bytes())
        off = 1 + 4 + 8  # version, m, first epoch
        raw[off : off + 8] = int.to_bytes(
            vp4.epochs[1] + 1 + rng.randint(1, 9), 8, "little"
        )
        try:
            decode(bytes(raw), Presentation)
            decoded_rejected = False
        except MalformedEncoding:
            decoded_rejected = True
        gapped = vp4.epochs[:1] + tuple(e + 2 for e in vp4.epochs[1:])
        verifier_rejected = not protocol.verify_proofs(
            env4.backend, rec4.pk, rec4.crs, CircuitConfig(k=rec4.k), m,
            _bypass_replace(vp4, epochs=gapped), ch4,
        )
        reports["nonconsecutive-epochs"].record(
            decoded_rejected and verifier_rejected,
            f"case {i}: non-consecutive epochs accepted",
        )

    return reports


def run_boundary_suite(trials: int, seed: int,
                       registry: Registry | None = None) -> SuiteReport:
    """Traceability window: one epoch past the period, verification
    must fail with exactly the period-expired reason, revoked or not."""
    master = random.Random(seed)
    report = SuiteReport("boundary")
    for t in range(trials):
        rng = random.Random(master.getrandbits(64))
        env = _mk_env(rng, k=rng.choice((1, 2)), registry=registry)
        e0 = rng.randint(0, 20)
        m = rng.randint(1, 5)
        vc, vp, challenge, record = _honest_vp(env, rng, e0, m)
        if rng.random() < 0.5:
            protocol.revoke(env.issuer, vc)
        e_after = e0 + m
        rec = _refresh_publish(env, e_after)
        result = protocol.verification_report(
            env.backend, rec.pk, rec.crs, CircuitConfig(k=rec.k),
            e_after, rec.blacklist, m, vp, challenge,
        )
        report.record(
            not result.ok and result.reason == protocol.REASON_PERIOD_EXPIRED,
            f"trial {t}: expected period-expired, got {result}",
        )
    return report

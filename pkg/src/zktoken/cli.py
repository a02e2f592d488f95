"""Command-line front end wiring all roles against a shared registry.

Issuer commands (setup, issue, revoke, refresh) keep their private
state in a local file; holder and verifier commands (present, verify)
discover issuer material by public key through the registry directory,
given by --registry or the ZKTOKEN_REGISTRY environment variable.

Determinism: --clock fixed:<seconds> pins the clock and --seed pins
all randomness, making every command reproducible byte for byte.

Exit codes: 0 success, 1 verification failure or domain validation
error (stdout carries a single machine-readable reason token), 2 IO,
format, or configuration error.

The relation-check backend needs its witness escrow on the verifier
side, so present writes one next to the presentation; that file holds
the credential seed in the clear and exists only for test and bench
deployments of this backend.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
import warnings
from pathlib import Path

from . import bench as bench_mod
from . import crypto, game, protocol
from .backend import WitnessEscrow, get_backend
from .encoding import ByteReader, lp, u8, u32, u64
from .errors import (
    MalformedEncoding,
    NotFound,
    UnsupportedConfig,
    ZkTokenError,
)
from .protocol import PresentationExpiryWarning, VerifierPolicy
from .registry import FileRegistry
from .relation import CircuitConfig, relation_descriptor
from .types import (
    Claims,
    CommonReferenceString,
    Credential,
    EpochParams,
    Presentation,
    RevList,
    SecurityParams,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_IO = 2

REGISTRY_ENV = "ZKTOKEN_REGISTRY"
_STATE_VERSION = 1
_SESSION_VERSION = 1


def _clock_from(arg: str):
    if arg == "system":
        return lambda: int(time.time())
    if arg.startswith("fixed:"):
        at = int(arg.split(":", 1)[1])
        return lambda: at
    raise UnsupportedConfig(f"bad --clock value: {arg!r} (use system or fixed:<seconds>)")


def _rng_from(args):
    if args.seed is not None:
        return crypto.SeededRandom(args.seed)
    return crypto.SECURE_RANDOM


def _registry_from(args) -> FileRegistry:
    directory = args.registry or os.environ.get(REGISTRY_ENV)
    if not directory:
        raise UnsupportedConfig(
            f"no registry configured: pass --registry or set {REGISTRY_ENV}"
        )
    return FileRegistry(directory)


def _write_private(path, data: bytes) -> None:
    p = Path(path)
    p.write_bytes(data)
    os.chmod(p, 0o600)


def _debug_value(value):
    if isinstance(value, bytes):
        return value.hex()
    if isinstance(value, (frozenset, set)):
        return sorted(_debug_value(v) for v in value)
    if isinstance(value, (list, tuple)):
        return [_debug_value(v) for v in value]
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            f.name: _debug_value(getattr(value, f.name))
            for f in dataclasses.fields(value)
        }
    return value


def _emit_debug(args, label: str, obj) -> None:
    if args.output == "debug-json":
        print(json.dumps({label: _debug_value(obj)}, indent=2))


# Issuer state file: everything needed to resume the issuer role.

def save_issuer_state(state: protocol.IssuerState, path) -> None:
    out = bytearray(u8(_STATE_VERSION))
    out += u32(state.params.lambda_bits)
    out += lp(state.params.hash_id.encode())
    out += lp(state.params.sig_id.encode())
    out += u64(state.epoch_params.ts0)
    out += u64(state.epoch_params.dur)
    out += u32(state.cfg.k)
    out += lp(state.keys.sk)
    out += lp(state.keys.pk)
    out += state.crs.to_bytes()
    out += state.revlist.to_bytes()
    _write_private(path, bytes(out))


def load_issuer_state(path) -> protocol.IssuerState:
    r = ByteReader(Path(path).read_bytes())
    if r.u8() != _STATE_VERSION:
        raise MalformedEncoding("unsupported issuer state version")
    lambda_bits = r.u32()
    hash_id = r.lp().decode()
    sig_id = r.lp().decode()
    ts0 = r.u64()
    dur = r.u64()
    k = r.u32()
    sk = r.lp()
    pk = r.lp()
    crs = CommonReferenceString.read_from(r)
    revlist = RevList.from_bytes(r.take(r.remaining()))
    return protocol.IssuerState(
        params=SecurityParams(lambda_bits=lambda_bits, hash_id=hash_id, sig_id=sig_id),
        epoch_params=EpochParams(ts0=ts0, dur=dur),
        cfg=CircuitConfig(k=k, hash_id=hash_id, sig_id=sig_id),
        keys=crypto.KeyPair(sk=sk, pk=pk),
        crs=crs,
        revlist=revlist,
    )


def save_session(path, pk: bytes, m: int, challenge: bytes, vp: Presentation) -> None:
    out = u8(_SESSION_VERSION) + lp(pk) + u32(m) + lp(challenge) + lp(vp.to_bytes())
    _write_private(path, out)


def load_session(path) -> tuple[bytes, int, bytes, Presentation]:
    r = ByteReader(Path(path).read_bytes())
    if r.u8() != _SESSION_VERSION:
        raise MalformedEncoding("unsupported session version")
    pk = r.lp()
    m = r.u32()
    challenge = r.lp()
    vp = Presentation.from_bytes(r.lp())
    r.expect_end()
    return pk, m, challenge, vp


def _parse_claims(pairs) -> Claims:
    entries = []
    for pair in pairs or ():
        if "=" not in pair:
            raise ValueError(f"claim must be label=value, got {pair!r}")
        label, value = pair.split("=", 1)
        entries.append((label, value.encode("utf-8")))
    return Claims(tuple(entries))


def _cfg_for_record(record, args) -> CircuitConfig:
    return CircuitConfig(k=record.k, hash_id=args.hash, sig_id=args.sig)


def cmd_setup(args) -> int:
    clock = _clock_from(args.clock)
    ts0 = args.ts0 if args.ts0 is not None else clock()
    params = SecurityParams(
        lambda_bits=args.lambda_bits, hash_id=args.hash, sig_id=args.sig
    )
    cfg = CircuitConfig(k=args.k, hash_id=args.hash, sig_id=args.sig)
    backend = get_backend(args.backend, hash_id=args.hash, sig_id=args.sig)
    state, record = protocol.setup(
        params, EpochParams(ts0=ts0, dur=args.dur), cfg, backend, rng=_rng_from(args)
    )
    _registry_from(args).publish(record)
    save_issuer_state(state, args.state)
    Path(str(args.state) + ".relation.txt").write_text(relation_descriptor(cfg))
    _emit_debug(args, "record", record)
    print(state.keys.pk.hex())
    return EXIT_OK


def cmd_issue(args) -> int:
    state = load_issuer_state(args.state)
    vc = protocol.issue(
        state, _parse_claims(args.claim), args.exp, _clock_from(args.clock)(),
        rng=_rng_from(args),
    )
    _write_private(args.out, vc.to_bytes())
    _emit_debug(args, "credential", vc)
    print(state.keys.pk.hex())
    return EXIT_OK


def cmd_revoke(args) -> int:
    state = load_issuer_state(args.state)
    vc = Credential.from_bytes(Path(args.vc).read_bytes())
    protocol.revoke(state, vc)
    save_issuer_state(state, args.state)
    print(f"revoked; list holds {len(state.revlist)}")
    return EXIT_OK


def cmd_refresh(args) -> int:
    state = load_issuer_state(args.state)
    e = protocol.current_epoch(state.epoch_params, _clock_from(args.clock)())
    blacklist = protocol.refresh(state, e)
    _registry_from(args).publish(protocol.signed_record(state, blacklist))
    save_issuer_state(state, args.state)
    _emit_debug(args, "blacklist", blacklist)
    print(f"epoch {e}: {len(blacklist.tokens)} tokens published")
    return EXIT_OK


def cmd_present(args) -> int:
    record = _registry_from(args).fetch(bytes.fromhex(args.issuer))
    vc = Credential.from_bytes(Path(args.vc).read_bytes())
    e = protocol.current_epoch(
        EpochParams(ts0=record.ts0, dur=record.dur), _clock_from(args.clock)()
    )
    backend = get_backend(args.backend, hash_id=args.hash, sig_id=args.sig)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PresentationExpiryWarning)
        vp = protocol.present(
            backend, record.pk, record.crs, _cfg_for_record(record, args),
            e, vc, args.m, bytes.fromhex(args.challenge),
            disclose=tuple(args.disclose or ()), rng=_rng_from(args),
        )
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    Path(args.out).write_bytes(vp.to_bytes())
    escrow_path = args.escrow_out or (str(args.out) + ".witness")
    backend.escrow.save(escrow_path)
    os.chmod(escrow_path, 0o600)
    _emit_debug(args, "presentation", vp)
    print(f"epoch {e}: {len(vp.proofs)} proofs over {vp.m} epochs")
    return EXIT_OK


def _load_verify_inputs(args):
    registry = _registry_from(args)
    record = registry.fetch(bytes.fromhex(args.issuer))
    e = protocol.current_epoch(
        EpochParams(ts0=record.ts0, dur=record.dur), _clock_from(args.clock)()
    )
    return record, e


def _policy_from(args) -> VerifierPolicy:
    trusted = frozenset(bytes.fromhex(pk) for pk in (args.trust or ()))
    if trusted:
        return VerifierPolicy(
            trusted_issuers=trusted, epoch_tolerance=args.epoch_tolerance
        )
    return VerifierPolicy.allow_any(epoch_tolerance=args.epoch_tolerance)


def cmd_request_challenge(args) -> int:
    print(_rng_from(args).randbytes(32).hex())
    return EXIT_OK


def cmd_verify_presentation(args) -> int:
    record, e = _load_verify_inputs(args)
    vp = Presentation.from_bytes(Path(args.vp).read_bytes())
    escrow_path = args.escrow or (str(args.vp) + ".witness")
    backend = get_backend(
        args.backend, escrow=WitnessEscrow.load(escrow_path),
        hash_id=args.hash, sig_id=args.sig,
    )
    policy = _policy_from(args)
    m = args.m if args.m is not None else vp.m
    challenge = bytes.fromhex(args.challenge)

    blacklist = record.blacklist
    e_check = e
    if blacklist.epoch != e:
        if policy.epoch_tolerance == 1 and blacklist.epoch == e - 1:
            e_check = e - 1
        else:
            print("stale-blacklist")
            return EXIT_FAIL
    result = protocol.verification_report(
        backend, record.pk, record.crs, _cfg_for_record(record, args),
        e_check, blacklist, m, vp, challenge, policy,
    )
    if not result.ok:
        print(result.reason)
        return EXIT_FAIL
    if args.session_out:
        save_session(args.session_out, record.pk, m, challenge, vp)
    print("valid")
    return EXIT_OK


def cmd_verify_continuous(args) -> int:
    pk, m, challenge, vp = load_session(args.session)
    registry = _registry_from(args)
    record = registry.fetch(pk)
    e = protocol.current_epoch(
        EpochParams(ts0=record.ts0, dur=record.dur), _clock_from(args.clock)()
    )
    if record.blacklist.epoch != e:
        print("stale-blacklist")
        return EXIT_FAIL
    session = protocol.VerificationSession(pk=pk, vp=vp, challenge=challenge)
    try:
        ok = protocol.verify_continuous(session, e, record.blacklist)
    except protocol.SessionExpired:
        print(protocol.REASON_PERIOD_EXPIRED)
        return EXIT_FAIL
    if not ok:
        reason = protocol.revocation_status_reason(e, vp, record.blacklist)
        print(reason)
        return EXIT_FAIL
    print("valid")
    return EXIT_OK


def cmd_game(args) -> int:
    try:
        adversary = game.ADVERSARIES[args.adversary]()
    except KeyError:
        raise UnsupportedConfig(f"unknown adversary: {args.adversary}") from None
    report = game.run_untraceability_game(adversary, args.trials, args.seed or 0)
    if args.json:
        print(json.dumps({
            "adversary": report.adversary, "trials": report.trials,
            "successes": report.successes, "rate": report.rate,
        }))
    else:
        print(f"{report.adversary}: {report.successes}/{report.trials}"
              f" (rate {report.rate:.4f})")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.config:
        cfg = bench_mod.BenchConfig.from_json(Path(args.config).read_text())
    else:
        cfg = bench_mod.BenchConfig()
    rows = bench_mod.run_metrics(cfg, seed=args.seed or 0)
    text = bench_mod.rows_to_json(rows) if args.json else bench_mod.rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
        print(f"{len(rows)} rows written to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--registry", help=f"registry directory (or ${REGISTRY_ENV})")
    parser.add_argument("--clock", default="system",
                        help="system or fixed:<seconds>")
    parser.add_argument("--seed", type=int, help="deterministic randomness")
    parser.add_argument("--backend", default="relation-check",
                        choices=("relation-check", "snark"))
    parser.add_argument("--hash", default="sha256")
    parser.add_argument("--sig", default="ed25519")
    parser.add_argument("--output", default="binary",
                        choices=("binary", "debug-json"),
                        help="debug-json additionally prints written objects")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zktoken",
        description="Epoch-bound revocation tokens for verifiable credentials",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("setup", help="create an issuer and publish its record")
    _add_common(p)
    p.add_argument("--state", required=True, help="issuer state file to write")
    p.add_argument("--dur", required=True, type=int, help="epoch duration, seconds")
    p.add_argument("--ts0", type=int, help="genesis timestamp (default: now)")
    p.add_argument("--k", type=int, default=1, help="tokens per proof block")
    p.add_argument("--lambda-bits", type=int, default=256, dest="lambda_bits")
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("issue", help="issue a credential")
    _add_common(p)
    p.add_argument("--state", required=True)
    p.add_argument("--claim", action="append", metavar="LABEL=VALUE")
    p.add_argument("--exp", required=True, type=int, help="inclusive expiration epoch")
    p.add_argument("--out", required=True, help="credential file to write")
    p.set_defaults(func=cmd_issue)

    p = sub.add_parser("revoke", help="revoke a credential (takes effect on refresh)")
    _add_common(p)
    p.add_argument("--state", required=True)
    p.add_argument("--vc", required=True)
    p.set_defaults(func=cmd_revoke)

    p = sub.add_parser("refresh", help="publish the blacklist for the current epoch")
    _add_common(p)
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_refresh)

    p = sub.add_parser("present", help="build a presentation for m epochs")
    _add_common(p)
    p.add_argument("--vc", required=True)
    p.add_argument("--issuer", required=True, help="issuer public key, hex")
    p.add_argument("--challenge", required=True, help="verifier challenge, hex")
    p.add_argument("--m", required=True, type=int)
    p.add_argument("--disclose", action="append", type=int, metavar="INDEX")
    p.add_argument("--out", required=True)
    p.add_argument("--escrow-out", help="witness escrow path (default: <out>.witness)")
    p.set_defaults(func=cmd_present)

    p = sub.add_parser("verify", help="verifier-side operations")
    vsub = p.add_subparsers(dest="verify_command", required=True)

    vp = vsub.add_parser("request-challenge", help="emit a fresh challenge")
    _add_common(vp)
    vp.set_defaults(func=cmd_request_challenge)

    vp = vsub.add_parser("presentation", help="fully verify a presentation")
    _add_common(vp)
    vp.add_argument("--vp", required=True)
    vp.add_argument("--issuer", required=True)
    vp.add_argument("--challenge", required=True)
    vp.add_argument("--m", type=int, help="agreed period (default: from the file)")
    vp.add_argument("--escrow", help="witness escrow path (default: <vp>.witness)")
    vp.add_argument("--session-out", help="write a continuous-verification session")
    vp.add_argument("--trust", action="append", metavar="PKHEX",
                    help="restrict accepted issuers (repeatable)")
    vp.add_argument("--epoch-tolerance", type=int, default=0, choices=(0, 1))
    vp.set_defaults(func=cmd_verify_presentation)

    vp = vsub.add_parser("continuous", help="re-check a standing session")
    _add_common(vp)
    vp.add_argument("--session", required=True)
    vp.set_defaults(func=cmd_verify_continuous)

    p = sub.add_parser("game", help="run the untraceability game")
    _add_common(p)
    p.add_argument("--adversary", default="random", choices=sorted(game.ADVERSARIES))
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_game)

    p = sub.add_parser("bench", help="run the measurement workload")
    _add_common(p)
    p.add_argument("--config", help="JSON workload config")
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", help="write rows to a file instead of stdout")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MalformedEncoding, UnsupportedConfig, NotFound) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ZkTokenError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

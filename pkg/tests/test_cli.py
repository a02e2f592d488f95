"""CLI flows: lifecycle across roles, exit codes, reason tokens.

Most cases call main() in process to keep the suite fast; one test
drives the installed console entry point through a real subprocess.
"""

import json
import subprocess
import sys

import pytest

from zktoken.cli import EXIT_FAIL, EXIT_IO, EXIT_OK, main


@pytest.fixture
def ws(tmp_path):
    (tmp_path / "reg").mkdir()
    return tmp_path


def _setup(ws, capsys, k=1, dur=3600):
    code = main([
        "setup", "--registry", str(ws / "reg"), "--clock", "fixed:0",
        "--seed", "1", "--state", str(ws / "issuer.bin"), "--dur", str(dur),
        "--ts0", "0", "--k", str(k),
    ])
    assert code == EXIT_OK
    return capsys.readouterr().out.strip()


def _issue(ws, capsys, exp=52):
    code = main([
        "issue", "--state", str(ws / "issuer.bin"), "--clock", "fixed:0",
        "--seed", "2", "--claim", "role=nurse", "--claim", "ward=3",
        "--exp", str(exp), "--out", str(ws / "vc.bin"),
    ])
    assert code == EXIT_OK
    capsys.readouterr()


def _present(ws, capsys, pk, challenge, m=4, at=0):
    code = main([
        "present", "--registry", str(ws / "reg"), "--clock", f"fixed:{at}",
        "--seed", "4", "--vc", str(ws / "vc.bin"), "--issuer", pk,
        "--challenge", challenge, "--m", str(m), "--disclose", "0",
        "--out", str(ws / "vp.bin"),
    ])
    assert code == EXIT_OK
    capsys.readouterr()


def _refresh(ws, capsys, at=0):
    code = main([
        "refresh", "--registry", str(ws / "reg"), "--clock", f"fixed:{at}",
        "--state", str(ws / "issuer.bin"),
    ])
    assert code == EXIT_OK
    capsys.readouterr()


def _verify(ws, capsys, pk, challenge, at=0, extra=()):
    code = main([
        "verify", "presentation", "--registry", str(ws / "reg"),
        "--clock", f"fixed:{at}", "--vp", str(ws / "vp.bin"),
        "--issuer", pk, "--challenge", challenge, *extra,
    ])
    return code, capsys.readouterr().out.strip()


CH = "ab" * 32


def test_full_lifecycle_valid(ws, capsys):
    pk = _setup(ws, capsys)
    assert len(bytes.fromhex(pk)) == 32
    _issue(ws, capsys)
    _present(ws, capsys, pk, CH)
    _refresh(ws, capsys)
    code, out = _verify(ws, capsys, pk, CH)
    assert (code, out) == (EXIT_OK, "valid")


def test_revoked_reason_and_exit_code(ws, capsys):
    pk = _setup(ws, capsys)
    _issue(ws, capsys)
    _present(ws, capsys, pk, CH)
    assert main(["revoke", "--state", str(ws / "issuer.bin"),
                 "--vc", str(ws / "vc.bin")]) == EXIT_OK
    capsys.readouterr()
    _refresh(ws, capsys)
    code, out = _verify(ws, capsys, pk, CH)
    assert (code, out) == (EXIT_FAIL, "revoked")


def test_wrong_challenge_is_bad_proof(ws, capsys):
    pk = _setup(ws, capsys)
    _issue(ws, capsys)
    _present(ws, capsys, pk, CH)
    _refresh(ws, capsys)
    code, out = _verify(ws, capsys, pk, "cd" * 32)
    assert (code, out) == (EXIT_FAIL, "bad-proof")


def test_period_expiry_reason(ws, capsys):
    pk = _setup(ws, capsys)
    _issue(ws, capsys)
    _present(ws, capsys, pk, CH, m=2)
    _refresh(ws, capsys, at=2 * 3600)
    code, out = _verify(ws, capsys, pk, CH, at=2 * 3600)
    assert (code, out) == (EXIT_FAIL, "period-expired")


def test_stale_blacklist_detected(ws, capsys):
    pk = _setup(ws, capsys)
    _issue(ws, capsys)
    _present(ws, capsys, pk, CH)
    _refresh(ws, capsys, at=0)
    code, out = _verify(ws, capsys, pk, CH, at=3600)
    assert (code, out) == (EXIT_FAIL, "stale-blacklist")
    # one epoch of tolerance accepts the published list
    code, out = _verify(ws, capsys, pk, CH, at=3600,
                        extra=("--epoch-tolerance", "1"))
    assert (code, out) == (EXIT_OK, "valid")


def test_untrusted_issuer_gate(ws, capsys):
    pk = _setup(ws, capsys)
    _issue(ws, capsys)
    _present(ws, capsys, pk, CH)
    _refresh(ws, capsys)
    code, out = _verify(ws, capsys, pk, CH, extra=("--trust", "11" * 32))
    assert (code, out) == (EXIT_FAIL, "untrusted-issuer")
    code, out = _verify(ws, capsys, pk, CH, extra=("--trust", pk))
    assert (code, out) == (EXIT_OK, "valid")


def test_continuous_session_flow(ws, capsys):
    pk = _setup(ws, capsys)
    _issue(ws, capsys)
    _present(ws, capsys, pk, CH, m=3)
    _refresh(ws, capsys)
    code, out = _verify(ws, capsys, pk, CH,
                        extra=("--session-out", str(ws / "sess.bin")))
    assert (code, out) == (EXIT_OK, "valid")

    _refresh(ws, capsys, at=3600)
    code = main(["verify", "continuous", "--registry", str(ws / "reg"),
                 "--clock", "fixed:3600", "--session", str(ws / "sess.bin")])
    assert (code, capsys.readouterr().out.strip()) == (EXIT_OK, "valid")

    _refresh(ws, capsys, at=3 * 3600)
    code = main(["verify", "continuous", "--registry", str(ws / "reg"),
                 "--clock", "fixed:10800", "--session", str(ws / "sess.bin")])
    assert (code, capsys.readouterr().out.strip()) == (EXIT_FAIL, "period-expired")


def test_request_challenge_is_seedable(ws, capsys):
    assert main(["verify", "request-challenge", "--seed", "9"]) == EXIT_OK
    first = capsys.readouterr().out.strip()
    assert main(["verify", "request-challenge", "--seed", "9"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == first
    assert len(bytes.fromhex(first)) == 32


def test_snark_backend_is_a_config_error(ws, capsys):
    code = main([
        "setup", "--registry", str(ws / "reg"), "--clock", "fixed:0",
        "--state", str(ws / "s.bin"), "--dur", "10", "--backend", "snark",
    ])
    assert code == EXIT_IO
    capsys.readouterr()


def test_zero_duration_is_a_domain_error(ws, capsys):
    code = main([
        "setup", "--registry", str(ws / "reg"), "--clock", "fixed:0",
        "--state", str(ws / "s.bin"), "--dur", "0",
    ])
    assert code == EXIT_FAIL
    capsys.readouterr()


def test_missing_registry_is_a_config_error(ws, capsys, monkeypatch):
    monkeypatch.delenv("ZKTOKEN_REGISTRY", raising=False)
    code = main([
        "setup", "--clock", "fixed:0", "--state", str(ws / "s.bin"),
        "--dur", "10",
    ])
    assert code == EXIT_IO
    capsys.readouterr()


def test_registry_env_var_is_honored(ws, capsys, monkeypatch):
    monkeypatch.setenv("ZKTOKEN_REGISTRY", str(ws / "reg"))
    code = main([
        "setup", "--clock", "fixed:0", "--seed", "1",
        "--state", str(ws / "issuer.bin"), "--dur", "3600", "--ts0", "0",
    ])
    assert code == EXIT_OK
    capsys.readouterr()


def test_corrupt_presentation_file_is_a_format_error(ws, capsys):
    pk = _setup(ws, capsys)
    _issue(ws, capsys)
    _present(ws, capsys, pk, CH)
    _refresh(ws, capsys)
    vp_path = ws / "vp.bin"
    vp_path.write_bytes(vp_path.read_bytes()[:-3])
    code, _ = _verify(ws, capsys, pk, CH)
    assert code == EXIT_IO


def test_debug_json_output_renders_written_objects(ws, capsys):
    code = main([
        "setup", "--registry", str(ws / "reg"), "--clock", "fixed:0",
        "--seed", "1", "--state", str(ws / "issuer.bin"), "--dur", "3600",
        "--ts0", "0", "--output", "debug-json",
    ])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    record = json.loads(out[: out.rindex("}") + 1])["record"]
    assert record["dur"] == 3600 and record["k"] == 1


def test_game_command_json(ws, capsys):
    code = main(["game", "--adversary", "omniscient", "--trials", "20",
                 "--seed", "5", "--json"])
    assert code == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["trials"] == 20 and report["successes"] >= 19


def test_bench_command_with_config(ws, capsys, tmp_path):
    cfg = tmp_path / "bench.json"
    cfg.write_text(json.dumps({
        "n": 50, "revocation_rate": 0.04, "epochs": 3,
        "m_values": [1, 2], "k_values": [1],
    }))
    out_path = tmp_path / "rows.csv"
    code = main(["bench", "--config", str(cfg), "--seed", "1",
                 "--out", str(out_path)])
    assert code == EXIT_OK
    capsys.readouterr()
    lines = out_path.read_text().splitlines()
    assert lines[0] == "metric,epoch,backend,k,m,value,unit"
    assert len(lines) > 10


def test_console_entry_point_subprocess(ws):
    result = subprocess.run(
        [sys.executable, "-m", "zktoken.cli", "setup",
         "--registry", str(ws / "reg"), "--clock", "fixed:0", "--seed", "1",
         "--state", str(ws / "issuer.bin"), "--dur", "60"],
        capture_output=True, text=True, timeout=60,
    )
    assert result.returncode == 0, result.stderr
    assert len(bytes.fromhex(result.stdout.strip())) == 32

"""Desk-scale measurement harness.

Simulates an issuer population under a constant revocation rate and
measures the quantities that drive deployment cost: presentation size
versus period length, per-epoch publication and storage volume,
refresh latency, and per-backend proof size and timing. Results come
back as rows of (metric, epoch, backend, k, m, value, unit) for CSV or
JSON emission; nothing here asserts, tests pin the expectations.

Timing rows are medians of at least 30 monotonic-clock runs.
"""

from __future__ import annotations

import json
import random
import statistics
import time
from dataclasses import dataclass

from . import protocol
from .backend import RelationCheckBackend
from .crypto import hash_bind, hash_claims, hash_token
from .registry import InMemoryRegistry, Registry
from .relation import CircuitConfig, CircuitStatement, CircuitWitness, pad_block
from .types import Claims, EpochParams, SecurityParams, size_of_encoding

TIMING_RUNS = 30
BACKEND_NAME = "relation-check"


@dataclass(frozen=True)
class BenchConfig:
    """Workload shape. r is revocations per epoch and must stay
    consistent with revocation_rate * n / epochs; omit it to derive."""

    n: int = 10_000
    revocation_rate: float = 0.01
    epochs: int = 365
    r: float = -1.0
    m_values: tuple[int, ...] = tuple(range(1, 61))
    k_values: tuple[int, ...] = (1, 2, 4, 8, 16, 32)

    def __post_init__(self):
        if self.n < 1 or self.epochs < 1:
            raise ValueError("n and epochs must be positive")
        if not 0.0 <= self.revocation_rate <= 1.0:
            raise ValueError("revocation_rate must be within [0, 1]")
        derived = self.revocation_rate * self.n / self.epochs
        if self.r < 0:
            object.__setattr__(self, "r", derived)
        elif abs(self.r * self.epochs - self.revocation_rate * self.n) > max(
            1.0, 0.05 * self.revocation_rate * self.n
        ):
            raise ValueError(
                f"r={self.r} inconsistent with rate*n/epochs={derived:.4f}"
            )
        if not self.m_values or any(m < 1 for m in self.m_values):
            raise ValueError("m_values must be positive")
        if not self.k_values or any(k < 1 for k in self.k_values):
            raise ValueError("k_values must be positive")
        object.__setattr__(self, "m_values", tuple(self.m_values))
        object.__setattr__(self, "k_values", tuple(self.k_values))

    @classmethod
    def from_json(cls, text: str) -> "BenchConfig":
        raw = json.loads(text)
        if not isinstance(raw, dict):
            raise ValueError("bench config must be a JSON object")
        kwargs = {}
        for key in ("n", "revocation_rate", "epochs", "r"):
            if key in raw:
                kwargs[key] = raw[key]
        for key in ("m_values", "k_values"):
            if key in raw:
                kwargs[key] = tuple(raw[key])
        return cls(**kwargs)


@dataclass(frozen=True)
class MetricRow:
    metric: str
    epoch: int | None
    backend: str
    k: int | None
    m: int | None
    value: float
    unit: str


def median_ms(fn, runs: int = TIMING_RUNS) -> float:
    samples = []
    for _ in range(runs):
        t0 = time.perf_counter_ns()
        fn()
        samples.append((time.perf_counter_ns() - t0) / 1e6)
    return statistics.median(samples)


def linear_fit(xs, ys) -> tuple[float, float, float]:
    """Least-squares (slope, intercept, r_squared)."""
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    var_x = sum((x - mean_x) ** 2 for x in xs)
    if var_x == 0:
        raise ValueError("degenerate fit: constant x")
    cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = cov / var_x
    intercept = mean_y - slope * mean_x
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def _revocation_targets(cfg: BenchConfig) -> list[int]:
    """Cumulative revocations expected by the end of each epoch."""
    cap = round(cfg.revocation_rate * cfg.n)
    return [min(cap, round(cfg.r * (t + 1))) for t in range(cfg.epochs)]


def run_blacklist_workload(cfg: BenchConfig, registry: Registry | None = None,
                           seed: int = 0,
                           timing_runs: int = TIMING_RUNS) -> list[MetricRow]:
    """Issue n credentials, revoke r per epoch, refresh and publish
    every epoch; measure publication bytes, stored blacklist bytes, and
    refresh latency."""
    rng = random.Random(seed)
    registry = registry if registry is not None else InMemoryRegistry()
    backend = RelationCheckBackend()
    k = cfg.k_values[0]
    issuer, record = protocol.setup(
        SecurityParams(), EpochParams(ts0=0, dur=86_400), CircuitConfig(k=k),
        backend, rng=rng,
    )
    registry.publish(record)
    exp = cfg.epochs + 10
    credentials = [
        protocol.issue(
            issuer, Claims((("id", i.to_bytes(4, "little")),)), exp, 0, rng=rng
        )
        for i in range(cfg.n)
    ]
    order = list(range(cfg.n))
    rng.shuffle(order)

    rows: list[MetricRow] = []
    revoked = 0
    for t, target in enumerate(_revocation_targets(cfg)):
        while revoked < target:
            protocol.revoke(issuer, credentials[order[revoked]])
            revoked += 1
        refresh_ms = median_ms(lambda: protocol.refresh(issuer, t), runs=timing_runs)
        blacklist = protocol.refresh(issuer, t)
        rec = protocol.signed_record(issuer, blacklist)
        registry.publish(rec)
        rows.append(MetricRow("refresh_time", t, BACKEND_NAME, k, None, refresh_ms, "ms"))
        rows.append(MetricRow(
            "issuer_published_bytes", t, BACKEND_NAME, k, None,
            size_of_encoding(rec), "bytes",
        ))
        rows.append(MetricRow(
            "registry_blacklist_bytes", t, BACKEND_NAME, k, None,
            size_of_encoding(registry.fetch(issuer.keys.pk).blacklist), "bytes",
        ))
        rows.append(MetricRow(
            "revoked_count", t, BACKEND_NAME, k, None, len(issuer.revlist), "credentials",
        ))
    return rows


def run_proof_metrics(cfg: BenchConfig, seed: int = 0,
                      timing_runs: int = TIMING_RUNS) -> list[MetricRow]:
    """Per-k backend metrics and per-(k, m) presentation sizes."""
    rows: list[MetricRow] = []
    params = SecurityParams()
    for k in cfg.k_values:
        rng = random.Random(seed + k)
        backend = RelationCheckBackend()
        circuit = CircuitConfig(k=k)
        setup_ms = median_ms(lambda: backend.setup(params, circuit), runs=timing_runs)
        issuer, record = protocol.setup(
            params, EpochParams(ts0=0, dur=86_400), circuit, backend, rng=rng
        )
        rows.append(MetricRow("crs_bytes", None, BACKEND_NAME, k, None,
                              size_of_encoding(issuer.crs), "bytes"))
        rows.append(MetricRow("setup_time", None, BACKEND_NAME, k, None, setup_ms, "ms"))

        claims = Claims((("role", b"bench"),))
        vc = protocol.issue(issuer, claims, max(cfg.m_values) + 10, 0, rng=rng)
        challenge = rng.randbytes(32)

        # One block at full width drives the per-proof numbers.
        nonce = rng.randbytes(32)
        root, _ = hash_claims(claims)
        tokens, epochs = pad_block(
            tuple(hash_token(vc.seed, e) for e in range(k)), tuple(range(k)), k
        )
        x = CircuitStatement(
            pk=issuer.keys.pk, h=hash_bind(challenge, nonce), challenge=challenge,
            epochs=epochs, tokens=tokens, exp=vc.exp, claims_digest=root,
        )
        w = CircuitWitness(sig=vc.sig, seed=vc.seed, nonce=nonce)
        proof = backend.prove(x, issuer.crs, w)
        rows.append(MetricRow("proof_bytes", None, BACKEND_NAME, k, None,
                              size_of_encoding(proof), "bytes"))
        rows.append(MetricRow("prove_time", None, BACKEND_NAME, k, None,
                              median_ms(lambda: backend.prove(x, issuer.crs, w),
                                        runs=timing_runs), "ms"))
        rows.append(MetricRow("verify_time", None, BACKEND_NAME, k, None,
                              median_ms(lambda: backend.verify(x, issuer.crs, proof),
                                        runs=timing_runs), "ms"))

        for m in cfg.m_values:
            vp = protocol.present(
                backend, issuer.keys.pk, issuer.crs, circuit, 0, vc, m, challenge,
                rng=rng,
            )
            rows.append(MetricRow("holder_vp_bytes", 0, BACKEND_NAME, k, m,
                                  size_of_encoding(vp), "bytes"))
    return rows


def run_metrics(cfg: BenchConfig, registry: Registry | None = None,
                seed: int = 0, timing_runs: int = TIMING_RUNS) -> list[MetricRow]:
    return (run_blacklist_workload(cfg, registry, seed, timing_runs)
            + run_proof_metrics(cfg, seed, timing_runs))


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and not value.is_integer():
        return f"{value:.6f}"
    return str(int(value)) if isinstance(value, float) else str(value)


def rows_to_csv(rows) -> str:
    lines = ["metric,epoch,backend,k,m,value,unit"]
    for row in rows:
        lines.append(",".join([
            row.metric, _cell(row.epoch), row.backend, _cell(row.k),
            _cell(row.m), _cell(row.value), row.unit,
        ]))
    return "\n".join(lines) + "\n"


def rows_to_json(rows) -> str:
    return json.dumps([
        {
            "metric": row.metric, "epoch": row.epoch, "backend": row.backend,
            "k": row.k, "m": row.m, "value": row.value, "unit": row.unit,
        }
        for row in rows
    ], indent=2) + "\n"

"""Virtual-user load harness.

Each virtual user is an independent simulated client looping sequentially:
build a fresh presentation for the target request, send it, await the
response, record wall-clock latency, repeat until the cycle ends. One cycle
runs per configured VU level, separated by cooldown pauses so load
transients from one level do not bleed into the next.
"""

from __future__ import annotations

import asyncio
import csv
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable
from urllib.parse import urlsplit

import httpx

from .identity import RequestBinding, build_vp
from .stats import percentile
from .wallet import WalletStore

DEFAULT_VU_LEVELS = tuple(range(50, 501, 50))


@dataclass(frozen=True)
class BenchPlan:
    target_url: str
    wallet_dir: Path | str
    method: str = "GET"
    vu_levels: tuple[int, ...] = DEFAULT_VU_LEVELS
    cycle_seconds: float = 30.0
    cooldown_seconds: float = 30.0
    credential_id: str | None = None

    def __post_init__(self):
        if not self.vu_levels:
            raise ValueError("vu_levels must be non-empty")
        if any(v <= 0 for v in self.vu_levels):
            raise ValueError("vu_levels must be positive")
        if list(self.vu_levels) != sorted(set(self.vu_levels)):
            raise ValueError("vu_levels must be strictly increasing")
        if self.cycle_seconds <= 0 or self.cooldown_seconds <= 0:
            raise ValueError("durations must be positive")


@dataclass
class CycleReport:
    vu_count: int
    requests: int
    avg_ms: float | None
    max_ms: float | None
    p90_ms: float | None
    p95_ms: float | None
    rps: float
    error_count: int

    def validate(self) -> None:
        if self.requests:
            assert self.p90_ms <= self.p95_ms <= self.max_ms
        assert self.error_count >= 0

    def to_dict(self) -> dict:
        return {
            "vu": self.vu_count,
            "requests": self.requests,
            "avg_ms": self.avg_ms,
            "max_ms": self.max_ms,
            "p90_ms": self.p90_ms,
            "p95_ms": self.p95_ms,
            "rps": self.rps,
            "errors": self.error_count,
        }


def build_report(
    vu_count: int,
    latencies_ms: list[float],
    error_count: int,
    cycle_seconds: float,
) -> CycleReport:
    requests = len(latencies_ms)
    if requests == 0:
        return CycleReport(
            vu_count=vu_count,
            requests=0,
            avg_ms=None,
            max_ms=None,
            p90_ms=None,
            p95_ms=None,
            rps=0.0,
            error_count=error_count,
        )
    return CycleReport(
        vu_count=vu_count,
        requests=requests,
        avg_ms=sum(latencies_ms) / requests,
        max_ms=max(latencies_ms),
        p90_ms=percentile(latencies_ms, 90),
        p95_ms=percentile(latencies_ms, 95),
        rps=requests / cycle_seconds,
        error_count=error_count,
    )


class TargetUnreachable(Exception):
    """Raised after a cycle in which no request got any response."""

    def __init__(self, message: str, partial: list[CycleReport]):
        super().__init__(message)
        self.partial = partial


async def _virtual_user(
    make_request: Callable,
    client: httpx.AsyncClient,
    deadline: float,
    latencies_ms: list[float],
    errors: list[int],
) -> None:
    while time.perf_counter() < deadline:
        started = time.perf_counter()
        method, url, headers = make_request()
        try:
            response = await client.request(method, url, headers=headers)
        except httpx.HTTPError:
            errors[0] += 1
            continue
        latencies_ms.append((time.perf_counter() - started) * 1000.0)
        if not 200 <= response.status_code < 300:
            errors[0] += 1


async def _run_cycle(
    plan: BenchPlan,
    vu_count: int,
    request_factory: Callable,
    client_factory: Callable[[], httpx.AsyncClient],
) -> tuple[list[float], int]:
    latencies: list[list[float]] = [[] for _ in range(vu_count)]
    errors: list[list[int]] = [[0] for _ in range(vu_count)]
    clients = [client_factory() for _ in range(vu_count)]
    deadline = time.perf_counter() + plan.cycle_seconds
    try:
        await asyncio.gather(
            *(
                _virtual_user(request_factory, clients[i], deadline, latencies[i], errors[i])
                for i in range(vu_count)
            )
        )
    finally:
        await asyncio.gather(*(c.aclose() for c in clients))
    merged = [sample for buffer in latencies for sample in buffer]
    return merged, sum(e[0] for e in errors)


async def run_async(
    plan: BenchPlan,
    out_dir: Path | str | None = None,
    progress: Callable[[str], None] | None = None,
    client_factory: Callable[[], httpx.AsyncClient] | None = None,
) -> list[CycleReport]:
    store = WalletStore(plan.wallet_dir)
    vc = store.credential(plan.credential_id)
    keypair = store.keypair()

    parts = urlsplit(plan.target_url)
    target = parts.path or "/"
    if parts.query:
        target += "?" + parts.query
    host = parts.netloc

    def make_request():
        binding = RequestBinding.from_parts(plan.method, target, host)
        vp = build_vp(vc, binding, keypair, int(time.time()))
        return (
            plan.method.upper(),
            plan.target_url,
            {"Authorization": f"VP {vp.to_token()}"},
        )

    client_factory = client_factory or (
        lambda: httpx.AsyncClient(timeout=httpx.Timeout(30.0))
    )

    reports: list[CycleReport] = []
    for i, vu_count in enumerate(plan.vu_levels):
        if progress:
            progress(f"cycle {i + 1}/{len(plan.vu_levels)}: {vu_count} virtual users")
        samples, error_count = await _run_cycle(
            plan, vu_count, make_request, client_factory
        )
        report = build_report(vu_count, samples, error_count, plan.cycle_seconds)
        report.validate()
        reports.append(report)
        if not samples and error_count:
            raise TargetUnreachable(
                f"no responses at level {vu_count}; aborting with partial reports",
                reports,
            )
        if i + 1 < len(plan.vu_levels):
            if progress:
                progress(f"cooldown {plan.cooldown_seconds}s")
            await asyncio.sleep(plan.cooldown_seconds)

    if out_dir is not None:
        write_reports(reports, Path(out_dir))
    return reports


def run(
    plan: BenchPlan,
    out_dir: Path | str | None = None,
    progress: Callable[[str], None] | None = None,
) -> list[CycleReport]:
    return asyncio.run(run_async(plan, out_dir=out_dir, progress=progress))


CSV_FIELDS = ["vu", "requests", "avg_ms", "max_ms", "p90_ms", "p95_ms", "rps", "errors"]


def write_reports(reports: list[CycleReport], out_dir: Path) -> tuple[Path, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "bench.csv"
    json_path = out_dir / "bench.json"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
        writer.writeheader()
        for report in reports:
            row = report.to_dict()
            writer.writerow({k: ("" if row[k] is None else row[k]) for k in CSV_FIELDS})
    with open(json_path, "w") as fh:
        json.dump([r.to_dict() for r in reports], fh, indent=2)
    return csv_path, json_path

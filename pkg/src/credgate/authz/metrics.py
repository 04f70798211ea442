"""Decision-latency accounting since service start."""

from __future__ import annotations

import threading

from ..stats import percentile


class LatencyRecorder:
    def __init__(self):
        self._lock = threading.Lock()
        self._samples_ms: list[float] = []

    def record(self, elapsed_ms: float) -> None:
        with self._lock:
            self._samples_ms.append(elapsed_ms)

    def summary(self) -> dict:
        with self._lock:
            samples = list(self._samples_ms)
        if not samples:
            return {
                "count": 0,
                "avg_ms": None,
                "max_ms": None,
                "p90_ms": None,
                "p95_ms": None,
            }
        return {
            "count": len(samples),
            "avg_ms": sum(samples) / len(samples),
            "max_ms": max(samples),
            "p90_ms": percentile(samples, 90),
            "p95_ms": percentile(samples, 95),
        }

"""Latency statistics shared by the benchmark harness and service metrics."""

from __future__ import annotations

import math
from typing import Sequence


def percentile(samples: Sequence[float], p: float) -> float:
    """Nearest-rank percentile: the value at 1-based index ceil(p/100 * n)
    of the ascending sample list."""
    if not samples:
        raise ValueError("percentile of empty sample set")
    if not 0 < p <= 100:
        raise ValueError(f"percentile p must be in (0, 100], got {p}")
    ordered = sorted(samples)
    rank = math.ceil(p / 100 * len(ordered))
    return ordered[rank - 1]

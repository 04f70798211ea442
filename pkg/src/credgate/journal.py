"""Append-only JSON-lines change log.

Services replay their journal at startup to rebuild in-memory state, which
keeps persistence auditable: one line per committed event, never rewritten.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any, Iterator


class Journal:
    """Single-writer append log. Appends are serialized and flushed."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, record: dict[str, Any]) -> None:
        line = json.dumps(record, separators=(",", ":"), sort_keys=True)
        with self._lock:
            self._fh.write(line + "\n")
            self._fh.flush()

    def replay(self) -> Iterator[dict[str, Any]]:
        if not self.path.exists():
            return
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)

    def close(self) -> None:
        with self._lock:
            self._fh.close()

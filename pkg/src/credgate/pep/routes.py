"""Route table mapping request prefixes to protected objects."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urlparse

from ..identity.presentations import REGISTERED_METHODS
from ..rebac import ObjectRef, is_identifier


class RouteConfigError(Exception):
    """Route file rejected at startup; message pinpoints the bad rule."""


@dataclass(frozen=True)
class RouteRule:
    path_prefix: str
    methods: tuple[str, ...]
    upstream_url: str
    object: ObjectRef
    relation: str

    def __post_init__(self):
        if not self.path_prefix.startswith("/"):
            raise ValueError(f'path_prefix {self.path_prefix!r} must begin with "/"')
        for method in self.methods:
            if method not in REGISTERED_METHODS:
                raise ValueError(f"unregistered HTTP method {method!r}")
        parsed = urlparse(self.upstream_url)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise ValueError(f"upstream_url {self.upstream_url!r} is not a valid URL")
        if not is_identifier(self.relation):
            raise ValueError(f"invalid relation {self.relation!r}")

    def matches(self, method: str, path: str) -> bool:
        return method in self.methods and path.startswith(self.path_prefix)


def load_routes(path: Path | str) -> list[RouteRule]:
    """Parse and validate the JSON route file; any defect fails startup with
    a diagnostic naming the offending line or rule."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise RouteConfigError(f"{path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RouteConfigError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, list):
        raise RouteConfigError(f"{path}: route file must be a JSON array of rules")
    rules = []
    for i, entry in enumerate(raw):
        try:
            rules.append(
                RouteRule(
                    path_prefix=str(entry["path_prefix"]),
                    methods=tuple(str(m).upper() for m in entry["methods"]),
                    upstream_url=str(entry["upstream_url"]),
                    object=ObjectRef.parse(str(entry["object"])),
                    relation=str(entry["relation"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise RouteConfigError(f"{path}: rule {i + 1}: {exc}") from exc
    return rules


def match_route(rules: list[RouteRule], method: str, path: str) -> RouteRule | None:
    """Longest matching prefix wins; ties go to the earlier rule."""
    best: RouteRule | None = None
    for rule in rules:
        if not rule.matches(method, path):
            continue
        if best is None or len(rule.path_prefix) > len(best.path_prefix):
            best = rule
    return best

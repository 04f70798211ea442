"""Canonical JSON serialization and base64url helpers.

Every signature in this package is computed over canonical bytes: object keys
sorted by their UTF-8 encoding, no insignificant whitespace, UTF-8 output,
integers in shortest decimal form. Floats (and null) are rejected so that a
document has exactly one serialization.
"""

from __future__ import annotations

import base64
import json
from typing import Any


class CanonicalizationError(ValueError):
    """Document contains a value that has no canonical form."""


def _validate(value: Any, path: str) -> None:
    if isinstance(value, bool):
        return
    if isinstance(value, int):
        return
    if isinstance(value, str):
        return
    if isinstance(value, float):
        raise CanonicalizationError(f"float value at {path} has no canonical form")
    if value is None:
        raise CanonicalizationError(f"null value at {path} has no canonical form")
    if isinstance(value, (list, tuple)):
        for i, item in enumerate(value):
            _validate(item, f"{path}[{i}]")
        return
    if isinstance(value, dict):
        for key, item in value.items():
            if not isinstance(key, str):
                raise CanonicalizationError(f"non-string key {key!r} at {path}")
            _validate(item, f"{path}.{key}")
        return
    raise CanonicalizationError(f"unsupported type {type(value).__name__} at {path}")


def canonical_bytes(document: Any) -> bytes:
    """Serialize a JSON-like document to its unique canonical byte string.

    Python sorts strings by code point, which coincides with UTF-8 byte
    order, so ``sort_keys`` yields the required key ordering.
    """
    _validate(document, "$")
    return json.dumps(
        document, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def b64u_encode(data: bytes) -> str:
    """base64url without padding."""
    return base64.urlsafe_b64encode(data).decode("ascii").rstrip("=")


def b64u_decode(text: str) -> bytes:
    """Strict inverse of :func:`b64u_encode`; raises ValueError on bad input."""
    if not isinstance(text, str):
        raise ValueError("base64url input must be a string")
    padded = text + "=" * (-len(text) % 4)
    try:
        return base64.b64decode(
            padded.replace("-", "+").replace("_", "/").encode("ascii"), validate=True
        )
    except Exception as exc:
        raise ValueError(f"invalid base64url: {exc}") from exc

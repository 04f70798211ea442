"""Static bearer-token admin authentication shared by the services."""

from __future__ import annotations

import hmac

from fastapi import Request


def bearer_token_valid(request: Request, token: str) -> bool:
    header = request.headers.get("authorization", "")
    scheme, _, value = header.partition(" ")
    return scheme.lower() == "bearer" and hmac.compare_digest(value, token)

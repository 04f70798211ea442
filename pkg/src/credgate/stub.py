"""Minimal protected-resource stand-in for demos and end-to-end tests.

Echoes what it received, including the subject header injected by the
proxy, with an optional artificial delay for load experiments.
"""

from __future__ import annotations

import asyncio

from fastapi import FastAPI, Request


def create_stub_app(delay_seconds: float = 0.0) -> FastAPI:
    app = FastAPI(title="credgate-stub-resource")

    @app.api_route(
        "/{path:path}", methods=["GET", "HEAD", "POST", "PUT", "DELETE", "PATCH"]
    )
    async def echo(request: Request, path: str):
        if delay_seconds > 0:
            await asyncio.sleep(delay_seconds)
        body = await request.body()
        return {
            "resource": "/" + path,
            "method": request.method,
            "subject": request.headers.get("x-subject-did"),
            "authorization_seen": "authorization" in request.headers,
            "body_bytes": len(body),
        }

    return app

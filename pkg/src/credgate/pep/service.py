"""Enforcement proxy: every request is either authorized by the decision
service and forwarded, or rejected. There is no path that reaches an
upstream without an allow decision; transport failures deny."""

from __future__ import annotations

from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

import httpx
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from ..identity import RequestBinding
from .routes import RouteRule, load_routes, match_route

AUTH_SCHEME = "vp"
SUBJECT_HEADER = "x-subject-did"

HOP_BY_HOP = frozenset(
    {
        "connection",
        "keep-alive",
        "proxy-authenticate",
        "proxy-authorization",
        "te",
        "trailer",
        "trailers",
        "transfer-encoding",
        "upgrade",
    }
)

DEFAULT_BODY_LIMIT = 1 << 20  # 1 MiB


@dataclass
class PepConfig:
    listen: str = "127.0.0.1:8300"
    pdp_url: str = "http://127.0.0.1:8200"
    routes_file: Path | str | None = None
    routes: list[RouteRule] = field(default_factory=list)
    pdp_timeout: float = 5.0
    body_limit: int = DEFAULT_BODY_LIMIT


def _extract_token(request: Request) -> str | None:
    header = request.headers.get("authorization", "")
    scheme, _, token = header.partition(" ")
    if scheme.lower() != AUTH_SCHEME or not token.strip():
        return None
    return token.strip()


async def _read_body(request: Request, limit: int) -> bytes | None:
    """Buffer at most ``limit`` bytes; None means the body is too large."""
    declared = request.headers.get("content-length")
    if declared is not None and declared.isdigit() and int(declared) > limit:
        return None
    chunks: list[bytes] = []
    total = 0
    async for chunk in request.stream():
        total += len(chunk)
        if total > limit:
            return None
        chunks.append(chunk)
    return b"".join(chunks)


def _forward_headers(request: Request, subject: str) -> dict[str, str]:
    """Client headers minus hop-by-hop, the presentation, and any spoofed
    subject header; the trusted subject is added after authorization."""
    headers = {}
    for name, value in request.headers.items():
        lowered = name.lower()
        if lowered in HOP_BY_HOP or lowered in {
            "authorization",
            SUBJECT_HEADER,
            "host",
            "content-length",
        }:
            continue
        headers[name] = value
    headers[SUBJECT_HEADER] = subject
    return headers


def _relay_headers(upstream: httpx.Response) -> dict[str, str]:
    return {
        name: value
        for name, value in upstream.headers.items()
        if name.lower() not in HOP_BY_HOP and name.lower() != "content-length"
    }


def create_pep_app(
    config: PepConfig, http_client: httpx.AsyncClient | None = None
) -> FastAPI:
    rules = list(config.routes)
    if config.routes_file is not None:
        rules.extend(load_routes(config.routes_file))
    if not rules:
        raise ValueError("no routes configured")
    client = http_client or httpx.AsyncClient(
        timeout=httpx.Timeout(config.pdp_timeout),
        limits=httpx.Limits(max_connections=512, max_keepalive_connections=128),
    )

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        await client.aclose()

    app = FastAPI(title="credgate-pep", lifespan=lifespan)
    app.state.routes = rules

    @app.api_route(
        "/{path:path}",
        methods=["GET", "HEAD", "POST", "PUT", "DELETE", "OPTIONS", "PATCH", "TRACE"],
    )
    async def handle(request: Request, path: str):
        route = match_route(rules, request.method.upper(), request.url.path)
        if route is None:
            return JSONResponse({"reason": "no_route"}, status_code=404)

        token = _extract_token(request)
        if token is None:
            return JSONResponse(
                {"reason": "missing_presentation"},
                status_code=401,
                headers={"WWW-Authenticate": "VP"},
            )

        body = await _read_body(request, config.body_limit)
        if body is None:
            return JSONResponse({"reason": "body_too_large"}, status_code=413)

        target = request.url.path
        if request.url.query:
            target += "?" + request.url.query
        try:
            binding = RequestBinding.from_parts(
                method=request.method,
                target=target,
                host=request.headers.get("host", ""),
                body=body,
            )
        except ValueError as exc:
            return JSONResponse({"reason": f"bad_request: {exc}"}, status_code=400)

        decision_request = {
            "binding": {
                "method": binding.method,
                "target": binding.target,
                "host": binding.host,
                "content_digest": binding.content_digest,
            },
            "vp_token": token,
            "object": str(route.object),
            "relation": route.relation,
        }
        try:
            pdp_response = await client.post(
                f"{config.pdp_url}/v1/check",
                json=decision_request,
                timeout=config.pdp_timeout,
            )
        except httpx.HTTPError:
            return JSONResponse({"reason": "upstream_unavailable"}, status_code=502)
        if pdp_response.status_code != 200:
            return JSONResponse({"reason": "upstream_unavailable"}, status_code=502)
        decision = pdp_response.json()
        if not decision.get("allowed"):
            return JSONResponse(
                {"reason_code": decision.get("reason_code", "malformed")},
                status_code=403,
            )

        upstream_url = route.upstream_url.rstrip("/") + target
        try:
            upstream = await client.request(
                request.method,
                upstream_url,
                headers=_forward_headers(request, decision.get("subject", "")),
                content=body,
            )
        except httpx.HTTPError:
            return JSONResponse({"reason": "upstream_unavailable"}, status_code=502)
        return Response(
            content=upstream.content,
            status_code=upstream.status_code,
            headers=_relay_headers(upstream),
        )

    return app

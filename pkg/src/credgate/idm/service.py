"""HTTP surface of the organization-side identity manager."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from ..identity import DidDocument, sanitize_attributes
from ..webauth import bearer_token_valid
from .state import (
    IdmState,
    RegistryConflict,
    UnknownCredential,
    UnknownDid,
)


@dataclass
class IdmConfig:
    listen: str = "127.0.0.1:8100"
    data_dir: Path | str | None = None
    admin_token: str = ""
    issuer_seed: bytes = b""
    public_base_url: str | None = None

    @property
    def base_url(self) -> str:
        return self.public_base_url or f"http://{self.listen}"


def create_idm_app(config: IdmConfig) -> FastAPI:
    if len(config.issuer_seed) != 32:
        raise ValueError("issuer seed must be 32 bytes")
    if not config.admin_token:
        raise ValueError("admin token must be configured")
    state = IdmState(
        issuer_seed=config.issuer_seed,
        status_url=f"{config.base_url}/v1/status/default",
        data_dir=config.data_dir,
    )
    app = FastAPI(title="credgate-idm")
    app.state.idm = state

    def require_admin(request: Request) -> JSONResponse | None:
        if not bearer_token_valid(request, config.admin_token):
            return JSONResponse({"error": "invalid admin token"}, status_code=401)
        return None

    @app.get("/v1/issuer")
    async def issuer_info():
        return {"did": state.issuer_did, "status_url": state.status_url}

    @app.post("/v1/dids")
    async def register_did(request: Request):
        denied = require_admin(request)
        if denied:
            return denied
        try:
            body = await request.json()
            document = DidDocument.from_dict(body["did_document"])
        except Exception as exc:
            return JSONResponse({"error": f"malformed document: {exc}"}, status_code=400)
        try:
            did, created = state.register(document)
        except RegistryConflict as exc:
            return JSONResponse({"error": str(exc)}, status_code=409)
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        return JSONResponse({"did": did}, status_code=201 if created else 200)

    @app.get("/v1/dids/{did:path}")
    async def get_did(did: str):
        try:
            return state.get_document(did).to_dict()
        except UnknownDid:
            return JSONResponse({"error": f"{did} not registered"}, status_code=404)

    @app.post("/v1/credentials")
    async def issue_credential_endpoint(request: Request):
        denied = require_admin(request)
        if denied:
            return denied
        try:
            body = await request.json()
            subject_did = str(body["subject_did"])
            attributes = sanitize_attributes([str(a) for a in body["attributes"]])
            ttl_seconds = int(body["ttl_seconds"])
            if ttl_seconds <= 0:
                raise ValueError("ttl_seconds must be positive")
        except (KeyError, TypeError, ValueError) as exc:
            return JSONResponse({"error": f"bad request: {exc}"}, status_code=400)
        try:
            vc = state.issue(subject_did, list(attributes), ttl_seconds)
        except UnknownDid:
            return JSONResponse(
                {"error": f"unknown subject {subject_did}"}, status_code=404
            )
        return JSONResponse(vc.to_dict(), status_code=201)

    @app.post("/v1/credentials/{credential_id:path}/revoke")
    async def revoke_credential(credential_id: str, request: Request):
        denied = require_admin(request)
        if denied:
            return denied
        try:
            state.revoke(credential_id)
        except UnknownCredential:
            return JSONResponse(
                {"error": f"unknown credential {credential_id}"}, status_code=404
            )
        return Response(status_code=204)

    @app.get("/v1/status/{list_id}")
    async def get_status_list(list_id: str):
        try:
            status, revision = state.status_list(list_id)
        except KeyError:
            return JSONResponse({"error": f"unknown list {list_id}"}, status_code=404)
        payload = status.to_dict()
        payload["revision"] = revision
        return payload

    return app

"""Decision service: policy administration (model + tuples) and the decision
endpoint that validates a presentation, maps verified attributes to
contextual tuples, and runs the relationship check.

The attribute-to-tuple mapping implements the policy form "users with
attribute A issued by organization O have relation R with asset S": each
verified attribute A from issuer O becomes the ephemeral fact
(org:<O>, A, user:<subject>) for the duration of one decision.
"""

from __future__ import annotations

import logging
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path

import httpx
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..identity import CredentialError, PresentationError, RequestBinding
from ..identity.credentials import StatusFetchError
from ..identity.dids import DidResolutionError
from ..identity.presentations import VerifiablePresentation
from ..rebac import (
    AuthorizationModel,
    CheckRequest,
    DirectSubject,
    ModelValidationError,
    ObjectRef,
    RelationTuple,
    TupleStore,
    UnknownRelationError,
    check,
    parse_subject_filter,
)
from ..webauth import bearer_token_valid
from .metrics import LatencyRecorder
from .verifier import PipConfig, PresentationValidator

logger = logging.getLogger("credgate.authz")

REASON_CODES = frozenset(
    {
        "ok",
        "untrusted_issuer",
        "bad_signature",
        "expired",
        "revoked",
        "stale",
        "replayed",
        "binding_mismatch",
        "holder_signature_invalid",
        "no_relation",
        "malformed",
        "upstream_unavailable",
    }
)

ORG_TYPE = "org"
USER_PREFIX = "user:"


@dataclass
class AuthzConfig:
    listen: str = "127.0.0.1:8200"
    admin_token: str = ""
    pip: PipConfig = field(
        default_factory=lambda: PipConfig(
            trusted_issuers=frozenset(), idm_base_url="http://127.0.0.1:8100"
        )
    )
    data_dir: Path | str | None = None
    metrics_path: str = "/v1/metrics"


def _decision(
    allowed: bool,
    reason_code: str,
    subject: str | None = None,
    trace: list[str] | None = None,
) -> dict:
    assert reason_code in REASON_CODES
    assert allowed == (reason_code == "ok")
    body: dict = {"allowed": allowed, "reason_code": reason_code}
    if subject is not None:
        body["subject"] = subject
    if trace is not None:
        body["trace"] = trace
    return body


def reason_for_exception(exc: Exception) -> str:
    """Collapse verification failures onto the decision reason vocabulary."""
    if isinstance(exc, CredentialError):
        return "upstream_unavailable" if exc.code == "status_unavailable" else exc.code
    if isinstance(exc, PresentationError):
        if exc.code == "holder_key_mismatch":
            return "holder_signature_invalid"
        return exc.code
    if isinstance(exc, DidResolutionError):
        return "upstream_unavailable" if exc.kind == "unreachable" else "malformed"
    return "upstream_unavailable"


def contextual_tuples_for(
    model: AuthorizationModel, issuer: str, subject: str, attributes: tuple[str, ...]
) -> list[RelationTuple]:
    """Ephemeral facts derived from verified attributes; attributes the
    active model has no matching org relation for are skipped."""
    org = ObjectRef(type_name=ORG_TYPE, object_id=issuer)
    holder = DirectSubject(subject_id=USER_PREFIX + subject)
    tuples = []
    for attr in attributes:
        if not model.has_relation(ORG_TYPE, attr):
            logger.info("skipping attribute %r: no such relation on %s", attr, ORG_TYPE)
            continue
        tuples.append(RelationTuple(object=org, relation=attr, subject=holder))
    return tuples


def create_authz_app(
    config: AuthzConfig, http_client: httpx.AsyncClient | None = None
) -> FastAPI:
    if not config.admin_token:
        raise ValueError("admin token must be configured")
    store = TupleStore(
        Path(config.data_dir) / "authz-journal.jsonl" if config.data_dir else None
    )
    validator = PresentationValidator(config.pip, client=http_client)
    metrics = LatencyRecorder()

    @asynccontextmanager
    async def lifespan(_: FastAPI):
        yield
        await validator.aclose()
        store.close()

    app = FastAPI(title="credgate-authz", lifespan=lifespan)
    app.state.store = store
    app.state.validator = validator
    app.state.metrics = metrics

    def require_admin(request: Request) -> JSONResponse | None:
        if not bearer_token_valid(request, config.admin_token):
            return JSONResponse({"error": "invalid admin token"}, status_code=401)
        return None

    @app.put("/v1/model")
    async def put_model(request: Request):
        denied = require_admin(request)
        if denied:
            return denied
        try:
            model = AuthorizationModel.from_dict(await request.json())
        except Exception as exc:
            return JSONResponse({"error": f"malformed model: {exc}"}, status_code=400)
        try:
            model_id = store.set_model(model)
        except ModelValidationError as exc:
            return JSONResponse(
                {"error": "model validation failed",
                 "violations": [str(v) for v in exc.violations]},
                status_code=400,
            )
        return {"model_id": model_id}

    @app.post("/v1/tuples")
    async def write_tuples(request: Request):
        try:
            body = await request.json()
            adds = [RelationTuple.from_dict(t) for t in body.get("writes", [])]
            deletes = [RelationTuple.from_dict(t) for t in body.get("deletes", [])]
        except Exception as exc:
            return JSONResponse({"error": f"malformed tuples: {exc}"}, status_code=400)
        try:
            revision = store.write(adds=adds, deletes=deletes)
        except UnknownRelationError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        return {"revision": revision}

    @app.get("/v1/tuples")
    async def read_tuples(
        object: str | None = None,
        relation: str | None = None,
        subject: str | None = None,
    ):
        try:
            object_ref = ObjectRef.parse(object) if object else None
            subject_ref = parse_subject_filter(subject) if subject else None
        except ValueError as exc:
            return JSONResponse({"error": f"malformed filter: {exc}"}, status_code=400)
        tuples = store.read(object=object_ref, relation=relation, subject=subject_ref)
        return {"tuples": [t.to_dict() for t in tuples]}

    @app.post("/v1/check")
    async def decide(request: Request):
        started = time.perf_counter()
        try:
            response = await _decide(request)
        finally:
            metrics.record((time.perf_counter() - started) * 1000.0)
        return response

    async def _decide(request: Request):
        try:
            body = await request.json()
            binding = RequestBinding(
                method=str(body["binding"]["method"]),
                target=str(body["binding"]["target"]),
                host=str(body["binding"]["host"]),
                content_digest=str(body["binding"]["content_digest"]),
            )
            vp_token = str(body["vp_token"])
            object_ref = ObjectRef.parse(str(body["object"]))
            relation = str(body["relation"])
        except Exception as exc:
            return JSONResponse(
                {"error": f"malformed decision request: {exc}"}, status_code=400
            )

        try:
            vp = VerifiablePresentation.from_token(vp_token)
        except (PresentationError, CredentialError):
            return _decision(False, "malformed")

        try:
            verified = await validator.validate(vp, binding)
        except (
            CredentialError,
            PresentationError,
            DidResolutionError,
            StatusFetchError,
            httpx.HTTPError,
        ) as exc:
            return _decision(False, reason_for_exception(exc))

        snapshot = store.snapshot()
        contextual = contextual_tuples_for(
            snapshot.model, verified.issuer, verified.subject, verified.attributes
        )
        try:
            check_request = CheckRequest(
                subject_id=USER_PREFIX + verified.subject,
                relation=relation,
                object=object_ref,
                contextual_tuples=tuple(contextual),
            )
            result = check(snapshot, check_request)
        except (UnknownRelationError, ValueError):
            return _decision(False, "malformed", subject=verified.subject)
        if not result.allowed:
            return _decision(False, "no_relation", subject=verified.subject)
        return _decision(
            True, "ok", subject=verified.subject, trace=list(result.reasons)
        )

    @app.post("/v1/check-local")
    async def check_local(request: Request):
        denied = require_admin(request)
        if denied:
            return denied
        try:
            body = await request.json()
            contextual = tuple(
                RelationTuple.from_dict(t) for t in body.get("contextual_tuples", [])
            )
            check_request = CheckRequest(
                subject_id=str(body["subject_id"]),
                relation=str(body["relation"]),
                object=ObjectRef.parse(str(body["object"])),
                contextual_tuples=contextual,
                max_depth=int(body.get("max_depth", 25)),
            )
        except Exception as exc:
            return JSONResponse({"error": f"malformed request: {exc}"}, status_code=400)
        try:
            result = check(store.snapshot(), check_request)
        except UnknownRelationError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        if not result.allowed:
            return _decision(False, "no_relation")
        return _decision(True, "ok", trace=list(result.reasons))

    @app.get(config.metrics_path)
    async def get_metrics():
        return metrics.summary()

    return app

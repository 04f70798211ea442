"""Shared test plumbing: in-process service stacks wired over ASGI
transports, and real-socket deployments for the end-to-end suites."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx
import uvicorn
from fastapi import FastAPI

from credgate.authz import AuthzConfig, PipConfig, create_authz_app
from credgate.idm import IdmConfig, create_idm_app
from credgate.pep import PepConfig, create_pep_app
from credgate.pep.routes import RouteRule
from credgate.rebac import ObjectRef
from credgate.stub import create_stub_app

ISSUER_SEED = bytes(range(32))
IDM_TOKEN = "idm-admin-secret"
AUTHZ_TOKEN = "authz-admin-secret"

SMART_PLUG_MODEL = {
    "types": {
        "org": {"relations": {"researcher": ["direct"]}},
        "asset": {
            "relations": {
                "trusted_org": ["direct"],
                "reader": [
                    "direct",
                    {"tupleToUserset": {"tupleset": "trusted_org", "computed": "researcher"}},
                ],
            }
        },
    }
}


class MultiHostTransport(httpx.AsyncBaseTransport):
    """Routes requests to in-process ASGI apps by hostname."""

    def __init__(self, apps: dict[str, FastAPI]):
        self._transports = {
            host: httpx.ASGITransport(app=app) for host, app in apps.items()
        }

    async def handle_async_request(self, request):
        transport = self._transports.get(request.url.host)
        if transport is None:
            raise httpx.ConnectError(f"no route to host {request.url.host!r}")
        return await transport.handle_async_request(request)


@dataclass
class InProcessStack:
    """idm + authz + pep + stub resource, reachable at http://idm.test,
    http://authz.test, http://pep.test, http://res.test via ``client``."""

    idm_app: FastAPI
    authz_app: FastAPI
    pep_app: FastAPI
    stub_app: FastAPI
    issuer_did: str
    client: httpx.Client

    idm_admin: dict = field(default_factory=lambda: {"Authorization": f"Bearer {IDM_TOKEN}"})
    authz_admin: dict = field(
        default_factory=lambda: {"Authorization": f"Bearer {AUTHZ_TOKEN}"}
    )

    def close(self):
        self.client.close()


def default_routes() -> list[RouteRule]:
    return [
        RouteRule(
            path_prefix="/energy",
            methods=("GET", "POST"),
            upstream_url="http://res.test",
            object=ObjectRef.parse("asset:smart_plug_1"),
            relation="reader",
        )
    ]


def build_stack(
    trusted_issuers: frozenset[str] | None = None,
    routes: list[RouteRule] | None = None,
    freshness_window: int = 120,
    cache_enabled: bool = False,
    cache_ttl: int = 30,
    data_dir: Path | None = None,
) -> InProcessStack:
    idm_app = create_idm_app(
        IdmConfig(
            admin_token=IDM_TOKEN,
            issuer_seed=ISSUER_SEED,
            public_base_url="http://idm.test",
            data_dir=data_dir / "idm" if data_dir else None,
        )
    )
    issuer_did = idm_app.state.idm.issuer_did
    stub_app = create_stub_app()

    authz_app = create_authz_app(
        AuthzConfig(
            admin_token=AUTHZ_TOKEN,
            pip=PipConfig(
                trusted_issuers=(
                    trusted_issuers if trusted_issuers is not None else frozenset({issuer_did})
                ),
                idm_base_url="http://idm.test",
                freshness_window=freshness_window,
                cache_enabled=cache_enabled,
                cache_ttl=cache_ttl,
            ),
            data_dir=data_dir / "authz" if data_dir else None,
        ),
        http_client=httpx.AsyncClient(transport=MultiHostTransport({"idm.test": idm_app})),
    )

    pep_app = create_pep_app(
        PepConfig(pdp_url="http://authz.test", routes=routes or default_routes()),
        http_client=httpx.AsyncClient(
            transport=MultiHostTransport({"authz.test": authz_app, "res.test": stub_app})
        ),
    )

    client = httpx.Client(
        transport=_SyncMultiHostTransport(
            {
                "idm.test": idm_app,
                "authz.test": authz_app,
                "pep.test": pep_app,
                "res.test": stub_app,
            }
        ),
        base_url="http://pep.test",
    )
    return InProcessStack(
        idm_app=idm_app,
        authz_app=authz_app,
        pep_app=pep_app,
        stub_app=stub_app,
        issuer_did=issuer_did,
        client=client,
    )


class _SyncMultiHostTransport(httpx.BaseTransport):
    """Sync facade over ASGI apps: each request spins the app via the
    blocking portal inside starlette's TestClient transport."""

    def __init__(self, apps: dict[str, FastAPI]):
        from starlette.testclient import TestClient

        self._clients = {
            host: TestClient(app, base_url=f"http://{host}") for host, app in apps.items()
        }

    def handle_request(self, request):
        client = self._clients.get(request.url.host)
        if client is None:
            raise httpx.ConnectError(f"no route to host {request.url.host!r}")
        response = client.request(
            request.method,
            str(request.url),
            headers=request.headers.raw,
            content=request.read(),
        )
        return httpx.Response(
            status_code=response.status_code,
            headers=response.headers,
            content=response.content,
        )


class ServerHandle:
    """One uvicorn server on an ephemeral port, running in a thread."""

    def __init__(self, app: FastAPI):
        self._config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
        self.server = uvicorn.Server(self._config)
        self._thread = threading.Thread(target=self.server.run, daemon=True)
        self.port: int | None = None

    def start(self) -> "ServerHandle":
        self._thread.start()
        deadline = time.time() + 10
        while not self.server.started:
            if time.time() > deadline:
                raise RuntimeError("server did not start within 10s")
            time.sleep(0.01)
        self.port = self.server.servers[0].sockets[0].getsockname()[1]
        return self

    @property
    def url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def stop(self) -> None:
        self.server.should_exit = True
        self._thread.join(timeout=10)


@dataclass
class DeployedStack:
    """Real-socket deployment of the whole stack."""

    idm: ServerHandle
    authz: ServerHandle
    pep: ServerHandle
    resource: ServerHandle
    issuer_did: str
    extra: list[ServerHandle] = field(default_factory=list)

    def stop(self):
        for handle in [self.pep, self.authz, self.idm, self.resource, *self.extra]:
            handle.stop()


def deploy_stack(
    data_dir: Path,
    trusted_issuers: frozenset[str] | None = None,
    resource_delay: float = 0.0,
    freshness_window: int = 120,
) -> DeployedStack:
    resource = ServerHandle(create_stub_app(delay_seconds=resource_delay)).start()

    idm_state_dir = data_dir / "idm"
    idm_app = create_idm_app(
        IdmConfig(admin_token=IDM_TOKEN, issuer_seed=ISSUER_SEED, data_dir=idm_state_dir)
    )
    issuer_did = idm_app.state.idm.issuer_did
    idm = ServerHandle(idm_app).start()
    # The status URL must point at the live socket, not the placeholder
    # listen address the app was configured with before the port was known.
    idm_app.state.idm.status_url = f"{idm.url}/v1/status/default"

    authz_app = create_authz_app(
        AuthzConfig(
            admin_token=AUTHZ_TOKEN,
            pip=PipConfig(
                trusted_issuers=(
                    trusted_issuers if trusted_issuers is not None else frozenset({issuer_did})
                ),
                idm_base_url=idm.url,
                freshness_window=freshness_window,
            ),
            data_dir=data_dir / "authz",
        )
    )
    authz = ServerHandle(authz_app).start()

    pep_app = create_pep_app(
        PepConfig(
            pdp_url=authz.url,
            routes=[
                RouteRule(
                    path_prefix="/energy",
                    methods=("GET", "POST"),
                    upstream_url=resource.url,
                    object=ObjectRef.parse("asset:smart_plug_1"),
                    relation="reader",
                )
            ],
        )
    )
    pep = ServerHandle(pep_app).start()
    return DeployedStack(
        idm=idm, authz=authz, pep=pep, resource=resource, issuer_did=issuer_did
    )

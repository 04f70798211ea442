"""Scratch: full in-process end-to-end via ASGI transports (deleted before commit)."""
import asyncio
import httpx

from credgate.idm import create_idm_app, IdmConfig
from credgate.authz import create_authz_app, AuthzConfig, PipConfig
from credgate.pep import create_pep_app, PepConfig
from credgate.pep.routes import RouteRule
from credgate.rebac import ObjectRef
from credgate.stub import create_stub_app
from credgate.identity import generate_keypair, did_from_key, build_vp, RequestBinding, VerifiableCredential
import time


class MultiHostTransport(httpx.AsyncBaseTransport):
    def __init__(self, apps: dict):
        self._transports = {host: httpx.ASGITransport(app=app) for host, app in apps.items()}

    async def handle_async_request(self, request):
        host = request.url.host
        transport = self._transports.get(host)
        if transport is None:
            raise httpx.ConnectError(f"no route to {host}", request=request)
        return await transport.handle_async_request(request)


async def main():
    issuer_seed = bytes(range(32))
    idm_cfg = IdmConfig(admin_token="idm-secret", issuer_seed=issuer_seed, public_base_url="http://idm.test")
    idm_app = create_idm_app(idm_cfg)
    issuer_did = idm_app.state.idm.issuer_did
    print("issuer:", issuer_did)

    stub_app = create_stub_app()

    authz_client = httpx.AsyncClient(transport=MultiHostTransport({"idm.test": idm_app}))
    authz_cfg = AuthzConfig(
        admin_token="authz-secret",
        pip=PipConfig(trusted_issuers=frozenset({issuer_did}), idm_base_url="http://idm.test"),
    )
    authz_app = create_authz_app(authz_cfg, http_client=authz_client)

    pep_client = httpx.AsyncClient(transport=MultiHostTransport({"authz.test": authz_app, "res.test": stub_app}))
    pep_cfg = PepConfig(
        pdp_url="http://authz.test",
        routes=[RouteRule(path_prefix="/energy", methods=("GET",), upstream_url="http://res.test",
                          object=ObjectRef.parse("asset:smart_plug_1"), relation="reader")],
    )
    pep_app = create_pep_app(pep_cfg, http_client=pep_client)

    admin = {"Authorization": "Bearer authz-secret"}
    idm_admin = {"Authorization": "Bearer idm-secret"}

    async with httpx.AsyncClient(transport=MultiHostTransport({"idm.test": idm_app, "authz.test": authz_app, "pep.test": pep_app})) as client:
        # wallet-ish: keygen + request VC
        holder = generate_keypair(bytes([7]) * 32)
        holder_did = did_from_key(holder.public_key)
        r = await client.post("http://idm.test/v1/credentials", headers=idm_admin,
                              json={"subject_did": holder_did, "attributes": ["cs_department", "researcher"], "ttl_seconds": 2592000})
        print("issue:", r.status_code)
        vc = VerifiableCredential.from_dict(r.json())

        # model + tuple
        model = {"types": {
            "org": {"relations": {"researcher": ["direct"]}},
            "asset": {"relations": {"trusted_org": ["direct"],
                                    "reader": ["direct", {"tupleToUserset": {"tupleset": "trusted_org", "computed": "researcher"}}]}}}}
        r = await client.put("http://authz.test/v1/model", headers=admin, json=model)
        print("model:", r.status_code, r.json())
        r = await client.post("http://authz.test/v1/tuples", json={
            "writes": [{"object": "asset:smart_plug_1", "relation": "trusted_org", "subject": f"org:{issuer_did}"}]})
        print("tuple:", r.status_code, r.json())

        # present via PEP
        binding = RequestBinding.from_parts("GET", "/energy/plug1", "pep.test")
        vp = build_vp(vc, binding, holder, int(time.time()))
        r = await client.get("http://pep.test/energy/plug1", headers={"Authorization": f"VP {vp.to_token()}"})
        print("present:", r.status_code, r.json())

        # replay
        r2 = await client.get("http://pep.test/energy/plug1", headers={"Authorization": f"VP {vp.to_token()}"})
        print("replay:", r2.status_code, r2.json())

        # revoke then fresh VP
        rr = await client.post(f"http://idm.test/v1/credentials/{vc.id}/revoke", headers=idm_admin)
        print("revoke:", rr.status_code)
        vp3 = build_vp(vc, binding, holder, int(time.time()))
        r3 = await client.get("http://pep.test/energy/plug1", headers={"Authorization": f"VP {vp3.to_token()}"})
        print("after revoke:", r3.status_code, r3.json())

        # metrics
        m = await client.get("http://authz.test/v1/metrics")
        print("metrics:", m.json())


asyncio.run(main())

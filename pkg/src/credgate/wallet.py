"""Holder-side wallet: key material, stored credentials, and request-bound
presentations sent through the enforcement proxy.

Layout under the wallet directory (owner-only permissions):
    keypair.json            seed (hex) and the derived DID
    credentials/<id>.json   one file per stored credential
    last_presentation.json  most recent token, kept for replay debugging
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urlsplit

import httpx

from .identity import (
    DidDocument,
    KeyPair,
    RequestBinding,
    StatusFetchError,
    StatusList,
    VerifiableCredential,
    build_vp,
    did_from_key,
    generate_keypair,
    resolve_did,
    verify_credential,
)
from .identity.credentials import CredentialError
from .identity.dids import DidResolutionError, REG_PREFIX


class WalletError(Exception):
    pass


def _write_private(path: Path, payload: dict) -> None:
    data = json.dumps(payload, indent=2).encode("utf-8")
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    try:
        os.write(fd, data)
    finally:
        os.close(fd)


class WalletStore:
    def __init__(self, directory: Path | str):
        self.directory = Path(directory)

    @property
    def _keypair_path(self) -> Path:
        return self.directory / "keypair.json"

    @property
    def _credentials_dir(self) -> Path:
        return self.directory / "credentials"

    @property
    def _last_presentation_path(self) -> Path:
        return self.directory / "last_presentation.json"

    def initialized(self) -> bool:
        return self._keypair_path.exists()

    def init_keypair(self, seed: bytes | None = None, force: bool = False) -> str:
        if self.initialized() and not force:
            raise WalletError(
                f"wallet at {self.directory} already has a key (use force to replace)"
            )
        self.directory.mkdir(parents=True, exist_ok=True)
        os.chmod(self.directory, 0o700)
        keypair = generate_keypair(seed)
        did = did_from_key(keypair.public_key)
        _write_private(self._keypair_path, {"seed": keypair.seed.hex(), "did": did})
        self._credentials_dir.mkdir(exist_ok=True)
        return did

    def keypair(self) -> KeyPair:
        if not self.initialized():
            raise WalletError(f"no key in wallet at {self.directory}; run keygen first")
        data = json.loads(self._keypair_path.read_text())
        return generate_keypair(bytes.fromhex(data["seed"]))

    def did(self) -> str:
        if not self.initialized():
            raise WalletError(f"no key in wallet at {self.directory}; run keygen first")
        return json.loads(self._keypair_path.read_text())["did"]

    def _credential_path(self, credential_id: str) -> Path:
        return self._credentials_dir / (credential_id.replace(":", "_") + ".json")

    def store_credential(self, vc: VerifiableCredential) -> Path:
        self._credentials_dir.mkdir(parents=True, exist_ok=True)
        path = self._credential_path(vc.id)
        _write_private(path, vc.to_dict())
        return path

    def credentials(self) -> list[VerifiableCredential]:
        if not self._credentials_dir.exists():
            return []
        found = []
        for path in sorted(self._credentials_dir.glob("*.json")):
            found.append(VerifiableCredential.from_dict(json.loads(path.read_text())))
        return found

    def credential(self, credential_id: str | None = None) -> VerifiableCredential:
        """A specific credential, or the sole stored one when unambiguous."""
        if credential_id is not None:
            path = self._credential_path(credential_id)
            if not path.exists():
                raise WalletError(f"no stored credential {credential_id}")
            return VerifiableCredential.from_dict(json.loads(path.read_text()))
        stored = self.credentials()
        if not stored:
            raise WalletError("wallet holds no credentials")
        if len(stored) > 1:
            raise WalletError(
                "wallet holds several credentials; pick one: "
                + ", ".join(vc.id for vc in stored)
            )
        return stored[0]

    def save_last_presentation(self, method: str, url: str, token: str) -> None:
        _write_private(
            self._last_presentation_path,
            {"method": method, "url": url, "token": token},
        )

    def load_last_presentation(self) -> dict:
        if not self._last_presentation_path.exists():
            raise WalletError("no previous presentation to reuse")
        return json.loads(self._last_presentation_path.read_text())


def _idm_resolver(idm_url: str, client: httpx.Client):
    def resolver(did: str) -> DidDocument:
        if did.startswith(REG_PREFIX):
            response = client.get(f"{idm_url}/v1/dids/{did}")
            if response.status_code == 404:
                raise DidResolutionError("not_found", f"{did} not registered")
            if response.status_code != 200:
                raise DidResolutionError(
                    "unreachable", f"registry returned {response.status_code}"
                )
            return DidDocument.from_dict(response.json())
        return resolve_did(did)

    return resolver


def request_credential(
    store: WalletStore,
    idm_url: str,
    admin_token: str,
    attributes: list[str],
    ttl_seconds: int,
    client: httpx.Client | None = None,
) -> VerifiableCredential:
    """Ask the identity manager for a credential; verify it locally before
    anything is written to disk."""
    owns_client = client is None
    client = client or httpx.Client(timeout=10.0)
    try:
        response = client.post(
            f"{idm_url}/v1/credentials",
            json={
                "subject_did": store.did(),
                "attributes": attributes,
                "ttl_seconds": ttl_seconds,
            },
            headers={"Authorization": f"Bearer {admin_token}"},
        )
        if response.status_code not in (200, 201):
            raise WalletError(
                f"issuance failed: {response.status_code} {response.text}"
            )
        try:
            vc = VerifiableCredential.from_dict(response.json())
        except (CredentialError, ValueError) as exc:
            raise WalletError(f"issuer returned an unusable credential: {exc}") from exc

        def status_fetcher(url: str) -> StatusList:
            status_response = client.get(url)
            if status_response.status_code != 200:
                raise StatusFetchError(f"status endpoint returned {status_response.status_code}")
            return StatusList.from_dict(status_response.json())

        try:
            verify_credential(
                vc,
                _idm_resolver(idm_url, client),
                trusted_issuers={vc.issuer},
                status_fetcher=status_fetcher,
                now=int(time.time()),
            )
        except (CredentialError, DidResolutionError) as exc:
            raise WalletError(f"refusing to store unverifiable credential: {exc}") from exc
        store.store_credential(vc)
        return vc
    finally:
        if owns_client:
            client.close()


@dataclass
class PresentOutcome:
    status_code: int
    body: str
    reason_code: str | None

    @property
    def ok(self) -> bool:
        return 200 <= self.status_code < 300


def present(
    store: WalletStore,
    method: str,
    url: str,
    credential_id: str | None = None,
    body: bytes | None = None,
    reuse_nonce: bool = False,
    client: httpx.Client | None = None,
    warn=None,
) -> PresentOutcome:
    """Build a fresh presentation bound to this exact request (or resend the
    previous token when debugging replays) and perform the call."""
    vc = store.credential(credential_id)
    keypair = store.keypair()
    now = int(time.time())
    if now >= vc.expires_at and warn is not None:
        warn(f"credential {vc.id} looks expired locally; the server decides")

    parts = urlsplit(url)
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise WalletError(f"target {url!r} is not an absolute http(s) URL")
    target = parts.path or "/"
    if parts.query:
        target += "?" + parts.query

    if reuse_nonce:
        token = store.load_last_presentation()["token"]
    else:
        binding = RequestBinding.from_parts(
            method=method, target=target, host=parts.netloc, body=body
        )
        vp = build_vp(vc, binding, keypair, now)
        token = vp.to_token()
        store.save_last_presentation(method.upper(), url, token)

    owns_client = client is None
    client = client or httpx.Client(timeout=30.0)
    try:
        response = client.request(
            method.upper(),
            url,
            headers={"Authorization": f"VP {token}"},
            content=body,
        )
    finally:
        if owns_client:
            client.close()

    reason = None
    try:
        payload = response.json()
        if isinstance(payload, dict):
            reason = payload.get("reason_code") or payload.get("reason")
    except ValueError:
        pass
    return PresentOutcome(
        status_code=response.status_code, body=response.text, reason_code=reason
    )

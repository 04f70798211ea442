"""DID methods and resolution.

Two methods are supported:

* ``did:lkey:<base64url public key>`` is self-certifying: the document is
  synthesized from the key embedded in the identifier, no registry involved.
* ``did:reg:<opaque id>`` is registry-based: the document is fetched from an
  identity-manager registry endpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from ..encoding import b64u_decode, b64u_encode
from .keys import PUBLIC_KEY_LEN

LKEY_PREFIX = "did:lkey:"
REG_PREFIX = "did:reg:"

KEY_FRAGMENT = "#key-1"


class DidResolutionError(Exception):
    """Resolution failed; ``kind`` says how.

    kinds: unknown_method | not_found | unreachable | malformed
    """

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass(frozen=True)
class VerificationMethod:
    id: str
    public_key: str  # base64url, 32 bytes decoded

    def public_key_bytes(self) -> bytes:
        return b64u_decode(self.public_key)

    def to_dict(self) -> dict:
        return {"id": self.id, "public_key": self.public_key}


@dataclass(frozen=True)
class DidDocument:
    id: str
    verification_methods: tuple[VerificationMethod, ...]
    authentication: tuple[str, ...] = field(default=())

    def __post_init__(self):
        ids = {vm.id for vm in self.verification_methods}
        for ref in self.authentication:
            if ref not in ids:
                raise ValueError(f"authentication ref {ref!r} has no verification method")

    def find_method(self, method_id: str) -> VerificationMethod | None:
        for vm in self.verification_methods:
            if vm.id == method_id:
                return vm
        return None

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "verification_methods": [vm.to_dict() for vm in self.verification_methods],
            "authentication": list(self.authentication),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DidDocument":
        try:
            methods = tuple(
                VerificationMethod(id=str(vm["id"]), public_key=str(vm["public_key"]))
                for vm in data["verification_methods"]
            )
            return cls(
                id=str(data["id"]),
                verification_methods=methods,
                authentication=tuple(str(a) for a in data.get("authentication", [])),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed DID document: {exc}") from exc


class RegistryClient(Protocol):
    """Lookup of registered (did:reg) documents.

    Implementations raise DidResolutionError("not_found") for unknown DIDs
    and DidResolutionError("unreachable") on transport failures.
    """

    def get_document(self, did: str) -> DidDocument: ...


def did_from_key(public_key: bytes) -> str:
    """Self-certifying DID embedding the raw Ed25519 public key."""
    if len(public_key) != PUBLIC_KEY_LEN:
        raise ValueError("public key must be 32 bytes")
    return LKEY_PREFIX + b64u_encode(public_key)


def document_for_key(did: str, public_key: bytes) -> DidDocument:
    """Single-key document: one verification method, authorized for authentication."""
    vm_id = did + KEY_FRAGMENT
    return DidDocument(
        id=did,
        verification_methods=(
            VerificationMethod(id=vm_id, public_key=b64u_encode(public_key)),
        ),
        authentication=(vm_id,),
    )


def resolve_did(did: str, registry_client: RegistryClient | None = None) -> DidDocument:
    """Resolve either supported method to a DID document.

    did:lkey is pure (no I/O); did:reg needs a registry client.
    """
    if did.startswith(LKEY_PREFIX):
        encoded = did[len(LKEY_PREFIX):]
        try:
            key = b64u_decode(encoded)
        except ValueError as exc:
            raise DidResolutionError("malformed", f"bad key encoding in {did}") from exc
        if len(key) != PUBLIC_KEY_LEN:
            raise DidResolutionError("malformed", f"key in {did} is not 32 bytes")
        return document_for_key(did, key)
    if did.startswith(REG_PREFIX):
        if registry_client is None:
            raise DidResolutionError("unreachable", "no registry client configured")
        return registry_client.get_document(did)
    raise DidResolutionError("unknown_method", f"unsupported DID method: {did}")

"""Signed attribute credentials and status-list revocation.

A credential is a plain JSON document binding attribute tags to a subject
DID, signed by the issuer over the canonical serialization of everything but
the proof. Revocation is a published bitstring: bit i set means the
credential holding status index i is revoked.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Callable, Collection, Sequence

from ..encoding import b64u_decode, b64u_encode, canonical_bytes
from .dids import DidDocument, DidResolutionError, KEY_FRAGMENT, resolve_did
from .keys import KeyPair, verify_signature

ATTRIBUTE_RE = re.compile(r"^[a-z][a-z0-9_]{0,63}$")


class CredentialError(Exception):
    """Verification failed; ``code`` is one of the machine-readable reasons:
    untrusted_issuer | bad_signature | expired | revoked | status_unavailable
    | malformed."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class StatusFetchError(Exception):
    """Status list could not be retrieved (transport-level failure)."""


def sanitize_attribute(raw: str) -> str:
    """Normalize an attribute tag; reject anything the tag grammar cannot hold."""
    cleaned = raw.strip().lower()
    if not ATTRIBUTE_RE.match(cleaned):
        raise ValueError(f"attribute {raw!r} does not sanitize to a valid tag")
    return cleaned


def sanitize_attributes(raw: Sequence[str]) -> tuple[str, ...]:
    cleaned = [sanitize_attribute(a) for a in raw]
    if len(set(cleaned)) != len(cleaned):
        raise ValueError("duplicate attributes after sanitization")
    return tuple(cleaned)


@dataclass(frozen=True)
class CredentialStatus:
    status_url: str
    index: int

    def __post_init__(self):
        if self.index < 0:
            raise ValueError("status index must be non-negative")

    def to_dict(self) -> dict:
        return {"status_url": self.status_url, "index": self.index}


@dataclass(frozen=True)
class Proof:
    verification_method: str
    created: int
    signature: str  # base64url

    def to_dict(self) -> dict:
        return {
            "verification_method": self.verification_method,
            "created": self.created,
            "signature": self.signature,
        }


@dataclass(frozen=True)
class VerifiableCredential:
    id: str
    issuer: str
    subject: str
    attributes: tuple[str, ...]
    issued_at: int
    expires_at: int
    status: CredentialStatus
    proof: Proof

    def __post_init__(self):
        if self.expires_at <= self.issued_at:
            raise ValueError("expires_at must be after issued_at")
        for attr in self.attributes:
            if not ATTRIBUTE_RE.match(attr):
                raise ValueError(f"attribute {attr!r} violates the tag grammar")
        if len(set(self.attributes)) != len(self.attributes):
            raise ValueError("duplicate attributes")

    def signing_payload(self) -> dict:
        """The credential minus its proof; what the issuer signs."""
        return {
            "id": self.id,
            "issuer": self.issuer,
            "subject": self.subject,
            "attributes": list(self.attributes),
            "issued_at": self.issued_at,
            "expires_at": self.expires_at,
            "status": self.status.to_dict(),
        }

    def to_dict(self) -> dict:
        payload = self.signing_payload()
        payload["proof"] = self.proof.to_dict()
        return payload

    @classmethod
    def from_dict(cls, data: dict) -> "VerifiableCredential":
        try:
            return cls(
                id=str(data["id"]),
                issuer=str(data["issuer"]),
                subject=str(data["subject"]),
                attributes=tuple(str(a) for a in data["attributes"]),
                issued_at=int(data["issued_at"]),
                expires_at=int(data["expires_at"]),
                status=CredentialStatus(
                    status_url=str(data["status"]["status_url"]),
                    index=int(data["status"]["index"]),
                ),
                proof=Proof(
                    verification_method=str(data["proof"]["verification_method"]),
                    created=int(data["proof"]["created"]),
                    signature=str(data["proof"]["signature"]),
                ),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CredentialError("malformed", f"bad credential document: {exc}") from exc


@dataclass(frozen=True)
class StatusList:
    """Revocation bitstring. Bit order is MSB-first within each hex nibble:
    bit i lives in nibble i // 4 at mask 1 << (3 - i % 4)."""

    id: str
    size: int
    bits: str

    def __post_init__(self):
        if self.size <= 0:
            raise ValueError("status list size must be positive")
        expected = (self.size + 3) // 4
        if len(self.bits) != expected:
            raise ValueError(f"bits must be {expected} hex chars for size {self.size}")
        if not re.fullmatch(r"[0-9a-f]*", self.bits):
            raise ValueError("bits must be lowercase hex")

    @classmethod
    def fresh(cls, list_id: str, size: int) -> "StatusList":
        return cls(id=list_id, size=size, bits="0" * ((size + 3) // 4))

    def is_revoked(self, index: int) -> bool:
        if not 0 <= index < self.size:
            raise IndexError(f"status index {index} out of range [0, {self.size})")
        nibble = int(self.bits[index // 4], 16)
        return bool(nibble & (1 << (3 - index % 4)))

    def to_dict(self) -> dict:
        return {"id": self.id, "size": self.size, "bits": self.bits}

    @classmethod
    def from_dict(cls, data: dict) -> "StatusList":
        return cls(id=str(data["id"]), size=int(data["size"]), bits=str(data["bits"]))


def revoke_index(status_list: StatusList, index: int) -> StatusList:
    """Set the revocation bit at ``index``; idempotent."""
    if not 0 <= index < status_list.size:
        raise IndexError(f"status index {index} out of range [0, {status_list.size})")
    pos = index // 4
    nibble = int(status_list.bits[pos], 16) | (1 << (3 - index % 4))
    bits = status_list.bits[:pos] + format(nibble, "x") + status_list.bits[pos + 1:]
    return replace(status_list, bits=bits)


def grow_status_list(status_list: StatusList, minimum_size: int) -> StatusList:
    """Double the list until ``minimum_size`` indices fit; existing bits keep
    their positions."""
    size = status_list.size
    while size < minimum_size:
        size *= 2
    if size == status_list.size:
        return status_list
    pad = (size + 3) // 4 - len(status_list.bits)
    return StatusList(id=status_list.id, size=size, bits=status_list.bits + "0" * pad)


def issue_credential(
    *,
    credential_id: str,
    subject: str,
    attributes: Sequence[str],
    issued_at: int,
    expires_at: int,
    status: CredentialStatus,
    issuer_keypair: KeyPair,
    issuer_did: str,
) -> VerifiableCredential:
    """Sign a credential over its canonical payload."""
    attrs = sanitize_attributes(attributes)
    unsigned = VerifiableCredential(
        id=credential_id,
        issuer=issuer_did,
        subject=subject,
        attributes=attrs,
        issued_at=issued_at,
        expires_at=expires_at,
        status=status,
        proof=Proof(verification_method="", created=0, signature=""),
    )
    signature = issuer_keypair.sign(canonical_bytes(unsigned.signing_payload()))
    proof = Proof(
        verification_method=issuer_did + KEY_FRAGMENT,
        created=issued_at,
        signature=b64u_encode(signature),
    )
    return replace(unsigned, proof=proof)


@dataclass(frozen=True)
class VerifiedCredential:
    subject: str
    attributes: tuple[str, ...]
    issuer: str


def verify_credential(
    vc: VerifiableCredential,
    resolver: Callable[[str], DidDocument],
    trusted_issuers: Collection[str],
    status_fetcher: Callable[[str], StatusList],
    now: int,
) -> VerifiedCredential:
    """Full credential check, failing with the first violated condition:
    trusted issuer, then signature, then expiry, then revocation status."""
    if vc.issuer not in trusted_issuers:
        raise CredentialError("untrusted_issuer", f"issuer {vc.issuer} is not trusted")

    try:
        issuer_doc = resolver(vc.issuer)
    except DidResolutionError as exc:
        if exc.kind == "unreachable":
            raise
        if exc.kind == "unknown_method":
            raise CredentialError("malformed", f"issuer DID unresolvable: {exc}") from exc
        raise CredentialError("bad_signature", f"issuer key unavailable: {exc}") from exc

    method = issuer_doc.find_method(vc.proof.verification_method)
    if method is None:
        raise CredentialError(
            "bad_signature",
            f"verification method {vc.proof.verification_method} not in issuer document",
        )
    try:
        signature = b64u_decode(vc.proof.signature)
        key = method.public_key_bytes()
    except ValueError as exc:
        raise CredentialError("malformed", f"bad proof encoding: {exc}") from exc
    if not verify_signature(key, canonical_bytes(vc.signing_payload()), signature):
        raise CredentialError("bad_signature", "credential signature does not verify")

    if now >= vc.expires_at:
        raise CredentialError("expired", f"credential expired at {vc.expires_at}")

    try:
        status_list = status_fetcher(vc.status.status_url)
    except StatusFetchError as exc:
        raise CredentialError("status_unavailable", str(exc)) from exc
    try:
        revoked = status_list.is_revoked(vc.status.index)
    except IndexError as exc:
        raise CredentialError("malformed", str(exc)) from exc
    if revoked:
        raise CredentialError("revoked", f"status bit {vc.status.index} is set")

    return VerifiedCredential(
        subject=vc.subject, attributes=vc.attributes, issuer=vc.issuer
    )

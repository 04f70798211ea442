"""Identity-manager state: DID registry, issued-credential records, and the
revocation status list, all rebuilt from an append-only journal."""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path

from ..encoding import canonical_bytes
from ..identity import (
    CredentialStatus,
    DidDocument,
    KeyPair,
    StatusList,
    VerifiableCredential,
    did_from_key,
    generate_keypair,
    grow_status_list,
    issue_credential,
    resolve_did,
    revoke_index,
)
from ..identity.dids import DidResolutionError, REG_PREFIX
from ..journal import Journal

STATUS_LIST_ID = "default"
INITIAL_STATUS_SIZE = 4096


class RegistryConflict(Exception):
    """DID already registered with a different document."""


class UnknownDid(Exception):
    pass


class UnknownCredential(Exception):
    pass


@dataclass(frozen=True)
class EnrollmentRecord:
    did: str
    did_document: DidDocument
    enrolled_at: int


@dataclass
class IssuedCredentialRecord:
    credential_id: str
    subject: str
    status_index: int
    revoked: bool


class IdmState:
    """Registry plus issuance bookkeeping. Writes are serialized; every
    committed change is journaled so a restart reproduces identical state."""

    def __init__(
        self,
        issuer_seed: bytes,
        status_url: str,
        data_dir: Path | str | None = None,
    ):
        self.issuer_keypair: KeyPair = generate_keypair(issuer_seed)
        self.issuer_did: str = did_from_key(self.issuer_keypair.public_key)
        self.status_url = status_url
        self._lock = threading.Lock()
        self._registry: dict[str, EnrollmentRecord] = {}
        self._credentials: dict[str, IssuedCredentialRecord] = {}
        self._next_index = 0
        self._status = StatusList.fresh(STATUS_LIST_ID, INITIAL_STATUS_SIZE)
        self._status_revision = 0
        self._journal = (
            Journal(Path(data_dir) / "idm-journal.jsonl") if data_dir else None
        )
        if self._journal is not None:
            for record in self._journal.replay():
                self._apply(record)

    def _apply(self, record: dict) -> None:
        event = record["event"]
        if event == "did_registered":
            doc = DidDocument.from_dict(record["did_document"])
            self._registry[doc.id] = EnrollmentRecord(
                did=doc.id, did_document=doc, enrolled_at=int(record["enrolled_at"])
            )
        elif event == "credential_issued":
            index = int(record["status_index"])
            self._credentials[record["credential_id"]] = IssuedCredentialRecord(
                credential_id=record["credential_id"],
                subject=record["subject"],
                status_index=index,
                revoked=False,
            )
            self._next_index = max(self._next_index, index + 1)
            self._status = grow_status_list(self._status, self._next_index)
        elif event == "credential_revoked":
            rec = self._credentials[record["credential_id"]]
            rec.revoked = True
            self._status = revoke_index(self._status, rec.status_index)
            self._status_revision += 1

    def _commit(self, record: dict) -> None:
        if self._journal is not None:
            self._journal.append(record)
        self._apply(record)

    # -- registry --

    def register(self, document: DidDocument, now: int | None = None) -> tuple[str, bool]:
        """Returns (did, created). Identical re-registration is a no-op."""
        now = int(time.time()) if now is None else now
        with self._lock:
            did = document.id
            if not did:
                did = f"{REG_PREFIX}{uuid.uuid4()}"
                document = DidDocument(
                    id=did,
                    verification_methods=document.verification_methods,
                    authentication=document.authentication,
                )
            elif not did.startswith(REG_PREFIX):
                raise ValueError(f"registry only holds {REG_PREFIX}* DIDs, got {did!r}")
            existing = self._registry.get(did)
            if existing is not None:
                if canonical_bytes(existing.did_document.to_dict()) == canonical_bytes(
                    document.to_dict()
                ):
                    return did, False
                raise RegistryConflict(f"{did} already registered with a different document")
            self._commit(
                {
                    "event": "did_registered",
                    "did_document": document.to_dict(),
                    "enrolled_at": now,
                }
            )
            return did, True

    def get_document(self, did: str) -> DidDocument:
        record = self._registry.get(did)
        if record is None:
            raise UnknownDid(did)
        return record.did_document

    def resolve(self, did: str) -> DidDocument:
        """Local resolution: self-certifying DIDs are synthesized, registered
        ones come from this registry."""
        if did.startswith(REG_PREFIX):
            return self.get_document(did)
        return resolve_did(did)

    # -- issuance --

    def issue(
        self,
        subject_did: str,
        attributes: list[str],
        ttl_seconds: int,
        now: int | None = None,
    ) -> VerifiableCredential:
        now = int(time.time()) if now is None else now
        if ttl_seconds <= 0:
            raise ValueError("ttl_seconds must be positive")
        try:
            self.resolve(subject_did)
        except (UnknownDid, DidResolutionError) as exc:
            raise UnknownDid(subject_did) from exc
        with self._lock:
            index = self._next_index
            vc = issue_credential(
                credential_id=f"urn:uuid:{uuid.uuid4()}",
                subject=subject_did,
                attributes=attributes,
                issued_at=now,
                expires_at=now + ttl_seconds,
                status=CredentialStatus(status_url=self.status_url, index=index),
                issuer_keypair=self.issuer_keypair,
                issuer_did=self.issuer_did,
            )
            self._commit(
                {
                    "event": "credential_issued",
                    "credential_id": vc.id,
                    "subject": subject_did,
                    "status_index": index,
                }
            )
            return vc

    def revoke(self, credential_id: str) -> None:
        with self._lock:
            rec = self._credentials.get(credential_id)
            if rec is None:
                raise UnknownCredential(credential_id)
            if rec.revoked:
                return
            self._commit({"event": "credential_revoked", "credential_id": credential_id})

    def credential_record(self, credential_id: str) -> IssuedCredentialRecord:
        rec = self._credentials.get(credential_id)
        if rec is None:
            raise UnknownCredential(credential_id)
        return rec

    def status_list(self, list_id: str) -> tuple[StatusList, int]:
        if list_id != STATUS_LIST_ID:
            raise KeyError(list_id)
        with self._lock:
            return self._status, self._status_revision

    def close(self) -> None:
        if self._journal is not None:
            self._journal.close()

"""Key management, DID methods, credentials, and request-bound presentations."""

from .credentials import (
    CredentialError,
    CredentialStatus,
    Proof,
    StatusFetchError,
    StatusList,
    VerifiableCredential,
    VerifiedCredential,
    grow_status_list,
    issue_credential,
    revoke_index,
    sanitize_attribute,
    sanitize_attributes,
    verify_credential,
)
from .dids import (
    DidDocument,
    DidResolutionError,
    VerificationMethod,
    did_from_key,
    document_for_key,
    resolve_did,
)
from .keys import KeyPair, generate_keypair, verify_signature
from .presentations import (
    DEFAULT_FRESHNESS_WINDOW,
    HolderProof,
    PresentationError,
    ReplayCache,
    RequestBinding,
    VerifiablePresentation,
    VerifiedPresentation,
    build_vp,
    compute_nonce,
    verify_vp,
)

__all__ = [
    "CredentialError",
    "CredentialStatus",
    "DEFAULT_FRESHNESS_WINDOW",
    "DidDocument",
    "DidResolutionError",
    "HolderProof",
    "KeyPair",
    "PresentationError",
    "Proof",
    "ReplayCache",
    "RequestBinding",
    "StatusFetchError",
    "StatusList",
    "VerifiableCredential",
    "VerifiablePresentation",
    "VerificationMethod",
    "VerifiedCredential",
    "VerifiedPresentation",
    "build_vp",
    "compute_nonce",
    "did_from_key",
    "document_for_key",
    "generate_keypair",
    "grow_status_list",
    "issue_credential",
    "resolve_did",
    "revoke_index",
    "sanitize_attribute",
    "sanitize_attributes",
    "verify_credential",
    "verify_signature",
    "verify_vp",
]

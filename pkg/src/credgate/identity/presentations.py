"""Request-bound presentations with anti-replay nonces.

A presentation wraps one credential, is signed by the holder, and is tied to
a single HTTP request: the nonce digests the request's semantics-bearing
fields (method, target, host, body digest) together with a timestamp and a
fresh 128-bit random, so a captured presentation cannot be replayed against
any other request, and a replay cache rejects the same one twice.
"""

from __future__ import annotations

import hashlib
import os
import re
import threading
import time
from dataclasses import dataclass, replace
from typing import Callable, Collection

from ..encoding import b64u_decode, b64u_encode, canonical_bytes
from .credentials import (
    CredentialError,
    StatusList,
    VerifiableCredential,
    VerifiedCredential,
    verify_credential,
)
from .dids import DidDocument, DidResolutionError
from .keys import KeyPair, verify_signature

REGISTERED_METHODS = frozenset(
    {"GET", "HEAD", "POST", "PUT", "DELETE", "CONNECT", "OPTIONS", "TRACE", "PATCH"}
)

RANDOM_RE = re.compile(r"^[0-9a-f]{32}$")

NO_BODY_DIGEST = "-"

DEFAULT_FRESHNESS_WINDOW = 120


class PresentationError(Exception):
    """Presentation verification failed; ``code`` is machine-readable:
    stale | binding_mismatch | replayed | holder_signature_invalid
    | holder_key_mismatch | malformed."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RequestBinding:
    """The request fields a presentation is bound to."""

    method: str
    target: str
    host: str
    content_digest: str

    def __post_init__(self):
        if self.method not in REGISTERED_METHODS:
            raise ValueError(f"unregistered HTTP method {self.method!r}")
        if not self.target or not self.host or not self.content_digest:
            raise ValueError("binding requires target, host, and content digest")
        if self.host != self.host.lower():
            raise ValueError("binding host must be lowercase")

    @classmethod
    def from_parts(
        cls, method: str, target: str, host: str, body: bytes | None = None
    ) -> "RequestBinding":
        """Normalize raw request parts into a binding; empty body counts as none."""
        digest = NO_BODY_DIGEST if not body else b64u_encode(hashlib.sha256(body).digest())
        return cls(
            method=method.upper(), target=target, host=host.lower(), content_digest=digest
        )


def compute_nonce(binding: RequestBinding, timestamp: int, random: str) -> str:
    """SHA-256 over the newline-joined binding fields, timestamp, and random;
    base64url without padding."""
    if not RANDOM_RE.match(random):
        raise ValueError("random must be 32 lowercase hex chars")
    preimage = "\n".join(
        [
            binding.method,
            binding.target,
            binding.host,
            binding.content_digest,
            str(int(timestamp)),
            random,
        ]
    )
    return b64u_encode(hashlib.sha256(preimage.encode("utf-8")).digest())


@dataclass(frozen=True)
class HolderProof:
    verification_method: str
    signature: str

    def to_dict(self) -> dict:
        return {
            "verification_method": self.verification_method,
            "signature": self.signature,
        }


@dataclass(frozen=True)
class VerifiablePresentation:
    credential: VerifiableCredential
    timestamp: int
    random: str
    nonce: str
    holder_proof: HolderProof

    def signing_payload(self) -> dict:
        return {
            "credential": self.credential.to_dict(),
            "timestamp": self.timestamp,
            "random": self.random,
            "nonce": self.nonce,
        }

    def to_dict(self) -> dict:
        payload = self.signing_payload()
        payload["holder_proof"] = self.holder_proof.to_dict()
        return payload

    @classmethod
    def from_dict(cls, data: dict) -> "VerifiablePresentation":
        try:
            return cls(
                credential=VerifiableCredential.from_dict(data["credential"]),
                timestamp=int(data["timestamp"]),
                random=str(data["random"]),
                nonce=str(data["nonce"]),
                holder_proof=HolderProof(
                    verification_method=str(data["holder_proof"]["verification_method"]),
                    signature=str(data["holder_proof"]["signature"]),
                ),
            )
        except CredentialError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise PresentationError("malformed", f"bad presentation document: {exc}") from exc

    def to_token(self) -> str:
        """Wire form carried in ``Authorization: VP <token>``."""
        return b64u_encode(canonical_bytes(self.to_dict()))

    @classmethod
    def from_token(cls, token: str) -> "VerifiablePresentation":
        import json

        try:
            raw = json.loads(b64u_decode(token).decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            raise PresentationError("malformed", f"undecodable token: {exc}") from exc
        if not isinstance(raw, dict):
            raise PresentationError("malformed", "token payload is not an object")
        return cls.from_dict(raw)


class ReplayCache:
    """Exact-membership nonce cache with TTL eviction.

    add_if_absent is the only mutation and is atomic, so two concurrent
    presentations of one nonce cannot both be accepted.
    """

    def __init__(self, ttl: float):
        if ttl <= 0:
            raise ValueError("ttl must be positive")
        self.ttl = ttl
        self._seen: dict[str, float] = {}
        self._lock = threading.Lock()

    def _evict(self, now: float) -> None:
        cutoff = now - self.ttl
        stale = [nonce for nonce, ts in self._seen.items() if ts <= cutoff]
        for nonce in stale:
            del self._seen[nonce]

    def contains(self, nonce: str, now: float | None = None) -> bool:
        now = time.time() if now is None else now
        with self._lock:
            self._evict(now)
            return nonce in self._seen

    def add_if_absent(self, nonce: str, now: float | None = None) -> bool:
        """True if the nonce was fresh and is now recorded."""
        now = time.time() if now is None else now
        with self._lock:
            self._evict(now)
            if nonce in self._seen:
                return False
            self._seen[nonce] = now
            return True

    def __len__(self) -> int:
        with self._lock:
            return len(self._seen)


def build_vp(
    vc: VerifiableCredential,
    binding: RequestBinding,
    holder_keypair: KeyPair,
    now: int,
    rng: Callable[[int], bytes] = os.urandom,
    resolver: Callable[[str], DidDocument] | None = None,
) -> VerifiablePresentation:
    """Construct a presentation for one request: fresh random, nonce over the
    binding, holder signature over everything."""
    from .dids import resolve_did

    resolver = resolver or resolve_did
    subject_doc = resolver(vc.subject)
    method = None
    for vm in subject_doc.verification_methods:
        if vm.public_key_bytes() == holder_keypair.public_key:
            method = vm
            break
    if method is None:
        raise ValueError(
            f"holder key does not appear in the DID document of {vc.subject}"
        )

    random = rng(16).hex()
    nonce = compute_nonce(binding, now, random)
    unsigned = VerifiablePresentation(
        credential=vc,
        timestamp=int(now),
        random=random,
        nonce=nonce,
        holder_proof=HolderProof(verification_method="", signature=""),
    )
    signature = holder_keypair.sign(canonical_bytes(unsigned.signing_payload()))
    return replace(
        unsigned,
        holder_proof=HolderProof(
            verification_method=method.id, signature=b64u_encode(signature)
        ),
    )


@dataclass(frozen=True)
class VerifiedPresentation:
    subject: str
    attributes: tuple[str, ...]
    issuer: str


def verify_vp(
    vp: VerifiablePresentation,
    binding: RequestBinding,
    resolver: Callable[[str], DidDocument],
    trusted_issuers: Collection[str],
    status_fetcher: Callable[[str], StatusList],
    replay_cache: ReplayCache,
    now: int,
    freshness_window: int = DEFAULT_FRESHNESS_WINDOW,
) -> VerifiedPresentation:
    """Verify a presentation against the request it claims to be bound to.

    Checks run in a fixed order so the reported failure is deterministic:
    credential (trust, signature, expiry, revocation), then timestamp
    freshness, then nonce/binding match, then replay, then holder signature.
    The nonce is recorded only when every check passes; the final insert is
    atomic so a concurrent duplicate loses the race and reports a replay.
    """
    if not RANDOM_RE.match(vp.random):
        raise PresentationError("malformed", "random must be 32 lowercase hex chars")

    verified = verify_credential(
        vp.credential, resolver, trusted_issuers, status_fetcher, now
    )

    if abs(now - vp.timestamp) > freshness_window:
        raise PresentationError(
            "stale", f"timestamp {vp.timestamp} outside ±{freshness_window}s of {now}"
        )

    if compute_nonce(binding, vp.timestamp, vp.random) != vp.nonce:
        raise PresentationError(
            "binding_mismatch", "nonce does not match the presented request"
        )

    if replay_cache.contains(vp.nonce):
        raise PresentationError("replayed", "nonce already used")

    try:
        subject_doc = resolver(vp.credential.subject)
    except DidResolutionError as exc:
        if exc.kind == "unreachable":
            raise
        if exc.kind == "unknown_method":
            raise PresentationError("malformed", f"subject DID unresolvable: {exc}") from exc
        raise PresentationError(
            "holder_key_mismatch", f"subject document unavailable: {exc}"
        ) from exc
    method = subject_doc.find_method(vp.holder_proof.verification_method)
    if method is None:
        raise PresentationError(
            "holder_key_mismatch",
            f"verification method {vp.holder_proof.verification_method} not in "
            f"the subject's DID document",
        )
    try:
        signature = b64u_decode(vp.holder_proof.signature)
        key = method.public_key_bytes()
    except ValueError as exc:
        raise PresentationError("malformed", f"bad holder proof encoding: {exc}") from exc
    if not verify_signature(key, canonical_bytes(vp.signing_payload()), signature):
        raise PresentationError(
            "holder_signature_invalid", "holder signature does not verify"
        )

    if not replay_cache.add_if_absent(vp.nonce):
        raise PresentationError("replayed", "nonce already used")

    return VerifiedPresentation(
        subject=verified.subject, attributes=verified.attributes, issuer=verified.issuer
    )

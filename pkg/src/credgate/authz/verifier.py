"""The identity-information validator embedded in the decision service.

Validates a presentation token against the request binding, fetching DID
documents and revocation status from the identity manager. Remote artifacts
are prefetched (optionally cached), then the pure verification pipeline runs
over the prefetched values so failures are still reported in the canonical
check order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import httpx

from ..identity import (
    DidDocument,
    ReplayCache,
    RequestBinding,
    StatusFetchError,
    StatusList,
    VerifiablePresentation,
    VerifiedPresentation,
    resolve_did,
    verify_vp,
)
from ..identity.dids import DidResolutionError, LKEY_PREFIX, REG_PREFIX


@dataclass
class PipConfig:
    trusted_issuers: frozenset[str]
    idm_base_url: str
    freshness_window: int = 120
    cache_enabled: bool = False
    cache_ttl: int = 30


@dataclass
class _CacheEntry:
    value: object
    fetched_at: float


class PresentationValidator:
    """Async front half: fetch remote artifacts; sync back half: verify."""

    def __init__(
        self,
        config: PipConfig,
        client: httpx.AsyncClient | None = None,
    ):
        self.config = config
        self.replay_cache = ReplayCache(ttl=2 * config.freshness_window)
        self._client = client or httpx.AsyncClient(timeout=5.0)
        self._doc_cache: dict[str, _CacheEntry] = {}
        self._status_cache: dict[str, _CacheEntry] = {}

    async def aclose(self) -> None:
        await self._client.aclose()

    def _cached(self, cache: dict[str, _CacheEntry], key: str):
        if not self.config.cache_enabled:
            return None
        entry = cache.get(key)
        if entry is None or time.time() - entry.fetched_at > self.config.cache_ttl:
            return None
        return entry.value

    def _store(self, cache: dict[str, _CacheEntry], key: str, value) -> None:
        if self.config.cache_enabled:
            cache[key] = _CacheEntry(value=value, fetched_at=time.time())

    async def _fetch_document(self, did: str) -> DidDocument:
        if did.startswith(LKEY_PREFIX):
            return resolve_did(did)
        if not did.startswith(REG_PREFIX):
            raise DidResolutionError("unknown_method", f"unsupported DID method: {did}")
        cached = self._cached(self._doc_cache, did)
        if cached is not None:
            return cached
        url = f"{self.config.idm_base_url}/v1/dids/{did}"
        try:
            response = await self._client.get(url)
        except httpx.HTTPError as exc:
            raise DidResolutionError("unreachable", f"registry fetch failed: {exc}") from exc
        if response.status_code == 404:
            raise DidResolutionError("not_found", f"{did} not registered")
        if response.status_code != 200:
            raise DidResolutionError(
                "unreachable", f"registry returned {response.status_code}"
            )
        document = DidDocument.from_dict(response.json())
        self._store(self._doc_cache, did, document)
        return document

    async def _fetch_status(self, url: str) -> StatusList:
        cached = self._cached(self._status_cache, url)
        if cached is not None:
            return cached
        try:
            response = await self._client.get(url)
        except httpx.HTTPError as exc:
            raise StatusFetchError(f"status fetch failed: {exc}") from exc
        if response.status_code != 200:
            raise StatusFetchError(f"status endpoint returned {response.status_code}")
        try:
            status = StatusList.from_dict(response.json())
        except (ValueError, KeyError) as exc:
            raise StatusFetchError(f"unparseable status list: {exc}") from exc
        self._store(self._status_cache, url, status)
        return status

    async def validate(
        self,
        vp: VerifiablePresentation,
        binding: RequestBinding,
        now: int | None = None,
    ) -> VerifiedPresentation:
        """Raises CredentialError / PresentationError / DidResolutionError /
        StatusFetchError; callers map those to decision reason codes."""
        now = int(time.time()) if now is None else now
        prefetched: dict[str, DidDocument | Exception] = {}
        for did in {vp.credential.issuer, vp.credential.subject}:
            try:
                prefetched[did] = await self._fetch_document(did)
            except DidResolutionError as exc:
                prefetched[did] = exc

        status_result: StatusList | Exception
        try:
            status_result = await self._fetch_status(vp.credential.status.status_url)
        except StatusFetchError as exc:
            status_result = exc

        def resolver(did: str) -> DidDocument:
            result = prefetched.get(did)
            if result is None:
                raise DidResolutionError("not_found", f"{did} was not prefetched")
            if isinstance(result, Exception):
                raise result
            return result

        def status_fetcher(url: str) -> StatusList:
            if isinstance(status_result, Exception):
                raise status_result
            return status_result

        return verify_vp(
            vp,
            binding,
            resolver,
            self.config.trusted_issuers,
            status_fetcher,
            self.replay_cache,
            now,
            self.config.freshness_window,
        )

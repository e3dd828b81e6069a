"""PubMed ESearch client with pacing and bounded retries."""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass
from typing import Any, Callable

import httpx

from strategist.errors import InvalidInput, StrategistError
from strategist.retrieval.ratelimit import RateLimiter, shared_limiter

logger = logging.getLogger(__name__)

ESEARCH_URL = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/esearch.fcgi"
MAX_RETMAX = 1000
RATE_WITHOUT_KEY = 3.0
RATE_WITH_KEY = 10.0
TRANSIENT_STATUS = {429, 500, 502, 503, 504}


class ApiError(StrategistError):
    """PubMed could not answer the search. Reviews that hit this are excluded."""


class HttpError(ApiError):
    def __init__(self, status: int, body: str) -> None:
        self.status = status
        self.body = body[:500]
        super().__init__(f"HTTP {status}: {self.body}")


class RateLimited(HttpError):
    def __init__(self, status: int, body: str, retry_after: float | None) -> None:
        self.retry_after = retry_after
        super().__init__(status, body)


@dataclass(frozen=True)
class SearchOutcome:
    ids: tuple[str, ...]
    total_count: int

    def __post_init__(self) -> None:
        if len(set(self.ids)) != len(self.ids):
            raise InvalidInput("search outcome ids must be unique")
        if self.total_count < len(self.ids):
            raise InvalidInput("total_count cannot be smaller than the number of ids")

    @property
    def truncated(self) -> bool:
        return self.total_count > len(self.ids)


def parse_esearch(payload: dict[str, Any]) -> SearchOutcome:
    """Turn an ESearch JSON document into a SearchOutcome."""
    if "error" in payload:
        raise ApiError(str(payload["error"]))
    result = payload.get("esearchresult")
    if not isinstance(result, dict):
        raise ApiError("response has no esearchresult")
    if "ERROR" in result:
        raise ApiError(str(result["ERROR"]))
    errors = result.get("errorlist") or {}
    # phrasesnotfound / fieldsnotfound are warnings PubMed still answers through
    fatal = {k: v for k, v in errors.items() if v and k not in ("phrasesnotfound", "fieldsnotfound")}
    if fatal:
        raise ApiError(f"PubMed reported errors: {fatal}")
    ids = tuple(dict.fromkeys(str(i) for i in result.get("idlist", [])))
    try:
        count = int(result.get("count", len(ids)))
    except (TypeError, ValueError):
        raise ApiError(f"bad count {result.get('count')!r}") from None
    return SearchOutcome(ids=ids, total_count=max(count, len(ids)))


def _retry_after(response: httpx.Response) -> float | None:
    value = response.headers.get("Retry-After")
    if value is None:
        return None
    try:
        return max(0.0, float(value))
    except ValueError:
        return None


class PubMedClient:
    """ESearch over HTTP.

    Safe to share across threads. Every outbound request goes through one
    process-wide :class:`RateLimiter` (3 req/s, or 10 req/s with an API key)
    unless a limiter is passed in.
    """

    def __init__(
        self,
        api_key: str | None = None,
        *,
        base_url: str = ESEARCH_URL,
        limiter: RateLimiter | None = None,
        transport: httpx.BaseTransport | None = None,
        timeout: float = 30.0,
        max_attempts: int = 3,
        backoff: float = 1.0,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.api_key = api_key if api_key is not None else os.environ.get("PUBMED_API_KEY") or None
        self.base_url = base_url
        self.limiter = limiter or shared_limiter(RATE_WITH_KEY if self.api_key else RATE_WITHOUT_KEY)
        self.max_attempts = max_attempts
        self.backoff = backoff
        self._sleep = sleep
        self._http = httpx.Client(transport=transport, timeout=timeout)

    def close(self) -> None:
        self._http.close()

    def __enter__(self) -> PubMedClient:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()

    def build_params(
        self,
        query: str,
        retmax: int = MAX_RETMAX,
        date_floor: int | None = None,
        date_ceiling: int | None = None,
    ) -> dict[str, str]:
        if not query.strip():
            raise InvalidInput("query must be non-empty")
        if not 0 <= retmax <= MAX_RETMAX:
            raise InvalidInput(f"retmax must be between 0 and {MAX_RETMAX}")
        params = {"db": "pubmed", "term": query, "retmax": str(retmax), "retmode": "json"}
        if self.api_key:
            params["api_key"] = self.api_key
        if date_floor is not None or date_ceiling is not None:
            # ESearch ignores a lone mindate or maxdate
            params["mindate"] = str(date_floor if date_floor is not None else 1800)
            params["maxdate"] = str(date_ceiling if date_ceiling is not None else 3000)
            params["datetype"] = "pdat"
        return params

    def esearch(
        self,
        query: str,
        retmax: int = MAX_RETMAX,
        *,
        date_floor: int | None = None,
        date_ceiling: int | None = None,
    ) -> SearchOutcome:
        params = self.build_params(query, retmax, date_floor, date_ceiling)
        last: ApiError | None = None
        for attempt in range(1, self.max_attempts + 1):
            self.limiter.acquire()
            try:
                response = self._http.get(self.base_url, params=params)
            except httpx.TransportError as exc:
                last = ApiError(f"transport failure: {exc}")
                delay = self.backoff * 2 ** (attempt - 1)
            else:
                if response.status_code == 200:
                    try:
                        payload = response.json()
                    except ValueError:
                        raise ApiError(f"non-JSON response: {response.text[:200]}") from None
                    return parse_esearch(payload)
                if response.status_code == 429:
                    retry_after = _retry_after(response)
                    last = RateLimited(response.status_code, response.text, retry_after)
                    delay = retry_after if retry_after is not None else self.backoff * 2 ** (attempt - 1)
                elif response.status_code in TRANSIENT_STATUS:
                    last = HttpError(response.status_code, response.text)
                    delay = self.backoff * 2 ** (attempt - 1)
                else:
                    raise HttpError(response.status_code, response.text)
            if attempt < self.max_attempts:
                logger.warning("esearch attempt %d failed (%s); retrying in %.1fs", attempt, last, delay)
                self._sleep(delay)
        assert last is not None
        raise last


def pubmed_esearch(
    query: str,
    retmax: int = MAX_RETMAX,
    *,
    api_key: str | None = None,
    date_floor: int | None = None,
    date_ceiling: int | None = None,
    client: PubMedClient | None = None,
) -> SearchOutcome:
    """One-shot ESearch call; pass ``client`` to reuse connections."""
    if client is not None:
        return client.esearch(query, retmax, date_floor=date_floor, date_ceiling=date_ceiling)
    with PubMedClient(api_key) as own:
        return own.esearch(query, retmax, date_floor=date_floor, date_ceiling=date_ceiling)

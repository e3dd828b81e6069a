"""Chat-completion access with schema-validated replies and record/replay.

A :class:`Gateway` runs in one of three modes:

``live``
    call the provider, keep nothing.
``record``
    call the provider and store the accepted reply under the exchange digest.
``replay``
    never touch the network; answer from the fixture store or fail with
    :class:`MissingFixture`.

Replies are parsed as JSON and validated against a registered pydantic
model. An invalid reply triggers a repair prompt carrying the validation
error, up to ``max_attempts`` calls in total.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Mapping, Protocol

import httpx
from pydantic import BaseModel, ValidationError

from strategist.errors import InvalidInput, StrategistError

logger = logging.getLogger(__name__)

MODES = ("live", "record", "replay")
DEFAULT_MODEL = "gpt-4o-mini"
DEFAULT_BASE_URL = "https://api.openai.com/v1"


class MissingFixture(StrategistError):
    def __init__(self, digest: str, exchange: PromptExchange | None = None) -> None:
        self.digest = digest
        self.exchange = exchange
        what = f" for schema {exchange.response_schema_name!r}" if exchange else ""
        super().__init__(f"no recorded reply {digest}{what}")


class SchemaInvalid(StrategistError):
    def __init__(self, schema: str, attempts: int, error: str, raw_text: str) -> None:
        self.schema = schema
        self.attempts = attempts
        self.raw_text = raw_text
        super().__init__(f"reply failed schema {schema!r} after {attempts} attempt(s): {error}")


class ProviderHttpError(StrategistError):
    def __init__(self, status: int | None, body: str) -> None:
        self.status = status
        self.body = body[:500]
        super().__init__(f"chat provider error {status}: {self.body}")


_SCHEMAS: dict[str, type[BaseModel]] = {}


def register_schema(name: str, model: type[BaseModel]) -> type[BaseModel]:
    existing = _SCHEMAS.get(name)
    if existing is not None and existing is not model:
        raise InvalidInput(f"schema name {name!r} already registered")
    _SCHEMAS[name] = model
    return model


def get_schema(name: str) -> type[BaseModel]:
    try:
        return _SCHEMAS[name]
    except KeyError:
        raise InvalidInput(f"unknown response schema {name!r}") from None


@dataclass(frozen=True)
class PromptExchange:
    system_prompt: str
    user_prompt: str
    response_schema_name: str
    temperature: float = 0.0
    context: Mapping[str, Any] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.system_prompt.strip() or not self.user_prompt.strip():
            raise InvalidInput("system and user prompts must be non-empty")
        if not 0 <= self.temperature <= 2:
            raise InvalidInput("temperature must lie in [0, 2]")


@dataclass(frozen=True)
class StructuredReply:
    raw_text: str
    parsed: BaseModel
    attempts: int
    digest: str


def exchange_digest(model: str, system_prompt: str, user_prompt: str, schema_name: str) -> str:
    """Content address of an exchange; depends on nothing else."""
    blob = json.dumps([model, system_prompt, user_prompt, schema_name], ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class FixtureStore:
    """One JSON file per recorded exchange, named by its digest.

    Reads are lock-free. Writes go to a temp file in the same directory and
    are renamed into place, so a reader never sees a partial document.
    """

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)

    def path(self, digest: str) -> Path:
        return self.directory / f"{digest}.json"

    def __contains__(self, digest: str) -> bool:
        return self.path(digest).is_file()

    def load(self, digest: str) -> dict[str, Any]:
        try:
            return json.loads(self.path(digest).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise MissingFixture(digest) from None

    def get(self, digest: str) -> str:
        return self.load(digest)["response"]

    def put(self, digest: str, *, model: str, system: str, user: str, schema: str, response: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        doc = {"model": model, "system": system, "user": user, "schema": schema, "response": response}
        data = json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=f".{digest[:12]}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(data)
            os.replace(tmp, self.path(digest))
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        return self.path(digest)

    def digests(self) -> Iterator[str]:
        if not self.directory.is_dir():
            return iter(())
        return iter(sorted(p.stem for p in self.directory.glob("*.json")))


class ChatProvider(Protocol):
    def complete(self, model: str, system_prompt: str, user_prompt: str, temperature: float) -> str: ...


class OpenAICompatibleProvider:
    """POSTs to ``{base_url}/chat/completions`` and returns the first choice's text."""

    def __init__(
        self,
        api_key: str | None,
        base_url: str = DEFAULT_BASE_URL,
        *,
        timeout: float = 120.0,
        transport: httpx.BaseTransport | None = None,
        json_mode: bool = True,
    ) -> None:
        self.api_key = api_key
        self.base_url = base_url.rstrip("/")
        self.json_mode = json_mode
        self._http = httpx.Client(timeout=timeout, transport=transport)

    def complete(self, model: str, system_prompt: str, user_prompt: str, temperature: float) -> str:
        body: dict[str, Any] = {
            "model": model,
            "temperature": temperature,
            "messages": [
                {"role": "system", "content": system_prompt},
                {"role": "user", "content": user_prompt},
            ],
        }
        if self.json_mode:
            body["response_format"] = {"type": "json_object"}
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        try:
            response = self._http.post(f"{self.base_url}/chat/completions", json=body, headers=headers)
        except httpx.HTTPError as exc:
            raise ProviderHttpError(None, str(exc)) from exc
        if response.status_code != 200:
            raise ProviderHttpError(response.status_code, response.text)
        try:
            return response.json()["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderHttpError(response.status_code, f"unexpected body: {response.text}") from exc


_FENCE = re.compile(r"^\s*```(?:json)?\s*\n?(.*?)\n?\s*```\s*$", re.DOTALL)


def _extract_json(raw_text: str) -> str:
    m = _FENCE.match(raw_text)
    return m.group(1) if m else raw_text


def validate_reply(raw_text: str, schema_name: str, context: Mapping[str, Any] | None = None) -> BaseModel:
    model = get_schema(schema_name)
    return model.model_validate_json(_extract_json(raw_text), context=dict(context or {}))


REPAIR_SUFFIX = (
    "\n\nYour previous reply could not be accepted.\n"
    "Previous reply:\n{reply}\n\n"
    "Problem:\n{error}\n\n"
    "Reply again with a single corrected JSON object and nothing else."
)


class Gateway:
    def __init__(
        self,
        provider: ChatProvider | None = None,
        *,
        model: str = DEFAULT_MODEL,
        mode: str = "live",
        store: FixtureStore | None = None,
        max_attempts: int = 3,
    ) -> None:
        if mode not in MODES:
            raise InvalidInput(f"mode must be one of {MODES}, got {mode!r}")
        if mode in ("record", "replay") and store is None:
            raise InvalidInput(f"{mode} mode needs a fixture store")
        if mode in ("live", "record") and provider is None:
            raise InvalidInput(f"{mode} mode needs a chat provider")
        if max_attempts < 1:
            raise InvalidInput("max_attempts must be at least 1")
        self.provider = provider
        self.model = model
        self.mode = mode
        self.store = store
        self.max_attempts = max_attempts

    def digest(self, x: PromptExchange) -> str:
        return exchange_digest(self.model, x.system_prompt, x.user_prompt, x.response_schema_name)

    def complete_structured(self, x: PromptExchange) -> StructuredReply:
        digest = self.digest(x)
        if self.mode == "replay":
            assert self.store is not None
            if digest not in self.store:
                raise MissingFixture(digest, x)
            raw = self.store.get(digest)
            try:
                parsed = validate_reply(raw, x.response_schema_name, x.context)
            except ValidationError as exc:
                raise SchemaInvalid(x.response_schema_name, 1, str(exc), raw) from exc
            return StructuredReply(raw, parsed, 1, digest)

        assert self.provider is not None
        user_prompt = x.user_prompt
        raw, error = "", ""
        for attempt in range(1, self.max_attempts + 1):
            raw = self.provider.complete(self.model, x.system_prompt, user_prompt, x.temperature)
            try:
                parsed = validate_reply(raw, x.response_schema_name, x.context)
            except ValidationError as exc:
                error = _describe(exc)
                logger.info("reply %d for %s rejected: %s", attempt, x.response_schema_name, error)
                user_prompt = x.user_prompt + REPAIR_SUFFIX.format(reply=raw, error=error)
                continue
            if self.mode == "record":
                assert self.store is not None
                self.store.put(
                    digest,
                    model=self.model,
                    system=x.system_prompt,
                    user=x.user_prompt,
                    schema=x.response_schema_name,
                    response=raw,
                )
            return StructuredReply(raw, parsed, attempt, digest)
        raise SchemaInvalid(x.response_schema_name, self.max_attempts, error, raw)


def _describe(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors(include_url=False):
        loc = ".".join(str(p) for p in err.get("loc", ())) or "reply"
        parts.append(f"{loc}: {err.get('msg')}")
    return "; ".join(parts)

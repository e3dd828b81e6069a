from strategist.llm.gateway import (
    DEFAULT_BASE_URL,
    DEFAULT_MODEL,
    MODES,
    ChatProvider,
    FixtureStore,
    Gateway,
    MissingFixture,
    OpenAICompatibleProvider,
    PromptExchange,
    ProviderHttpError,
    SchemaInvalid,
    StructuredReply,
    exchange_digest,
    get_schema,
    register_schema,
    validate_reply,
)

__all__ = [
    "DEFAULT_BASE_URL",
    "DEFAULT_MODEL",
    "MODES",
    "ChatProvider",
    "FixtureStore",
    "Gateway",
    "MissingFixture",
    "OpenAICompatibleProvider",
    "PromptExchange",
    "ProviderHttpError",
    "SchemaInvalid",
    "StructuredReply",
    "exchange_digest",
    "get_schema",
    "register_schema",
    "validate_reply",
]

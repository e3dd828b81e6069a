from strategist.retrieval.index import (
    CorpusIndex,
    DocRecord,
    eval_query,
    index_corpus,
    iter_corpus,
    load_corpus,
    tokenize,
    write_corpus,
)
from strategist.retrieval.pubmed import (
    ApiError,
    HttpError,
    PubMedClient,
    RateLimited,
    SearchOutcome,
    parse_esearch,
    pubmed_esearch,
)
from strategist.retrieval.ratelimit import RateLimiter, shared_limiter

__all__ = [
    "ApiError",
    "CorpusIndex",
    "DocRecord",
    "HttpError",
    "PubMedClient",
    "RateLimited",
    "RateLimiter",
    "SearchOutcome",
    "eval_query",
    "index_corpus",
    "iter_corpus",
    "load_corpus",
    "parse_esearch",
    "pubmed_esearch",
    "shared_limiter",
    "tokenize",
    "write_corpus",
]

"""Offline positional inverted index over title+abstract text.

This is the deterministic stand-in for PubMed used by tests and offline
benchmarks. Tokens are lowercased alphanumeric runs; there is no stemming.
A multi-word phrase matches a document only where its tokens are adjacent.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

from strategist.errors import InvalidInput
from strategist.query.ast import And, FieldTag, Not, Or, QueryNode, Term

_TOKEN = re.compile(r"[^\W_]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class DocRecord:
    doc_id: str
    title: str
    abstract: str = ""
    year: int | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.doc_id, str) or not self.doc_id:
            raise InvalidInput("doc_id must be non-empty text")

    @property
    def text(self) -> str:
        return f"{self.title} {self.abstract}"

    def to_dict(self) -> dict:
        return {"doc_id": self.doc_id, "title": self.title, "abstract": self.abstract, "year": self.year}


@dataclass(frozen=True, eq=False)
class CorpusIndex:
    positions: Mapping[str, Mapping[str, tuple[int, ...]]]
    universe: frozenset[str]

    @property
    def postings(self) -> dict[str, frozenset[str]]:
        return {tok: frozenset(docs) for tok, docs in self.positions.items()}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CorpusIndex):
            return NotImplemented
        return self.universe == other.universe and _plain(self.positions) == _plain(other.positions)

    __hash__ = None  # type: ignore[assignment]

    def lookup(self, phrase: str) -> frozenset[str]:
        """Documents containing every token of ``phrase`` consecutively."""
        tokens = tokenize(phrase)
        if not tokens:
            return frozenset()
        lists = [self.positions.get(tok) for tok in tokens]
        if any(p is None for p in lists):
            return frozenset()
        first, rest = lists[0], lists[1:]
        if not rest:
            return frozenset(first)
        hits = set(first).intersection(*rest)
        out = set()
        for doc in hits:
            following = [set(p[doc]) for p in rest]
            if any(all(start + k + 1 in following[k] for k in range(len(rest))) for start in first[doc]):
                out.add(doc)
        return frozenset(out)


def _plain(positions: Mapping[str, Mapping[str, tuple[int, ...]]]) -> dict:
    return {tok: dict(docs) for tok, docs in positions.items()}


def index_corpus(docs: Iterable[DocRecord]) -> CorpusIndex:
    positions: dict[str, dict[str, list[int]]] = {}
    universe: set[str] = set()
    for doc in docs:
        if doc.doc_id in universe:
            raise InvalidInput(f"duplicate doc_id {doc.doc_id!r}")
        universe.add(doc.doc_id)
        for pos, tok in enumerate(tokenize(doc.text)):
            positions.setdefault(tok, {}).setdefault(doc.doc_id, []).append(pos)
    frozen = {
        tok: MappingProxyType({d: tuple(p) for d, p in sorted(by_doc.items())})
        for tok, by_doc in sorted(positions.items())
    }
    return CorpusIndex(MappingProxyType(frozen), frozenset(universe))


def eval_query(q: QueryNode, index: CorpusIndex) -> frozenset[str]:
    """Set of doc_ids matching ``q``.

    Title/abstract, all-fields and text-word tags all read the indexed text;
    MeSH headings are not available offline and match nothing.
    """
    if isinstance(q, Term):
        if q.tag is FieldTag.MESH_HEADING:
            return frozenset()
        return index.lookup(q.phrase)
    if isinstance(q, Not):
        return eval_query(q.positive, index) - eval_query(q.negative, index)
    results = (eval_query(c, index) for c in q.children)
    if isinstance(q, And):
        acc = next(results)
        for r in results:
            if not acc:
                break
            acc = acc & r
        return acc
    assert isinstance(q, Or)
    return frozenset().union(*results)


def iter_corpus(path: str | Path) -> Iterator[DocRecord]:
    """Read a JSON-lines corpus file, one DocRecord per line."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                yield DocRecord(
                    doc_id=str(row["doc_id"]),
                    title=row.get("title") or "",
                    abstract=row.get("abstract") or "",
                    year=row.get("year"),
                )
            except (json.JSONDecodeError, KeyError, TypeError, InvalidInput) as exc:
                raise InvalidInput(f"{path}:{lineno}: bad corpus record: {exc}") from exc


def load_corpus(path: str | Path) -> list[DocRecord]:
    return list(iter_corpus(path))


def write_corpus(docs: Iterable[DocRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc.to_dict(), ensure_ascii=False) + "\n")

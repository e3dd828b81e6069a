"""Independent reference implementations and random generators for tests.

Nothing here imports the index or evaluator under test: documents are
tokenized with a separate character scan and queries are evaluated one
document at a time by direct recursion over the tree.
"""

from __future__ import annotations

import random
from pathlib import Path

from strategist.query import And, FieldTag, Not, Or, QueryNode, Term
from strategist.retrieval import DocRecord

DATA = Path(__file__).parent / "data"

VOCAB = ["heart", "failure", "vitamin", "d", "women", "adults", "metformin", "child", "pain", "trial", "risk", "care"]
TAGS = [FieldTag.TITLE_ABSTRACT] * 6 + [FieldTag.ALL_FIELDS, FieldTag.TEXT_WORD, FieldTag.MESH_HEADING]

# phrases that stress the serializer and parser
TRICKY = [
    "AND", "OR", "NOT", "and", "a(b", "x]y", "[tiab", "naïve", "T2DM", "non-insulin-dependent",
    "  padded  ", "tab\tseparated", "heart failure", "C-reactive protein", "5-HT", "it's", "épée", "1,25-dihydroxy",
]


def ref_tokens(text: str) -> list[str]:
    out, cur = [], []
    for ch in text.lower():
        if ch.isalnum():
            cur.append(ch)
        elif cur:
            out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return out


def phrase_in(tokens: list[str], phrase: str) -> bool:
    needle = ref_tokens(phrase)
    n = len(needle)
    if n == 0:
        return False
    return any(tokens[i : i + n] == needle for i in range(len(tokens) - n + 1))


def doc_matches(q: QueryNode, tokens: list[str]) -> bool:
    if isinstance(q, Term):
        return q.tag is not FieldTag.MESH_HEADING and phrase_in(tokens, q.phrase)
    if isinstance(q, And):
        return all(doc_matches(c, tokens) for c in q.children)
    if isinstance(q, Or):
        return any(doc_matches(c, tokens) for c in q.children)
    assert isinstance(q, Not)
    return doc_matches(q.positive, tokens) and not doc_matches(q.negative, tokens)


def brute_eval(q: QueryNode, docs: list[DocRecord]) -> set[str]:
    return {d.doc_id for d in docs if doc_matches(q, ref_tokens(d.title + " " + d.abstract))}


def random_phrase(rng: random.Random, tricky: bool = False) -> str:
    if tricky and rng.random() < 0.3:
        return rng.choice(TRICKY)
    n = 1 if rng.random() < 0.6 else rng.randint(2, 3)
    return " ".join(rng.choice(VOCAB) for _ in range(n))


def random_ast(rng: random.Random, max_depth: int = 6, max_fanout: int = 8, tricky: bool = False) -> QueryNode:
    """Random tree of at most ``max_depth`` levels and ``max_fanout`` children per node."""

    def build(depth: int) -> QueryNode:
        if depth >= max_depth or rng.random() < 0.25 + 0.13 * depth:
            return Term(random_phrase(rng, tricky), rng.choice(TAGS))
        kind = rng.random()
        if kind < 0.2:
            return Not(build(depth + 1), build(depth + 1))
        n = rng.randint(2, max_fanout if depth < 2 else min(max_fanout, 4))
        children = [build(depth + 1) for _ in range(n)]
        if rng.random() < 0.15:
            children.append(children[0])  # exact duplicates exercise dedup
        return (And if kind < 0.6 else Or)(*children)

    return build(1)


def random_corpus(rng: random.Random, max_docs: int = 200) -> list[DocRecord]:
    docs = []
    for i in range(rng.randint(0, max_docs)):
        title = " ".join(rng.choice(VOCAB) for _ in range(rng.randint(1, 6)))
        abstract = " ".join(rng.choice(VOCAB) for _ in range(rng.randint(0, 8)))
        docs.append(DocRecord(f"d{i}", title.capitalize(), abstract, 2000 + i % 20))
    return docs


def random_term_sets(rng: random.Random, max_studies: int = 5, max_terms: int = 10) -> list[tuple[list[str], list[str]]]:
    return [
        (
            [random_phrase(rng) for _ in range(rng.randint(1, max_terms))],
            [random_phrase(rng) for _ in range(rng.randint(1, max_terms))],
        )
        for _ in range(rng.randint(1, max_studies))
    ]


def leads_oracle(studies: list[tuple[list[str], list[str]]], docs: list[DocRecord]) -> set[str]:
    """(union over studies of intersection of population term hits)
    intersected with the same for intervention terms, by plain set algebra."""
    universe = {d.doc_id for d in docs}
    tokens = {d.doc_id: ref_tokens(d.title + " " + d.abstract) for d in docs}

    def hits(phrase: str) -> set[str]:
        return {i for i in universe if phrase_in(tokens[i], phrase)}

    def side(k: int) -> set[str]:
        out: set[str] = set()
        for study in studies:
            acc = set(universe)
            for phrase in study[k]:
                acc &= hits(phrase)
            out |= acc
        return out

    return side(0) & side(1)

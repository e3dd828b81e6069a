"""Immutable Boolean query tree.

Four node kinds make up a query: :class:`Term` leaves carrying a phrase and a
PubMed field tag, n-ary :class:`And` / :class:`Or`, and binary :class:`Not`
(``positive NOT negative``). Nodes are frozen dataclasses; ``==`` compares the
raw tree. Use :func:`equivalent` to compare two queries up to normalization.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Iterable, Union

from strategist.errors import InvalidInput


class FieldTag(enum.Enum):
    TITLE_ABSTRACT = "tiab"
    MESH_HEADING = "mh"
    ALL_FIELDS = "all"
    TEXT_WORD = "tw"

    @property
    def token(self) -> str:
        return f"[{self.value}]"

    @classmethod
    def parse(cls, name: str) -> FieldTag:
        """Look up a tag by short code (``tiab``), bracketed token, or PubMed long name."""
        key = name.strip().strip("[]").strip().lower()
        try:
            return _TAG_ALIASES[key]
        except KeyError:
            raise InvalidInput(f"unknown field tag {name!r}") from None


_TAG_ALIASES = {
    "tiab": FieldTag.TITLE_ABSTRACT,
    "title/abstract": FieldTag.TITLE_ABSTRACT,
    "mh": FieldTag.MESH_HEADING,
    "mesh": FieldTag.MESH_HEADING,
    "mesh terms": FieldTag.MESH_HEADING,
    "all": FieldTag.ALL_FIELDS,
    "all fields": FieldTag.ALL_FIELDS,
    "tw": FieldTag.TEXT_WORD,
    "text word": FieldTag.TEXT_WORD,
}

DEFAULT_TAG = FieldTag.TITLE_ABSTRACT


@dataclass(frozen=True)
class Term:
    phrase: str
    tag: FieldTag = DEFAULT_TAG

    def __post_init__(self) -> None:
        if not isinstance(self.phrase, str) or not self.phrase.strip():
            raise InvalidInput("term phrase must be non-empty text")
        if '"' in self.phrase:
            raise InvalidInput(f"term phrase contains a double quote: {self.phrase!r}")
        if not isinstance(self.tag, FieldTag):
            raise InvalidInput(f"term tag must be a FieldTag, got {self.tag!r}")


@dataclass(frozen=True, init=False)
class And:
    children: tuple[QueryNode, ...]

    def __init__(self, *children: QueryNode) -> None:
        object.__setattr__(self, "children", _checked_children("And", children))


@dataclass(frozen=True, init=False)
class Or:
    children: tuple[QueryNode, ...]

    def __init__(self, *children: QueryNode) -> None:
        object.__setattr__(self, "children", _checked_children("Or", children))


@dataclass(frozen=True)
class Not:
    positive: QueryNode
    negative: QueryNode

    def __post_init__(self) -> None:
        for side in (self.positive, self.negative):
            if not isinstance(side, _NODE_TYPES):
                raise InvalidInput(f"Not operand must be a query node, got {side!r}")


QueryNode = Union[Term, And, Or, Not]
_NODE_TYPES = (Term, And, Or, Not)


def _checked_children(kind: str, children: Iterable[QueryNode]) -> tuple[QueryNode, ...]:
    children = tuple(children)
    if len(children) < 2:
        raise InvalidInput(f"{kind} needs at least 2 children, got {len(children)}")
    for child in children:
        if not isinstance(child, _NODE_TYPES):
            raise InvalidInput(f"{kind} child must be a query node, got {child!r}")
    return children


def term(phrase: str, tag: FieldTag = DEFAULT_TAG) -> Term:
    return Term(phrase, tag)


def all_of(nodes: Iterable[QueryNode]) -> QueryNode:
    """And over ``nodes``; a single node is returned as is."""
    nodes = tuple(nodes)
    if not nodes:
        raise InvalidInput("all_of needs at least one node")
    return nodes[0] if len(nodes) == 1 else And(*nodes)


def any_of(nodes: Iterable[QueryNode]) -> QueryNode:
    """Or over ``nodes``; a single node is returned as is."""
    nodes = tuple(nodes)
    if not nodes:
        raise InvalidInput("any_of needs at least one node")
    return nodes[0] if len(nodes) == 1 else Or(*nodes)


def normalize(q: QueryNode) -> QueryNode:
    """Flatten nested same-operator nodes, drop duplicate siblings, collapse singletons.

    No distributivity or De Morgan rewriting is done, so the result stays close
    to what a person wrote. Retrieval semantics are preserved.
    """
    if isinstance(q, Term):
        return q
    if isinstance(q, Not):
        return Not(normalize(q.positive), normalize(q.negative))
    kind = type(q)
    flat: list[QueryNode] = []
    seen: set[QueryNode] = set()
    for child in q.children:
        child = normalize(child)
        parts = child.children if type(child) is kind else (child,)
        for part in parts:
            if part not in seen:
                seen.add(part)
                flat.append(part)
    return flat[0] if len(flat) == 1 else kind(*flat)


def equivalent(a: QueryNode, b: QueryNode) -> bool:
    """True when both queries normalize to the same tree."""
    return normalize(a) == normalize(b)


def iter_terms(q: QueryNode) -> Iterable[Term]:
    """Yield every Term leaf, left to right."""
    stack = [q]
    while stack:
        node = stack.pop()
        if isinstance(node, Term):
            yield node
        elif isinstance(node, Not):
            stack.append(node.negative)
            stack.append(node.positive)
        else:
            stack.extend(reversed(node.children))


def depth(q: QueryNode) -> int:
    if isinstance(q, Term):
        return 1
    if isinstance(q, Not):
        return 1 + max(depth(q.positive), depth(q.negative))
    return 1 + max(depth(c) for c in q.children)


def to_dict(q: QueryNode) -> dict[str, Any]:
    """JSON-ready form of a query tree."""
    if isinstance(q, Term):
        return {"op": "term", "phrase": q.phrase, "tag": q.tag.value}
    if isinstance(q, Not):
        return {"op": "not", "positive": to_dict(q.positive), "negative": to_dict(q.negative)}
    op = "and" if isinstance(q, And) else "or"
    return {"op": op, "children": [to_dict(c) for c in q.children]}


def from_dict(data: dict[str, Any]) -> QueryNode:
    try:
        op = data["op"]
        if op == "term":
            return Term(data["phrase"], FieldTag(data.get("tag", DEFAULT_TAG.value)))
        if op == "not":
            return Not(from_dict(data["positive"]), from_dict(data["negative"]))
        if op in ("and", "or"):
            children = [from_dict(c) for c in data["children"]]
            return And(*children) if op == "and" else Or(*children)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidInput):
            raise
        raise InvalidInput(f"malformed query node: {data!r}") from exc
    raise InvalidInput(f"unknown query op {data.get('op')!r}")

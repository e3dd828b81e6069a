"""PubMed query text rendering.

Every And/Or/Not node is wrapped in parentheses, the root included; a phrase
is double-quoted when it contains whitespace or a character the parser treats
as punctuation.
"""

from __future__ import annotations

import re

from strategist.query.ast import And, Not, QueryNode, Term

_NEEDS_QUOTES = re.compile(r"[\s()\[\]]")


def format_term(t: Term) -> str:
    phrase = f'"{t.phrase}"' if _NEEDS_QUOTES.search(t.phrase) else t.phrase
    return phrase + t.tag.token


def serialize_pubmed(q: QueryNode) -> str:
    if isinstance(q, Term):
        return format_term(q)
    if isinstance(q, Not):
        return f"({serialize_pubmed(q.positive)} NOT {serialize_pubmed(q.negative)})"
    joiner = " AND " if isinstance(q, And) else " OR "
    return "(" + joiner.join(serialize_pubmed(c) for c in q.children) + ")"


def pretty(q: QueryNode, indent: str = "  ") -> str:
    """Indented outline of the tree, one node per line."""
    lines: list[str] = []

    def walk(node: QueryNode, level: int) -> None:
        pad = indent * level
        if isinstance(node, Term):
            lines.append(pad + format_term(node))
        elif isinstance(node, Not):
            lines.append(pad + "NOT")
            walk(node.positive, level + 1)
            lines.append(pad + indent + "--")
            walk(node.negative, level + 1)
        else:
            lines.append(pad + ("AND" if isinstance(node, And) else "OR"))
            for child in node.children:
                walk(child, level + 1)

    walk(q, 0)
    return "\n".join(lines)


"""Recursive-descent parser for PubMed Boolean query text.

Grammar, lowest precedence first, all operators left-associative::

    query := or
    or    := and ("OR" and)*
    and   := not ("AND" not)*
    not   := atom ("NOT" atom)*
    atom  := "(" query ")" | term
    term  := (bareword | '"' chars '"') tag

Operators must be upper case. The parse tree is normalized before it is
returned, so ``parse_pubmed(serialize_pubmed(q)) == normalize(q)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from strategist.errors import InvalidInput, ParseError
from strategist.query.ast import And, FieldTag, Not, Or, QueryNode, Term, normalize

LPAREN, RPAREN, AND, OR, NOT, TERM, EOF = "(", ")", "AND", "OR", "NOT", "term", "end of input"
_OPERATORS = {"AND": AND, "OR": OR, "NOT": NOT}
_BAREWORD = re.compile(r'[^\s()\[\]"]+')
_TAG = re.compile(r"\[([^\]\[]*)\]")
_SPACE = re.compile(r"\s+")


@dataclass(frozen=True)
class Token:
    kind: str
    pos: int
    value: object = None


class _Lexer:
    def __init__(self, text: str, default_tag: FieldTag | None) -> None:
        self.text = text
        self.default_tag = default_tag

    def error(self, message: str, pos: int, expected: set[str]) -> ParseError:
        return ParseError(message, byte_offset(self.text, pos), expected)

    def tokens(self) -> list[Token]:
        text, pos, out = self.text, 0, []
        while True:
            m = _SPACE.match(text, pos)
            if m:
                pos = m.end()
            if pos >= len(text):
                out.append(Token(EOF, pos))
                return out
            ch = text[pos]
            if ch in "()":
                out.append(Token(ch, pos))
                pos += 1
            elif ch == '"':
                end = text.find('"', pos + 1)
                if end < 0:
                    raise self.error("unterminated quoted phrase", pos, {'"'})
                phrase = text[pos + 1 : end]
                tok, pos = self._tagged(phrase, pos, end + 1)
                out.append(tok)
            elif ch == "[":
                raise self.error("field tag without a phrase", pos, {TERM, LPAREN})
            else:
                m = _BAREWORD.match(text, pos)
                word = m.group()
                after = m.end()
                if word in _OPERATORS and not text.startswith("[", after):
                    out.append(Token(_OPERATORS[word], pos))
                    pos = after
                else:
                    tok, pos = self._tagged(word, pos, after)
                    out.append(tok)

    def _tagged(self, phrase: str, start: int, after: int) -> tuple[Token, int]:
        m = _TAG.match(self.text, after)
        if m is None:
            if self.default_tag is None:
                raise self.error(f"phrase {phrase!r} has no field tag", after, {"[tag]"})
            tag, end = self.default_tag, after
        else:
            try:
                tag = FieldTag.parse(m.group(1))
            except InvalidInput:
                raise self.error(f"unknown field tag [{m.group(1)}]", after, {"[tiab]", "[mh]", "[all]", "[tw]"}) from None
            end = m.end()
        if not phrase.strip():
            raise self.error("empty phrase", start, {TERM})
        return Token(TERM, start, Term(phrase, tag)), end


class _Parser:
    def __init__(self, text: str, tokens: list[Token]) -> None:
        self.text = text
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, expected: set[str]) -> ParseError:
        return ParseError(message, byte_offset(self.text, self.tok.pos), expected)

    def parse(self) -> QueryNode:
        node = self.parse_or()
        if self.tok.kind != EOF:
            raise self.error(f"unexpected {self.tok.kind!r}", {AND, OR, NOT, EOF})
        return node

    def parse_or(self) -> QueryNode:
        parts = [self.parse_and()]
        while self.tok.kind == OR:
            self.i += 1
            parts.append(self.parse_and())
        return parts[0] if len(parts) == 1 else Or(*parts)

    def parse_and(self) -> QueryNode:
        parts = [self.parse_not()]
        while self.tok.kind == AND:
            self.i += 1
            parts.append(self.parse_not())
        return parts[0] if len(parts) == 1 else And(*parts)

    def parse_not(self) -> QueryNode:
        node = self.parse_atom()
        while self.tok.kind == NOT:
            self.i += 1
            node = Not(node, self.parse_atom())
        return node

    def parse_atom(self) -> QueryNode:
        tok = self.tok
        if tok.kind == TERM:
            self.i += 1
            return tok.value
        if tok.kind == LPAREN:
            self.i += 1
            node = self.parse_or()
            if self.tok.kind != RPAREN:
                raise self.error(f"unexpected {self.tok.kind!r}", {RPAREN, AND, OR, NOT})
            self.i += 1
            return node
        raise self.error(f"unexpected {tok.kind!r}", {TERM, LPAREN})


def byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def parse_pubmed(text: str, default_tag: FieldTag | None = None) -> QueryNode:
    """Parse PubMed query text into a normalized tree.

    Untagged phrases are rejected unless ``default_tag`` is given.
    """
    tokens = _Lexer(text, default_tag).tokens()
    return normalize(_Parser(text, tokens).parse())

"""Stage outputs of the strategy chain and the reply schemas that produce them.

The models double as structured-output schemas: each stage's reply is
validated with one of the ``*Reply`` models (registered with the gateway by
name), then turned into the domain value the next stage consumes.
"""

from __future__ import annotations

import enum
import json
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_serializer, field_validator, model_validator

from strategist.llm.gateway import register_schema
from strategist.query import QueryNode, from_dict, serialize_pubmed, to_dict
from strategist.query.ast import And, Not, Or, Term, iter_terms
from strategist.query.build import dedupe_phrases
from strategist.retrieval.index import tokenize

OBJECTIVE_MAX_CHARS = 600
MAX_KEYWORDS = 25


class Role(str, enum.Enum):
    POPULATION = "Population"
    INTERVENTION = "Intervention"
    COMPARISON = "Comparison"
    OUTCOME = "Outcome"

    @classmethod
    def parse(cls, value: str) -> Role:
        key = value.strip().lower()
        for role in cls:
            if role.value.lower() == key or role.value[0].lower() == key:
                return role
        raise ValueError(f"unknown PICO role {value!r}")


DEFAULT_INCLUDE_ROLES = frozenset({Role.POPULATION, Role.INTERVENTION})


def clean_phrase(text: str) -> str:
    """Strip quotes, truncation stars and surrounding whitespace from a phrase."""
    return " ".join(text.replace('"', " ").replace("*", " ").split())


def _phrase_list(value: Any) -> list[str]:
    if value is None:
        return []
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, (list, tuple)):
        raise ValueError("expected a list of phrases")
    return dedupe_phrases(clean_phrase(str(v)) for v in value)


def same_phrase(a: str, b: str) -> bool:
    """Case, hyphenation and punctuation-insensitive phrase equality."""
    return tokenize(a) == tokenize(b)


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class Objective(_Frozen):
    text: str = Field(min_length=1, max_length=OBJECTIVE_MAX_CHARS)

    @field_validator("text", mode="before")
    @classmethod
    def _strip(cls, v: Any) -> Any:
        return " ".join(v.split()) if isinstance(v, str) else v


class PicoElements(_Frozen):
    population: list[str] = Field(min_length=1)
    intervention: list[str] = Field(min_length=1)
    comparison: list[str] = Field(default_factory=list)
    outcome: list[str] = Field(default_factory=list)

    @field_validator("population", "intervention", "comparison", "outcome", mode="before")
    @classmethod
    def _clean(cls, v: Any) -> list[str]:
        return _phrase_list(v)

    def phrases(self, role: Role) -> list[str]:
        return getattr(self, role.value.lower())

    def roles_present(self) -> list[Role]:
        return [r for r in Role if self.phrases(r)]

    def summary(self) -> str:
        lines = []
        for role in Role:
            items = self.phrases(role)
            lines.append(f"{role.value}: {'; '.join(items) if items else '(none)'}")
        return "\n".join(lines)


class Concept(_Frozen):
    label: str = Field(min_length=1)
    source_role: Role
    include_in_query: bool = False

    @field_validator("label", mode="before")
    @classmethod
    def _clean_label(cls, v: Any) -> Any:
        return clean_phrase(v) if isinstance(v, str) else v


class KeywordSet(_Frozen):
    concept_label: str = Field(min_length=1)
    keywords: list[str] = Field(min_length=1)

    @field_validator("keywords", mode="before")
    @classmethod
    def _clean(cls, v: Any) -> list[str]:
        return _phrase_list(v)

    @model_validator(mode="after")
    def _has_label(self) -> KeywordSet:
        if not any(same_phrase(k, self.concept_label) for k in self.keywords):
            raise ValueError(f"keywords for {self.concept_label!r} do not include the concept label")
        return self


class _Reply(BaseModel):
    model_config = ConfigDict(frozen=True, extra="ignore")


class ObjectiveReply(_Reply):
    objective: str = Field(min_length=1, max_length=OBJECTIVE_MAX_CHARS)

    @field_validator("objective", mode="before")
    @classmethod
    def _strip(cls, v: Any) -> Any:
        return " ".join(v.split()) if isinstance(v, str) else v


class PicoReply(PicoElements):
    model_config = ConfigDict(frozen=True, extra="ignore")


class ConceptDraft(_Reply):
    label: str = Field(min_length=1)
    source_role: Role

    @field_validator("label", mode="before")
    @classmethod
    def _clean_label(cls, v: Any) -> Any:
        return clean_phrase(v) if isinstance(v, str) else v

    @field_validator("source_role", mode="before")
    @classmethod
    def _role(cls, v: Any) -> Any:
        return Role.parse(v) if isinstance(v, str) else v


class ConceptsReply(_Reply):
    """Concept list; the validation context carries ``roles`` (present in the
    PICO input) and ``include_roles`` (roles that go into the query)."""

    concepts: list[ConceptDraft] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_roles(self, info: ValidationInfo) -> ConceptsReply:
        ctx = info.context or {}
        roles = set(ctx.get("roles", Role))
        include = set(ctx.get("include_roles", DEFAULT_INCLUDE_ROLES))
        stray = sorted({c.source_role.value for c in self.concepts if c.source_role not in roles})
        if stray:
            raise ValueError(f"concepts use roles absent from the PICO input: {', '.join(stray)}")
        covered = {c.source_role for c in self.concepts}
        missing = sorted(r.value for r in (include & roles) - covered)
        if missing:
            raise ValueError(f"no concept derived from: {', '.join(missing)}")
        included = [c for c in dedupe_concepts(self.concepts) if c.source_role in include]
        if len(included) < 2:
            raise ValueError(
                "at least 2 distinct concepts are needed from roles "
                + ", ".join(sorted(r.value for r in include))
            )
        return self


def dedupe_concepts(drafts: list[ConceptDraft]) -> list[ConceptDraft]:
    seen: set[str] = set()
    out = []
    for d in drafts:
        key = d.label.casefold()
        if key not in seen:
            seen.add(key)
            out.append(d)
    return out


class KeywordsReply(_Reply):
    keywords: list[str] = Field(min_length=1)

    @field_validator("keywords", mode="before")
    @classmethod
    def _clean(cls, v: Any) -> list[str]:
        return _phrase_list(v)


class ReviewedConcept(_Reply):
    label: str
    keywords: list[str]


class QueryReviewReply(_Reply):
    concepts: list[ReviewedConcept]


for _name, _model in (
    ("objective", ObjectiveReply),
    ("pico", PicoReply),
    ("concepts", ConceptsReply),
    ("keywords", KeywordsReply),
    ("query_review", QueryReviewReply),
):
    register_schema(_name, _model)


def concept_blocks(query: QueryNode) -> list[QueryNode]:
    """Top-level conjuncts of a strategy query (the query itself if not an And)."""
    return list(query.children) if isinstance(query, And) else [query]


class StrategyArtifact(_Frozen):
    review_id: str | None = None
    entry: str
    objective: Objective
    pico: PicoElements
    concepts: list[Concept]
    keywords: list[KeywordSet]
    query: Any
    serialized_query: str
    provenance: dict[str, str]

    @field_validator("query", mode="before")
    @classmethod
    def _query(cls, v: Any) -> Any:
        if isinstance(v, dict):
            return from_dict(v)
        if not isinstance(v, (Term, And, Or, Not)):
            raise ValueError("query must be a query tree")
        return v

    @field_serializer("query")
    def _dump_query(self, q: QueryNode) -> dict:
        return to_dict(q)

    @model_validator(mode="after")
    def _consistent(self) -> StrategyArtifact:
        if self.serialized_query != serialize_pubmed(self.query):
            raise ValueError("serialized_query does not match query")
        labels = {ks.concept_label.casefold() for ks in self.keywords}
        for c in self.concepts:
            if c.include_in_query and c.label.casefold() not in labels:
                raise ValueError(f"included concept {c.label!r} has no keyword set")
        keyword_sets = [{k.casefold() for k in ks.keywords} for ks in self.keywords]
        for block in concept_blocks(self.query):
            phrases = {t.phrase.casefold() for t in iter_terms(block)}
            if phrases not in keyword_sets:
                raise ValueError(f"query block {serialize_pubmed(block)} matches no keyword set")
        return self

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), ensure_ascii=False, indent=2) + "\n"

"""Assemble query trees from keyword lists and per-study term sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from strategist.errors import InvalidInput
from strategist.query.ast import DEFAULT_TAG, And, FieldTag, QueryNode, Term, all_of, any_of

MAX_TERMS_PER_STUDY = 10


def dedupe_phrases(phrases: Iterable[str]) -> list[str]:
    """Strip phrases and drop case-insensitive repeats; first spelling wins."""
    seen: set[str] = set()
    out: list[str] = []
    for phrase in phrases:
        phrase = phrase.strip()
        key = phrase.casefold()
        if phrase and key not in seen:
            seen.add(key)
            out.append(phrase)
    return out


def build_concept_block(keywords: Iterable[str], tag: FieldTag = DEFAULT_TAG) -> QueryNode:
    """OR together one concept's keywords.

    ``keywords`` may be a plain iterable of phrases or anything with a
    ``keywords`` attribute (a pipeline KeywordSet).
    """
    phrases = dedupe_phrases(getattr(keywords, "keywords", keywords))
    if not phrases:
        raise InvalidInput("a concept block needs at least one keyword")
    return any_of(Term(p, tag) for p in phrases)


def combine_concepts(blocks: Sequence[QueryNode]) -> QueryNode:
    """AND the concept blocks together, in order."""
    if not blocks:
        raise InvalidInput("at least one concept block is required")
    return all_of(blocks)


@dataclass(frozen=True)
class LeadsTermSets:
    """Per-study population and intervention term lists.

    ``studies[n]`` is ``(population_terms, intervention_terms)`` for the n-th
    seed study; each list holds between 1 and 10 phrases.
    """

    studies: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]

    def __init__(self, studies: Iterable[tuple[Iterable[str], Iterable[str]]]) -> None:
        frozen = tuple((tuple(p), tuple(i)) for p, i in studies)
        if not frozen:
            raise InvalidInput("at least one study is required")
        for n, (pop, inter) in enumerate(frozen):
            for name, terms in (("population", pop), ("intervention", inter)):
                if not terms:
                    raise InvalidInput(f"study {n} has no {name} terms")
                if len(terms) > MAX_TERMS_PER_STUDY:
                    raise InvalidInput(
                        f"study {n} has {len(terms)} {name} terms, at most {MAX_TERMS_PER_STUDY} allowed"
                    )
        object.__setattr__(self, "studies", frozen)


def leads_synthesize(sets: LeadsTermSets, tag: FieldTag = DEFAULT_TAG) -> QueryNode:
    """Baseline synthetic query: (OR over studies of AND over population terms)
    AND (OR over studies of AND over intervention terms)."""
    population = any_of(all_of(Term(p, tag) for p in pop) for pop, _ in sets.studies)
    intervention = any_of(all_of(Term(i, tag) for i in inter) for _, inter in sets.studies)
    return And(population, intervention)

"""The chained stages that turn a review's title and abstract into a query.

Stages run strictly in order, each one a separate LLM exchange:

0. ``objective``  restate a structured objective from title + abstract
1. ``pico``       decompose the objective into PICO elements
2. ``concepts``   refine PICO elements into search concepts
3. ``keywords``   expand each included concept into keyword variants
4. ``query``      OR keywords within a concept, AND across concepts

Step 4 is deterministic. An optional review exchange may reorder or drop
keywords before assembly but can never introduce a new term.

A run may start at Step 1 (caller-supplied objective) or Step 2
(caller-supplied PICO elements).
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Iterable

from strategist.errors import InvalidInput, StrategistError
from strategist.llm.gateway import Gateway, MissingFixture, PromptExchange, ProviderHttpError, SchemaInvalid
from strategist.pipeline.models import (
    DEFAULT_INCLUDE_ROLES,
    MAX_KEYWORDS,
    OBJECTIVE_MAX_CHARS,
    Concept,
    ConceptsReply,
    KeywordSet,
    Objective,
    PicoElements,
    Role,
    StrategyArtifact,
    dedupe_concepts,
    same_phrase,
)
from strategist.pipeline.prompts import PromptTemplate, load_templates
from strategist.query import DEFAULT_TAG, FieldTag, build_concept_block, combine_concepts, serialize_pubmed

logger = logging.getLogger(__name__)

ENTRIES = ("full", "objective", "pico_start")
EXTERNAL_PICO = "external-pico"
EXTERNAL_OBJECTIVE = "external-objective"


class StageFailure(StrategistError):
    """A stage could not produce a valid output.

    ``partial`` holds what the earlier stages produced, in artifact JSON form.
    """

    def __init__(self, stage: str, cause: Exception, partial: dict[str, Any]) -> None:
        self.stage = stage
        self.cause = cause
        self.partial = partial
        super().__init__(f"stage {stage!r} failed: {cause}")


class StrategyChain:
    def __init__(
        self,
        gateway: Gateway,
        *,
        tag: FieldTag = DEFAULT_TAG,
        include_roles: Iterable[Role] = DEFAULT_INCLUDE_ROLES,
        review_pass: bool = False,
        templates: dict[str, PromptTemplate] | None = None,
    ) -> None:
        self.gateway = gateway
        self.tag = tag
        self.include_roles = frozenset(include_roles)
        if not self.include_roles:
            raise InvalidInput("at least one PICO role must be included in the query")
        self.review_pass = review_pass
        self.templates = templates or load_templates()

    def _ask(self, stage: str, context: dict[str, Any] | None = None, **values: str):
        system, user = self.templates[stage].render(**values)
        return self.gateway.complete_structured(PromptExchange(system, user, stage, context=context))

    # Step 0
    def _objective(self, title: str, abstract: str) -> tuple[Objective, str]:
        if not title.strip():
            raise InvalidInput("a review title is required")
        reply = self._ask("objective", title=title.strip(), abstract=abstract.strip() or "(no abstract available)")
        return Objective(text=reply.parsed.objective), reply.digest

    def reformulate_objective(self, title: str, abstract: str) -> Objective:
        return self._objective(title, abstract)[0]

    # Step 1
    def _pico(self, objective: Objective) -> tuple[PicoElements, str]:
        reply = self._ask("pico", objective=objective.text)
        return PicoElements.model_validate(reply.parsed.model_dump()), reply.digest

    def extract_pico(self, objective: Objective) -> PicoElements:
        return self._pico(objective)[0]

    # Step 2
    def _concepts(self, pico: PicoElements) -> tuple[list[Concept], str]:
        roles = pico.roles_present()
        required = [r for r in Role if r in self.include_roles and r in roles]
        context = {"roles": roles, "include_roles": self.include_roles}
        reply = self._ask(
            "concepts",
            context=context,
            pico=pico.summary(),
            required_roles=", ".join(r.value for r in required),
        )
        parsed: ConceptsReply = reply.parsed
        concepts = [
            Concept(label=d.label, source_role=d.source_role, include_in_query=d.source_role in self.include_roles)
            for d in dedupe_concepts(parsed.concepts)
        ]
        return concepts, reply.digest

    def identify_concepts(self, pico: PicoElements) -> list[Concept]:
        return self._concepts(pico)[0]

    # Step 3
    def _keywords(self, concept: Concept, pico: PicoElements | None = None) -> tuple[KeywordSet, str]:
        reply = self._ask(
            "keywords",
            pico=pico.summary() if pico is not None else "(not given)",
            label=concept.label,
            role=concept.source_role.value,
        )
        return make_keyword_set(concept.label, reply.parsed.keywords), reply.digest

    def expand_keywords(self, concept: Concept, pico: PicoElements | None = None) -> KeywordSet:
        return self._keywords(concept, pico)[0]

    def _review(self, objective: Objective, keyword_sets: list[KeywordSet]) -> tuple[list[KeywordSet], str]:
        blocks = "\n".join(json.dumps({"label": ks.concept_label, "keywords": ks.keywords}) for ks in keyword_sets)
        reply = self._ask("query_review", objective=objective.text, blocks=blocks)
        return apply_review(keyword_sets, reply.parsed.concepts), reply.digest

    # Step 4
    def construct_strategy(
        self,
        objective: Objective,
        pico: PicoElements,
        concepts: list[Concept],
        keyword_sets: list[KeywordSet],
        *,
        provenance: dict[str, str] | None = None,
        review_id: str | None = None,
        entry: str = "full",
    ) -> StrategyArtifact:
        return construct_strategy(
            objective, pico, concepts, keyword_sets,
            tag=self.tag, provenance=provenance, review_id=review_id, entry=entry,
        )

    def run_chain(
        self,
        title: str = "",
        abstract: str = "",
        *,
        objective: str | Objective | None = None,
        pico: PicoElements | None = None,
        review_id: str | None = None,
    ) -> StrategyArtifact:
        """Run every stage from the entry point implied by the arguments.

        Given ``pico``, Steps 0-1 are skipped; given ``objective``, Step 0 is.
        Raises :class:`StageFailure` naming the first stage that failed.
        """
        partial: dict[str, Any] = {"review_id": review_id}
        provenance: dict[str, str] = {}
        partial["provenance"] = provenance
        stage = "objective"
        try:
            if pico is not None:
                entry = "pico_start"
                obj = Objective(text=_fallback_objective(title, pico))
                provenance["objective"] = provenance["pico"] = EXTERNAL_PICO
            elif objective is not None:
                entry = "objective"
                obj = objective if isinstance(objective, Objective) else Objective(text=objective)
                provenance["objective"] = EXTERNAL_OBJECTIVE
            else:
                entry = "full"
                obj, provenance["objective"] = self._objective(title, abstract)
            partial.update(entry=entry, objective=obj.model_dump(mode="json"))

            if pico is None:
                stage = "pico"
                pico, provenance["pico"] = self._pico(obj)
            partial["pico"] = pico.model_dump(mode="json")

            stage = "concepts"
            concepts, provenance["concepts"] = self._concepts(pico)
            partial["concepts"] = [c.model_dump(mode="json") for c in concepts]

            stage = "keywords"
            keyword_sets = []
            for concept in concepts:
                if not concept.include_in_query:
                    continue
                ks, provenance[f"keywords:{concept.label}"] = self._keywords(concept, pico)
                keyword_sets.append(ks)
            partial["keywords"] = [ks.model_dump(mode="json") for ks in keyword_sets]

            if self.review_pass:
                stage = "review"
                keyword_sets, provenance["query_review"] = self._review(obj, keyword_sets)
                partial["keywords"] = [ks.model_dump(mode="json") for ks in keyword_sets]

            stage = "query"
            return self.construct_strategy(
                obj, pico, concepts, keyword_sets, provenance=provenance, review_id=review_id, entry=entry
            )
        except (SchemaInvalid, MissingFixture, ProviderHttpError, InvalidInput, ValueError) as exc:
            partial["failed_stage"] = stage
            partial["error"] = str(exc)
            raise StageFailure(stage, exc, partial) from exc


def _fallback_objective(title: str, pico: PicoElements) -> str:
    text = title.strip() or "; ".join(
        f"{r.value}: {', '.join(pico.phrases(r))}" for r in pico.roles_present()
    )
    return text[:OBJECTIVE_MAX_CHARS]


def make_keyword_set(label: str, keywords: Iterable[str]) -> KeywordSet:
    """Keyword set for ``label``: label first if missing, deduplicated, capped at 25."""
    keywords = list(keywords)
    if not any(same_phrase(k, label) for k in keywords):
        keywords.insert(0, label)
    ks = KeywordSet(concept_label=label, keywords=keywords)
    if len(ks.keywords) > MAX_KEYWORDS:
        ks = KeywordSet(concept_label=label, keywords=ks.keywords[:MAX_KEYWORDS])
    return ks


def apply_review(keyword_sets: list[KeywordSet], reviewed: list[Any]) -> list[KeywordSet]:
    """Apply a review reply: keep only listed keywords that already existed, in the
    reviewed order. Concepts the reply omits or empties stay unchanged."""
    by_label = {r.label.casefold(): r.keywords for r in reviewed}
    out = []
    for ks in keyword_sets:
        proposal = by_label.get(ks.concept_label.casefold())
        if proposal is None:
            out.append(ks)
            continue
        original = {k.casefold(): k for k in ks.keywords}
        kept = [original[k.strip().casefold()] for k in proposal if k.strip().casefold() in original]
        kept = list(dict.fromkeys(kept))
        if not kept:
            out.append(ks)
            continue
        # the label must survive so the set stays valid
        if not any(same_phrase(k, ks.concept_label) for k in kept):
            kept.insert(0, next(k for k in ks.keywords if same_phrase(k, ks.concept_label)))
        out.append(KeywordSet(concept_label=ks.concept_label, keywords=kept))
    return out


def construct_strategy(
    objective: Objective,
    pico: PicoElements,
    concepts: list[Concept],
    keyword_sets: list[KeywordSet],
    *,
    tag: FieldTag = DEFAULT_TAG,
    provenance: dict[str, str] | None = None,
    review_id: str | None = None,
    entry: str = "full",
) -> StrategyArtifact:
    """Deterministic Step 4: one OR block per included concept, ANDed in concept order."""
    included = [c for c in concepts if c.include_in_query]
    if not included:
        raise InvalidInput("no concept is marked for inclusion in the query")
    by_label = {ks.concept_label.casefold(): ks for ks in keyword_sets}
    blocks = []
    used = []
    for concept in included:
        ks = by_label.get(concept.label.casefold())
        if ks is None:
            raise InvalidInput(f"concept {concept.label!r} has no keyword set")
        blocks.append(build_concept_block(ks, tag))
        used.append(ks)
    query = combine_concepts(blocks)
    return StrategyArtifact(
        review_id=review_id,
        entry=entry,
        objective=objective,
        pico=pico,
        concepts=concepts,
        keywords=used,
        query=query,
        serialized_query=serialize_pubmed(query),
        provenance=dict(provenance or {}),
    )


def write_artifact(artifact: StrategyArtifact | dict[str, Any], run_dir: str | Path, review_id: str) -> Path:
    """Persist an artifact (or a partial one from :class:`StageFailure`) as ``<review_id>.json``."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    if isinstance(artifact, StrategyArtifact):
        text = artifact.to_json()
    else:
        text = json.dumps(artifact, ensure_ascii=False, indent=2) + "\n"
    path = run_dir / f"{_safe_name(review_id)}.json"
    path.write_text(text, encoding="utf-8")
    return path


def load_artifact(path: str | Path) -> StrategyArtifact:
    return StrategyArtifact.model_validate_json(Path(path).read_text(encoding="utf-8"))


def _safe_name(review_id: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in review_id) or "review"

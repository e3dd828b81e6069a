"""Benchmark runner: strategy per review, retrieval, recall, aggregate report."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Protocol, Sequence

from strategist.errors import InvalidInput
from strategist.evaluation.filters import MAX_CITATIONS, YEAR_WINDOW, filter_reviews
from strategist.evaluation.metrics import BenchmarkReport, EvalResult, Status, build_report
from strategist.evaluation.records import ReviewRecord
from strategist.pipeline.chain import StageFailure, StrategyChain, write_artifact
from strategist.pipeline.models import StrategyArtifact
from strategist.query import QueryNode, serialize_pubmed
from strategist.retrieval.index import CorpusIndex, eval_query
from strategist.retrieval.pubmed import MAX_RETMAX, ApiError, PubMedClient, SearchOutcome

logger = logging.getLogger(__name__)

ENTRY_LABELS = {
    "full": "chain (full pipeline)",
    "objective": "chain (supplied objective)",
    "pico_start": "chain (external PICO start)",
}


class Engine(Protocol):
    def search(self, query: QueryNode, record: ReviewRecord) -> SearchOutcome: ...


class OfflineEngine:
    """Evaluate against a local index; ids sorted, capped at ``retmax`` like ESearch."""

    def __init__(self, index: CorpusIndex, retmax: int = MAX_RETMAX) -> None:
        self.index = index
        self.retmax = retmax

    def search(self, query: QueryNode, record: ReviewRecord) -> SearchOutcome:
        hits = sorted(eval_query(query, self.index))
        return SearchOutcome(ids=tuple(hits[: self.retmax]), total_count=len(hits))


class PubMedEngine:
    def __init__(self, client: PubMedClient, retmax: int = MAX_RETMAX, date_ceiling: bool = True) -> None:
        self.client = client
        self.retmax = retmax
        self.date_ceiling = date_ceiling

    def search(self, query: QueryNode, record: ReviewRecord) -> SearchOutcome:
        ceiling = record.pub_year if self.date_ceiling else None
        return self.client.esearch(serialize_pubmed(query), self.retmax, date_ceiling=ceiling)


@dataclass
class ReviewRun:
    result: EvalResult
    artifact: StrategyArtifact | None = None
    partial: dict[str, Any] | None = None


def strategy_for(record: ReviewRecord, chain: StrategyChain, entry: str, objective: str | None = None) -> StrategyArtifact:
    if entry == "pico_start":
        if record.external_pico is None:
            raise InvalidInput(f"review {record.review_id} has no external_pico for a PICO-start run")
        return chain.run_chain(record.title, record.abstract, pico=record.external_pico, review_id=record.review_id)
    if entry == "objective":
        if objective is None:
            raise InvalidInput("an objective is required for an objective-entry run")
        return chain.run_chain(record.title, record.abstract, objective=objective, review_id=record.review_id)
    if entry == "full":
        return chain.run_chain(record.title, record.abstract, review_id=record.review_id)
    raise InvalidInput(f"unknown entry point {entry!r}")


def evaluate_review(
    record: ReviewRecord,
    chain: StrategyChain,
    engine: Engine,
    entry: str = "full",
    objective: str | None = None,
) -> ReviewRun:
    rid = record.review_id
    try:
        artifact = strategy_for(record, chain, entry, objective)
    except StageFailure as exc:
        logger.warning("review %s: %s", rid, exc)
        return ReviewRun(
            EvalResult(review_id=rid, status=Status.STAGE_FAILED, n_included=len(record.included), reason=str(exc)),
            partial=exc.partial,
        )
    except InvalidInput as exc:
        return ReviewRun(
            EvalResult(review_id=rid, status=Status.STAGE_FAILED, n_included=len(record.included), reason=str(exc))
        )
    try:
        outcome = engine.search(artifact.query, record)
    except ApiError as exc:
        logger.warning("review %s: %s", rid, exc)
        return ReviewRun(
            EvalResult(
                review_id=rid,
                status=Status.API_ERROR,
                n_included=len(record.included),
                serialized_query=artifact.serialized_query,
                reason=str(exc),
            ),
            artifact,
        )
    hits = len(record.included.intersection(outcome.ids))
    result = EvalResult(
        review_id=rid,
        status=Status.TRUNCATED if outcome.truncated else Status.OK,
        recall=hits / len(record.included),
        n_hits=hits,
        n_included=len(record.included),
        total_count=outcome.total_count,
        retrieved=sorted(outcome.ids),
        serialized_query=artifact.serialized_query,
    )
    return ReviewRun(result, artifact)


@dataclass
class BenchmarkRun:
    report: BenchmarkReport
    runs: dict[str, ReviewRun] = field(default_factory=dict)

    @property
    def artifacts(self) -> dict[str, StrategyArtifact]:
        return {rid: r.artifact for rid, r in self.runs.items() if r.artifact is not None}


def run_benchmark(
    records: Sequence[ReviewRecord],
    chain: StrategyChain,
    engine: Engine,
    *,
    entry: str = "full",
    paper_criteria: bool = False,
    year_window: tuple[int, int] = YEAR_WINDOW,
    max_citations: int = MAX_CITATIONS,
    parallelism: int = 1,
    run_dir: str | Path | None = None,
    label: str | None = None,
    objectives: Mapping[str, str] | None = None,
) -> BenchmarkRun:
    """Build, run and score a strategy for every review.

    With ``paper_criteria`` the inclusion rules (publication-year window,
    citation cap, API errors) are applied first and excluded reviews are
    reported but not scored. Per-review failures never abort the run.
    """
    if entry not in ENTRY_LABELS:
        raise InvalidInput(f"unknown entry point {entry!r}")
    lo, hi = year_window
    candidates = [r for r in records if not paper_criteria or lo <= r.pub_year <= hi]

    def one(record: ReviewRecord) -> ReviewRun:
        return evaluate_review(record, chain, engine, entry, (objectives or {}).get(record.review_id))

    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        evaluated = dict(zip((r.review_id for r in candidates), pool.map(one, candidates)))

    reasons: dict[str, str] = {}
    if paper_criteria:

        def probe(record: ReviewRecord) -> int:
            res = evaluated[record.review_id].result
            if res.status is Status.API_ERROR:
                raise ApiError(res.reason or "api error")
            return res.total_count

        _, excluded = filter_reviews(records, probe, year_window=year_window, max_citations=max_citations)
        reasons = {r.review_id: reason for r, reason in excluded}

    runs: dict[str, ReviewRun] = {}
    for record in records:
        rid = record.review_id
        run = evaluated.get(rid)
        if rid in reasons:
            base = run.result if run else None
            excluded_result = EvalResult(
                review_id=rid,
                status=Status.EXCLUDED,
                n_included=len(record.included),
                total_count=base.total_count if base else 0,
                serialized_query=base.serialized_query if base else None,
                reason=reasons[rid],
            )
            run = ReviewRun(excluded_result, run.artifact if run else None, run.partial if run else None)
        runs[rid] = run

    if run_dir is not None:
        for rid, run in runs.items():
            if run.artifact is not None:
                write_artifact(run.artifact, run_dir, rid)
            elif run.partial is not None:
                write_artifact(run.partial, run_dir, rid)

    report = build_report([r.result for r in runs.values()], label or ENTRY_LABELS[entry])
    return BenchmarkRun(report, runs)


def rerun_with_objectives(
    records: Sequence[ReviewRecord],
    corrected: Mapping[str, str],
    chain: StrategyChain,
    engine: Engine,
) -> dict[str, float | None]:
    """Recall per review when the chain starts from a corrected objective."""
    out: dict[str, float | None] = {}
    for record in records:
        text = corrected.get(record.review_id)
        if text is None:
            continue
        run = evaluate_review(record, chain, engine, "objective", text)
        out[record.review_id] = run.result.recall if run.result.scored else None
    return out

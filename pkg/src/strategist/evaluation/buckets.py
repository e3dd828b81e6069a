"""Heuristic triage of low-recall reviews.

Each flagged review gets up to three signals:

terminology mismatch
    none of the strategy's keywords occurs in any included article title.
dataset quality
    the included-study list looks wrong: too short, unresolvable ids, or far
    larger than is typical for the benchmark.
objective formulation
    re-running from a corrected objective recovers recall; full recovery
    (recall 1.0) confirms the diagnosis.
"""

from __future__ import annotations

import statistics
from typing import Any, Mapping, Sequence

from strategist.evaluation.metrics import EvalResult
from strategist.evaluation.records import ReviewRecord
from strategist.pipeline.models import StrategyArtifact
from strategist.query import iter_terms
from strategist.retrieval.index import tokenize

LOW_RECALL = 0.5
MIN_INCLUDED = 2
OUTLIER_FACTOR = 5.0

BUCKETS = ("terminology_mismatch", "dataset_quality", "objective_formulation", "unexplained")


def _contains(haystack: list[str], needle: list[str]) -> bool:
    n = len(needle)
    return n > 0 and any(haystack[i : i + n] == needle for i in range(len(haystack) - n + 1))


def keyword_in_titles(keywords: Sequence[str], titles: Sequence[str]) -> bool:
    tokenized = [tokenize(t) for t in titles]
    return any(_contains(title, tokenize(k)) for k in keywords for title in tokenized)


def error_buckets(
    results: Sequence[EvalResult],
    artifacts: Mapping[str, StrategyArtifact],
    records: Sequence[ReviewRecord] = (),
    *,
    titles: Mapping[str, str] | None = None,
    corrected_recall: Mapping[str, float | None] | None = None,
    threshold: float = LOW_RECALL,
) -> dict[str, Any]:
    """Flag scored reviews with recall below ``threshold`` and attach signals.

    ``titles`` maps article id to title and enables the terminology and
    unresolved-id checks. ``corrected_recall`` holds recall from re-runs with
    corrected objectives (see ``rerun_with_objectives``).
    """
    by_id = {r.review_id: r for r in records}
    sizes = [r.n_included for r in results if r.scored and r.n_included]
    median_size = statistics.median(sizes) if sizes else 0
    cases = []
    buckets: dict[str, list[str]] = {b: [] for b in BUCKETS}

    for res in results:
        if not res.scored or res.recall is None or res.recall >= threshold:
            continue
        rid = res.review_id
        record = by_id.get(rid)
        artifact = artifacts.get(rid)
        case: dict[str, Any] = {"review_id": rid, "recall": res.recall}

        mismatch = None
        if titles is not None and record is not None and artifact is not None:
            included_titles = [titles[i] for i in record.included_pmids if i in titles]
            keywords = [t.phrase for t in iter_terms(artifact.query)]
            mismatch = not keyword_in_titles(keywords, included_titles)
        case["terminology_mismatch"] = mismatch

        quality = []
        if res.n_included < MIN_INCLUDED:
            quality.append("too-few-included")
        if median_size and res.n_included > OUTLIER_FACTOR * median_size:
            quality.append("included-count-outlier")
        if titles is not None and record is not None:
            missing = [i for i in record.included_pmids if i not in titles]
            if missing:
                quality.append("unresolved-included")
                case["unresolved_included"] = missing
        case["dataset_quality"] = quality

        objective = None
        if corrected_recall is not None and rid in corrected_recall:
            rerun = corrected_recall[rid]
            case["corrected_recall"] = rerun
            if rerun is None:
                objective = "rerun-failed"
            elif rerun == 1.0:
                objective = "confirmed"
            elif rerun > res.recall:
                objective = "improved"
            else:
                objective = "not-recovered"
        case["objective_formulation"] = objective

        hit = False
        if mismatch:
            buckets["terminology_mismatch"].append(rid)
            hit = True
        if quality:
            buckets["dataset_quality"].append(rid)
            hit = True
        if objective in ("confirmed", "improved"):
            buckets["objective_formulation"].append(rid)
            hit = True
        if not hit:
            buckets["unexplained"].append(rid)
        cases.append(case)

    return {
        "threshold": threshold,
        "n_flagged": len(cases),
        "buckets": buckets,
        "cases": cases,
    }

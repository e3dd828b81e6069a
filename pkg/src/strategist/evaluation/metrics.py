"""Recall, per-review results, and the aggregate benchmark report."""

from __future__ import annotations

import enum
import json
import math
from typing import Iterable, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from strategist.errors import InvalidInput

FILTER_THRESHOLD = 0.2
HISTOGRAM_BINS = 10


class Status(str, enum.Enum):
    OK = "ok"
    TRUNCATED = "truncated"
    API_ERROR = "api_error"
    EXCLUDED = "excluded"
    STAGE_FAILED = "stage_failed"


SCORED = (Status.OK, Status.TRUNCATED)


def compute_recall(retrieved: Iterable[str], included: Iterable[str]) -> float:
    """Fraction of ``included`` found in ``retrieved``."""
    included = set(included)
    if not included:
        raise InvalidInput("recall needs a non-empty set of included studies")
    return len(included.intersection(retrieved)) / len(included)


class EvalResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    review_id: str
    status: Status
    recall: float | None = None
    n_hits: int = 0
    n_included: int = 0
    total_count: int = 0
    retrieved: list[str] = Field(default_factory=list)
    serialized_query: str | None = None
    reason: str | None = None

    @model_validator(mode="after")
    def _check(self) -> EvalResult:
        if self.status in SCORED:
            if self.recall is None or not 0.0 <= self.recall <= 1.0:
                raise ValueError("scored results need a recall in [0, 1]")
            if self.n_included and self.recall != self.n_hits / self.n_included:
                raise ValueError("recall disagrees with hit counts")
        return self

    @property
    def scored(self) -> bool:
        return self.status in SCORED


def histogram(recalls: Sequence[float], bins: int = HISTOGRAM_BINS) -> list[int]:
    """Counts over equal-width right-closed bins of [0, 1]; 0 falls in the first bin."""
    counts = [0] * bins
    for r in recalls:
        # rounding absorbs float noise such as 0.3 * 10 == 3.0000000000000004
        idx = math.ceil(round(r * bins, 9)) - 1
        counts[min(max(idx, 0), bins - 1)] += 1
    return counts


def _mean(values: Sequence[float]) -> float | None:
    return math.fsum(values) / len(values) if values else None


class BenchmarkReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    results: list[EvalResult]
    n_reviews: int
    n_evaluated: int
    mean_recall: float | None
    mean_recall_above_0_2: float | None
    n_above_0_2: int
    n_perfect: int
    n_zero: int
    n_truncated: int
    histogram: list[int]
    histogram_edges: list[float]
    status_counts: dict[str, int]
    exclusions: dict[str, int]

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), ensure_ascii=False, indent=2) + "\n"


def build_report(
    results: Sequence[EvalResult],
    label: str = "chain",
) -> BenchmarkReport:
    """Aggregate results; only ok/truncated reviews enter the means and histogram."""
    scored = [r.recall for r in results if r.scored]
    above = [r for r in scored if r > FILTER_THRESHOLD]
    statuses = {s.value: 0 for s in Status}
    exclusions: dict[str, int] = {}
    for r in results:
        statuses[r.status.value] += 1
        if r.status is Status.EXCLUDED:
            key = r.reason or "unspecified"
            exclusions[key] = exclusions.get(key, 0) + 1
    return BenchmarkReport(
        label=label,
        results=list(results),
        n_reviews=len(results),
        n_evaluated=len(scored),
        mean_recall=_mean(scored),
        mean_recall_above_0_2=_mean(above),
        n_above_0_2=len(above),
        n_perfect=sum(1 for r in scored if r == 1.0),
        n_zero=sum(1 for r in scored if r == 0.0),
        n_truncated=statuses[Status.TRUNCATED.value],
        histogram=histogram(scored),
        histogram_edges=[i / HISTOGRAM_BINS for i in range(HISTOGRAM_BINS + 1)],
        status_counts=statuses,
        exclusions=dict(sorted(exclusions.items())),
    )


def summary_table(reports: Sequence[BenchmarkReport]) -> str:
    """Plain-text table: approach, mean recall, mean recall over reviews above 0.2."""

    def fmt(v: float | None) -> str:
        return "--" if v is None else f"{v:.2f}"

    header = ("Model / Approach", "Average Recall", "Average Recall (>0.2 only)")
    rows = [(r.label, fmt(r.mean_recall), fmt(r.mean_recall_above_0_2)) for r in reports]
    widths = [max(len(row[i]) for row in [header, *rows]) for i in range(3)]
    line = "-" * (sum(widths) + 6)

    def render(row: tuple[str, str, str]) -> str:
        return f"{row[0]:<{widths[0]}}   {row[1]:>{widths[1]}}   {row[2]:>{widths[2]}}".rstrip()

    out = [line, render(header), line, *(render(r) for r in rows), line]
    for r in reports:
        out.append(
            f"{r.label}: evaluated {r.n_evaluated}/{r.n_reviews}, perfect {r.n_perfect}, "
            f"zero {r.n_zero}, truncated {r.n_truncated}"
        )
        if r.exclusions:
            out.append("  excluded: " + ", ".join(f"{k}={v}" for k, v in r.exclusions.items()))
        out.append("  histogram: " + " ".join(str(c) for c in r.histogram))
    return "\n".join(out) + "\n"

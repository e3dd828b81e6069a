"""Dataset inclusion rules applied before scoring a benchmark."""

from __future__ import annotations

from typing import Callable, Sequence

from strategist.evaluation.records import ReviewRecord
from strategist.retrieval.pubmed import ApiError

YEAR_WINDOW = (2012, 2016)
MAX_CITATIONS = 1000

YEAR_RULE = "year-window"
COUNT_RULE = "over-1000"
API_RULE = "api-error"
RULES = (YEAR_RULE, COUNT_RULE, API_RULE)


def filter_reviews(
    records: Sequence[ReviewRecord],
    probe: Callable[[ReviewRecord], int],
    *,
    year_window: tuple[int, int] = YEAR_WINDOW,
    max_citations: int = MAX_CITATIONS,
) -> tuple[list[ReviewRecord], list[tuple[ReviewRecord, str]]]:
    """Split records into kept and excluded-with-rule.

    ``probe`` returns the citation count of a record's search strategy and may
    raise :class:`ApiError`. It is only called for records inside the year window.
    """
    kept: list[ReviewRecord] = []
    excluded: list[tuple[ReviewRecord, str]] = []
    lo, hi = year_window
    for record in records:
        if not lo <= record.pub_year <= hi:
            excluded.append((record, YEAR_RULE))
            continue
        try:
            count = probe(record)
        except ApiError:
            excluded.append((record, API_RULE))
            continue
        if count > max_citations:
            excluded.append((record, COUNT_RULE))
        else:
            kept.append(record)
    return kept, excluded

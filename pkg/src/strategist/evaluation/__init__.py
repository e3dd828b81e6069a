from strategist.evaluation.bench import (
    ENTRY_LABELS,
    BenchmarkRun,
    Engine,
    OfflineEngine,
    PubMedEngine,
    ReviewRun,
    evaluate_review,
    rerun_with_objectives,
    run_benchmark,
)
from strategist.evaluation.buckets import BUCKETS, error_buckets, keyword_in_titles
from strategist.evaluation.filters import API_RULE, COUNT_RULE, RULES, YEAR_RULE, filter_reviews
from strategist.evaluation.metrics import (
    FILTER_THRESHOLD,
    BenchmarkReport,
    EvalResult,
    Status,
    build_report,
    compute_recall,
    histogram,
    summary_table,
)
from strategist.evaluation.records import ManifestError, ReviewRecord, load_manifest, parse_manifest_lines, write_manifest

__all__ = [
    "API_RULE",
    "BUCKETS",
    "COUNT_RULE",
    "ENTRY_LABELS",
    "FILTER_THRESHOLD",
    "RULES",
    "YEAR_RULE",
    "BenchmarkReport",
    "BenchmarkRun",
    "Engine",
    "EvalResult",
    "ManifestError",
    "OfflineEngine",
    "PubMedEngine",
    "ReviewRecord",
    "ReviewRun",
    "Status",
    "build_report",
    "compute_recall",
    "error_buckets",
    "evaluate_review",
    "filter_reviews",
    "histogram",
    "keyword_in_titles",
    "load_manifest",
    "parse_manifest_lines",
    "rerun_with_objectives",
    "run_benchmark",
    "summary_table",
    "write_manifest",
]

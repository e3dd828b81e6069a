from strategist.pipeline.chain import (
    ENTRIES,
    EXTERNAL_OBJECTIVE,
    EXTERNAL_PICO,
    StageFailure,
    StrategyChain,
    apply_review,
    construct_strategy,
    load_artifact,
    make_keyword_set,
    write_artifact,
)
from strategist.pipeline.models import (
    DEFAULT_INCLUDE_ROLES,
    MAX_KEYWORDS,
    OBJECTIVE_MAX_CHARS,
    Concept,
    KeywordSet,
    Objective,
    PicoElements,
    Role,
    StrategyArtifact,
    concept_blocks,
)
from strategist.pipeline.prompts import PROMPT_VERSION, load_templates

__all__ = [
    "DEFAULT_INCLUDE_ROLES",
    "ENTRIES",
    "EXTERNAL_OBJECTIVE",
    "EXTERNAL_PICO",
    "MAX_KEYWORDS",
    "OBJECTIVE_MAX_CHARS",
    "PROMPT_VERSION",
    "Concept",
    "KeywordSet",
    "Objective",
    "PicoElements",
    "Role",
    "StageFailure",
    "StrategyArtifact",
    "StrategyChain",
    "apply_review",
    "concept_blocks",
    "construct_strategy",
    "load_artifact",
    "load_templates",
    "make_keyword_set",
    "write_artifact",
]

from strategist.query.ast import (
    DEFAULT_TAG,
    And,
    FieldTag,
    Not,
    Or,
    QueryNode,
    Term,
    all_of,
    any_of,
    depth,
    equivalent,
    from_dict,
    iter_terms,
    normalize,
    term,
    to_dict,
)
from strategist.query.build import (
    LeadsTermSets,
    build_concept_block,
    combine_concepts,
    dedupe_phrases,
    leads_synthesize,
)
from strategist.query.parser import parse_pubmed
from strategist.query.serialize import format_term, pretty, serialize_pubmed

__all__ = [
    "DEFAULT_TAG",
    "And",
    "FieldTag",
    "LeadsTermSets",
    "Not",
    "Or",
    "QueryNode",
    "Term",
    "all_of",
    "any_of",
    "build_concept_block",
    "combine_concepts",
    "dedupe_phrases",
    "depth",
    "equivalent",
    "format_term",
    "from_dict",
    "iter_terms",
    "leads_synthesize",
    "normalize",
    "parse_pubmed",
    "pretty",
    "serialize_pubmed",
    "term",
    "to_dict",
]

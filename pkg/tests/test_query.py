from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_eval, leads_oracle, random_ast, random_corpus, random_term_sets
from strategist.errors import InvalidInput
from strategist.query import (
    And,
    FieldTag,
    LeadsTermSets,
    Not,
    Or,
    Term,
    build_concept_block,
    combine_concepts,
    equivalent,
    from_dict,
    leads_synthesize,
    normalize,
    serialize_pubmed,
    to_dict,
)

TIAB = FieldTag.TITLE_ABSTRACT
a, b, c = Term("a"), Term("b"), Term("c")


class TestNodes:
    def test_and_or_need_two_children(self):
        with pytest.raises(InvalidInput):
            And(a)
        with pytest.raises(InvalidInput):
            Or()

    @pytest.mark.parametrize("phrase", ["", "   ", 'say "hi"'])
    def test_bad_phrases(self, phrase):
        with pytest.raises(InvalidInput):
            Term(phrase)

    def test_nodes_are_immutable_and_hashable(self):
        q = And(a, b)
        with pytest.raises(AttributeError):
            q.children = (a,)
        assert hash(q) == hash(And(Term("a"), Term("b")))

    def test_dict_roundtrip(self):
        q = Not(And(Or(a, b), Term("x y", FieldTag.MESH_HEADING)), c)
        assert from_dict(to_dict(q)) == q

    def test_from_dict_rejects_garbage(self):
        with pytest.raises(InvalidInput):
            from_dict({"op": "xor", "children": []})
        with pytest.raises(InvalidInput):
            from_dict({"op": "and", "children": [{"op": "term", "phrase": "a"}]})

    def test_tag_aliases(self):
        assert FieldTag.parse("[Title/Abstract]") is TIAB
        assert FieldTag.parse("MeSH Terms") is FieldTag.MESH_HEADING
        with pytest.raises(InvalidInput):
            FieldTag.parse("[ti]")


class TestConceptBlocks:
    def test_single_keyword_is_a_term(self):
        assert build_concept_block(["metformin"], TIAB) == Term("metformin", TIAB)

    def test_keywords_become_or(self):
        got = build_concept_block(["heart failure", "cardiac failure"], TIAB)
        assert got == Or(Term("heart failure"), Term("cardiac failure"))

    def test_case_insensitive_dedup_keeps_first(self):
        phrases = ["Adult", "adult", "ADULT"]
        # oracle: a lowercase scan keeping first spellings
        seen, expected = set(), []
        for p in phrases:
            if p.lower() not in seen:
                seen.add(p.lower())
                expected.append(p)
        assert expected == ["Adult"]
        assert build_concept_block(phrases) == Term("Adult", TIAB)

    def test_accepts_keyword_set_objects(self):
        class KS:
            keywords = ["x", "y"]

        assert build_concept_block(KS(), FieldTag.TEXT_WORD) == Or(Term("x", FieldTag.TEXT_WORD), Term("y", FieldTag.TEXT_WORD))

    def test_empty(self):
        with pytest.raises(InvalidInput):
            build_concept_block([])
        with pytest.raises(InvalidInput):
            build_concept_block(["  "])


class TestCombine:
    def test_identity(self):
        block = Or(a, b)
        assert combine_concepts([block]) is block

    def test_and_in_order(self):
        b1, b2, b3 = Or(a, b), c, Term("d")
        assert combine_concepts([b1, b2, b3]) == And(b1, b2, b3)

    def test_serialized(self):
        assert serialize_pubmed(combine_concepts([Or(a, b), c])) == "((a[tiab] OR b[tiab]) AND c[tiab])"

    def test_empty(self):
        with pytest.raises(InvalidInput):
            combine_concepts([])


class TestNormalize:
    def test_flatten(self):
        assert normalize(And(And(a, b), c)) == And(a, b, c)

    def test_collapse_after_dedup(self):
        assert normalize(Or(a, a)) == a

    def test_dedup_keeps_order(self):
        assert normalize(Or(a, a, b)) == Or(a, b)

    def test_nested_collapse_then_flatten(self):
        assert normalize(Or(And(a, a), Or(b, c))) == Or(a, b, c)

    def test_not_is_kept(self):
        assert normalize(Not(Or(a, Or(b, c)), a)) == Not(Or(a, b, c), a)

    def test_no_distribution(self):
        q = And(Or(a, b), Or(a, c))
        assert normalize(q) == q

    def test_idempotent(self):
        rng = random.Random(7)
        for _ in range(200):
            q = random_ast(rng)
            assert normalize(normalize(q)) == normalize(q)

    def test_dedup_preserves_semantics_on_random_corpora(self):
        rng = random.Random(11)
        q = Or(Term("heart"), Term("heart"), Term("pain"))
        for _ in range(20):
            docs = random_corpus(rng, 60)
            assert brute_eval(normalize(q), docs) == brute_eval(q, docs)

    def test_equivalent(self):
        assert equivalent(And(And(a, b), c), And(a, And(b, c)))
        assert not equivalent(And(a, b), And(b, a))


class TestLeads:
    def test_single_study(self):
        sets = LeadsTermSets([(["p"], ["i"])])
        assert leads_synthesize(sets) == And(Term("p"), Term("i"))

    def test_two_studies_structure(self):
        sets = LeadsTermSets([(["p11", "p12"], ["i11"]), (["p21"], ["i21", "i22"])])
        p11, p12, p21 = Term("p11"), Term("p12"), Term("p21")
        i11, i21, i22 = Term("i11"), Term("i21"), Term("i22")
        assert leads_synthesize(sets) == And(Or(And(p11, p12), p21), Or(i11, And(i21, i22)))

    def test_tag_is_applied(self):
        q = leads_synthesize(LeadsTermSets([(["p"], ["i"])]), FieldTag.ALL_FIELDS)
        assert serialize_pubmed(q) == "(p[all] AND i[all])"

    @pytest.mark.parametrize(
        "studies",
        [[], [([], ["i"])], [(["p"], [])], [(["p"] * 11, ["i"])]],
    )
    def test_invalid_sets(self, studies):
        with pytest.raises(InvalidInput):
            LeadsTermSets(studies)

    def test_ten_terms_allowed(self):
        LeadsTermSets([(["p"] * 10, ["i"] * 10)])

    def test_matches_set_algebra(self):
        from strategist.retrieval import eval_query, index_corpus

        rng = random.Random(3)
        for _ in range(50):
            studies = random_term_sets(rng)
            docs = random_corpus(rng, 200)
            got = eval_query(leads_synthesize(LeadsTermSets(studies)), index_corpus(docs))
            assert got == leads_oracle(studies, docs)


ast_seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=200, deadline=None)
@given(ast_seeds)
def test_serializer_is_deterministic(seed):
    q1 = random_ast(random.Random(seed), tricky=True)
    q2 = from_dict(to_dict(q1))
    assert q1 is not q2
    assert serialize_pubmed(q1) == serialize_pubmed(q2)

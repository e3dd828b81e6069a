"""Regenerate the synthetic benchmark under tests/data.

Writes ``corpus.jsonl`` (200 docs), ``manifest.jsonl`` (5 reviews), LLM
fixtures under ``fixtures/llm`` and golden query strings under ``golden/``.
Fixtures are produced by running the real chain in record mode against a
scripted provider whose replies are written out below.

    python tests/data/build_synthetic.py
"""

from __future__ import annotations

import json
import random
import shutil
from pathlib import Path

from strategist.evaluation import ReviewRecord, write_manifest
from strategist.llm import FixtureStore, Gateway
from strategist.pipeline import StrategyChain
from strategist.retrieval import DocRecord, write_corpus

HERE = Path(__file__).resolve().parent

REVIEWS = [
    {
        "review_id": "vd-fracture",
        "title": "Vitamin D supplementation for the prevention of fractures in postmenopausal women: a systematic review",
        "abstract": (
            "Background: Fragility fractures are common after menopause. Objectives: To assess whether "
            "vitamin D supplementation, with or without calcium, reduces fracture risk in postmenopausal "
            "women compared with placebo. Methods: We searched for randomised trials. Results: Twelve trials were included."
        ),
        "pub_year": 2014,
        "objective": (
            "To determine whether vitamin D supplementation, alone or combined with calcium, reduces the "
            "risk of fractures in postmenopausal women compared with placebo or no treatment."
        ),
        "pico": {
            "population": ["postmenopausal women"],
            "intervention": ["vitamin D supplementation", "Vitamin D supplementation"],
            "comparison": ["placebo"],
            "outcome": ["fracture risk"],
        },
        "concepts": [
            {"label": "postmenopausal women", "source_role": "Population"},
            {"label": "vitamin D", "source_role": "Intervention"},
            {"label": "fractures", "source_role": "Outcome"},
        ],
        "keywords": {
            "postmenopausal women": ["postmenopausal women", "post-menopausal women", "menopausal women", "older women"],
            "vitamin D": ["vitamin D", "Vitamin D", "vitamin d", "cholecalciferol", "ergocalciferol", "calcifediol"],
        },
        "included": [
            "Cholecalciferol and hip fracture in postmenopausal women: a randomised trial",
            "Annual high-dose vitamin D in older women and falls",
            "Ergocalciferol supplementation in post-menopausal women with osteopenia",
            "Calcifediol versus placebo in menopausal women: bone outcomes",
        ],
    },
    {
        "review_id": "metformin-t2dm",
        "title": "Metformin and cardiovascular outcomes in type 2 diabetes: systematic review",
        "abstract": (
            "We reviewed trials and cohort studies of metformin in adults with type 2 diabetes mellitus "
            "reporting heart failure or cardiovascular mortality."
        ),
        "pub_year": 2013,
        "objective": (
            "To evaluate the effect of metformin on heart failure and cardiovascular mortality in adults "
            "with type 2 diabetes mellitus."
        ),
        "pico": {
            "population": ["adults with type 2 diabetes mellitus"],
            "intervention": ["metformin"],
            "comparison": [],
            "outcome": ["heart failure", "cardiovascular mortality"],
        },
        "concepts": [
            {"label": "type 2 diabetes", "source_role": "Population"},
            {"label": "metformin", "source_role": "Intervention"},
            {"label": "heart failure", "source_role": "Outcome"},
        ],
        "keywords": {
            "type 2 diabetes": ["type 2 diabetes", "type II diabetes", "T2DM", "non-insulin-dependent diabetes"],
            "metformin": ["metformin", "biguanide", "glucophage"],
        },
        "included": [
            "Metformin use and heart failure admissions in type 2 diabetes",
            "Biguanide therapy in T2DM: a cohort study of cardiovascular death",
            "Glucophage and mortality in type II diabetes patients",
            "Dimethylbiguanide and cardiac outcomes in non-insulin-dependent diabetes",
        ],
    },
    {
        "review_id": "backpain-workers",
        "title": "Workplace physical activity programmes for employees with lumbar pain",
        "abstract": "A review of occupational programmes for staff with lumbar pain.",
        "pub_year": 2012,
        "objective": "To assess the effectiveness of exercise therapy for low back pain in working adults.",
        "pico": {
            "population": ["adults with low back pain"],
            "intervention": ["exercise therapy"],
            "comparison": ["usual care"],
            "outcome": ["pain", "sick leave"],
        },
        "concepts": [
            {"label": "adults", "source_role": "Population"},
            {"label": "exercise therapy", "source_role": "Intervention"},
            {"label": "sick leave", "source_role": "Outcome"},
        ],
        "keywords": {
            "adults": ["adults", "adult", "middle-aged"],
            "exercise therapy": ["exercise therapy", "physical exercise", "exercise training", "strength training"],
        },
        "included": [
            "A workplace physical activity programme for employees with lumbar pain",
            "Stretching breaks for office staff reporting lumbar discomfort",
            "Occupational fitness sessions and lumbar pain in warehouse workers",
            "Yoga classes at work for nurses with lumbar pain",
        ],
    },
    {
        "review_id": "probiotics-aad",
        "title": "Probiotics for the prevention of antibiotic-associated diarrhoea in children",
        "abstract": "",
        "pub_year": 2015,
        "objective": (
            "To assess whether probiotics given with antibiotics prevent antibiotic-associated diarrhoea "
            "in children compared with placebo."
        ),
        "pico": {
            "population": ["children receiving antibiotics"],
            "intervention": ["probiotics"],
            "comparison": ["placebo"],
            "outcome": ["antibiotic-associated diarrhoea"],
        },
        "concepts": [
            {"label": "children", "source_role": "Population"},
            {"label": "probiotics", "source_role": "Intervention"},
            {"label": "antibiotic-associated diarrhoea", "source_role": "Outcome"},
        ],
        "keywords": {
            "children": ["children", "child", "paediatric", "pediatric", "infants"],
            "probiotics": ["probiotics", "probiotic", "lactobacillus", "saccharomyces boulardii", "bifidobacterium"],
        },
        "included": [
            "Lactobacillus GG for antibiotic diarrhoea in children: randomised trial",
            "Saccharomyces boulardii in paediatric outpatients on amoxicillin",
            "Probiotic yoghurt and diarrhoea in infants treated with antibiotics",
            "Bifidobacterium supplementation in pediatric respiratory infection",
        ],
    },
    {
        "review_id": "mindfulness-teens",
        "title": "Mindfulness-based programmes for anxiety in adolescents: a systematic review",
        "abstract": "School and clinic based mindfulness programmes for anxious adolescents were reviewed.",
        "pub_year": 2016,
        "objective": "To evaluate mindfulness-based interventions for reducing anxiety symptoms in adolescents.",
        "pico": {
            "population": ["adolescents"],
            "intervention": ["mindfulness-based interventions"],
            "comparison": [],
            "outcome": ["anxiety symptoms"],
        },
        "concepts": [
            {"label": "adolescents", "source_role": "Population"},
            {"label": "mindfulness", "source_role": "Intervention"},
            {"label": "anxiety", "source_role": "Outcome"},
        ],
        "keywords": {
            "adolescents": ["adolescents", "adolescent", "teenagers"],
            "mindfulness": ["mindfulness", "mindfulness-based stress reduction", "meditation"],
        },
        "included": [
            "Mindfulness training for anxious adolescents in secondary school",
            "Contemplative practice for youth with generalised anxiety",
            "A breathing awareness course for high school students",
            "Acceptance-based group therapy for worried teens",
            "Yoga and relaxation for anxiety in young people",
        ],
    },
]

# external PICO: identical to the chain's own for one review, different for another
EXTERNAL_PICO = {
    "vd-fracture": REVIEWS[0]["pico"],
    "metformin-t2dm": {
        "population": ["patients with type 2 diabetes"],
        "intervention": ["metformin therapy"],
        "comparison": ["sulfonylureas"],
        "outcome": ["cardiovascular events"],
    },
}
EXTERNAL_CONCEPTS = {
    "metformin-t2dm": [
        {"label": "type 2 diabetes", "source_role": "Population"},
        {"label": "metformin", "source_role": "Intervention"},
    ],
}

FILLER_TOPICS = [
    "vitamin D status in young men",
    "hip fracture surgery in older adults",
    "postmenopausal women and breast cancer screening",
    "metformin in polycystic ovary syndrome",
    "heart failure readmission after discharge",
    "type 2 diabetes screening in primary care",
    "exercise capacity and heart disease",
    "low back pain imaging in emergency departments",
    "antibiotic prescribing for children with otitis",
    "probiotics in irritable bowel syndrome in adults",
    "anxiety disorders in older adults",
    "meditation and blood pressure in adults",
    "adolescents and social media use",
    "calcium intake and kidney stones",
    "diarrhoea outbreaks in care homes",
    "insulin pump therapy in type 1 diabetes",
    "strength training in older women",
    "school based nutrition education",
    "smoking cessation in pregnancy",
    "sleep quality in shift workers",
]
FILLER_WORDS = (
    "cohort trial outcomes patients risk analysis randomised controlled observational follow "
    "months years baseline effect association measured reported clinical hospital community"
).split()


class ScriptedProvider:
    """Replies from the review tables above, selected by the current review."""

    def __init__(self) -> None:
        self.review: dict | None = None
        self.external = False
        self.fenced = False

    def complete(self, model: str, system_prompt: str, user_prompt: str, temperature: float) -> str:
        r = self.review
        assert r is not None
        if "restate the review's" in system_prompt:
            body = {"objective": r["objective"]}
        elif "decomposes systematic review objectives" in system_prompt:
            body = r["pico"]
        elif "turns PICO elements into the search" in system_prompt:
            concepts = EXTERNAL_CONCEPTS.get(r["review_id"]) if self.external else None
            body = {"concepts": concepts or r["concepts"]}
        elif "expands one search" in system_prompt:
            label = user_prompt.split("Concept: ", 1)[1].splitlines()[0]
            body = {"keywords": r["keywords"][label]}
        else:
            raise AssertionError(f"unexpected prompt: {system_prompt[:60]}")
        text = json.dumps(body, ensure_ascii=False)
        if self.fenced:
            self.fenced = False
            return f"```json\n{text}\n```"
        return text


def build_corpus() -> tuple[list[DocRecord], dict[str, list[str]]]:
    rng = random.Random(20120101)
    ids = [str(21000000 + 37 * i) for i in range(200)]
    rng.shuffle(ids)
    docs: list[DocRecord] = []
    included: dict[str, list[str]] = {}
    pos = 0
    for r in REVIEWS:
        included[r["review_id"]] = []
        for title in r["included"]:
            doc_id = ids[pos]
            pos += 1
            abstract = " ".join(rng.choice(FILLER_WORDS) for _ in range(12))
            year = r["pub_year"] - 1 - rng.randrange(4)
            docs.append(DocRecord(doc_id, title, abstract, year))
            included[r["review_id"]].append(doc_id)
    while pos < len(ids):
        topic = rng.choice(FILLER_TOPICS)
        title = f"{topic.capitalize()}: a {rng.choice(['cohort study', 'randomised trial', 'cross-sectional survey'])}"
        abstract = " ".join(rng.choice(FILLER_WORDS) for _ in range(15))
        docs.append(DocRecord(ids[pos], title, abstract, 2000 + rng.randrange(17)))
        pos += 1
    docs.sort(key=lambda d: d.doc_id)
    return docs, included


def main() -> None:
    docs, included = build_corpus()
    write_corpus(docs, HERE / "corpus.jsonl")
    records = [
        ReviewRecord(
            review_id=r["review_id"],
            title=r["title"],
            abstract=r["abstract"],
            included_pmids=included[r["review_id"]],
            pub_year=r["pub_year"],
            external_pico=EXTERNAL_PICO.get(r["review_id"]),
        )
        for r in REVIEWS
    ]
    write_manifest(records, HERE / "manifest.jsonl")

    fixtures = HERE / "fixtures"
    shutil.rmtree(fixtures, ignore_errors=True)
    provider = ScriptedProvider()
    chain = StrategyChain(Gateway(provider, mode="record", store=FixtureStore(fixtures / "llm")))
    golden = HERE / "golden"
    golden.mkdir(exist_ok=True)
    for r, record in zip(REVIEWS, records):
        provider.review = r
        provider.fenced = r["review_id"] == "metformin-t2dm"
        provider.external = False
        artifact = chain.run_chain(record.title, record.abstract, review_id=record.review_id)
        (golden / f"{record.review_id}.query.txt").write_text(artifact.serialized_query + "\n", encoding="utf-8")
        if record.external_pico is not None:
            provider.external = True
            chain.run_chain(record.title, record.abstract, pico=record.external_pico, review_id=record.review_id)
    # objective from a title alone
    provider.review = REVIEWS[0]
    chain.reformulate_objective(REVIEWS[0]["title"], "")
    (HERE / "objective.txt").write_text(REVIEWS[0]["objective"] + "\n", encoding="utf-8")
    (HERE / "pico.json").write_text(json.dumps(REVIEWS[0]["pico"], indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()

import json

import pytest

from bactrex.classify import BaselineClassifier
from bactrex.corpus import AnnotatedDocument, EntityMention, Relation, Span
from bactrex.ner import Gazetteer, GazetteerTagger
from bactrex.pipeline import (
    ABLATION_ROWS,
    Evidence,
    OracleTagger,
    PipelineComponents,
    PipelineMode,
    PredictedInteraction,
    ablation_report,
    extract,
    gold_pairs,
    oracle_boundaries,
    prediction_record,
    render_ablation_table,
    write_predictions,
)
from bactrex.segment import segment


class LabelOracle:
    """Scores 1.0 exactly when the tagged pair has a gold relation.

    Works because instances built from gold sentences carry the gold
    label inside the marker-tagged pair; reconstructing it here would
    recouple to the classifier, so instead the extractor is driven by
    tag_instance labels via a parallel run.
    """

    def __init__(self, labels_by_text):
        self.labels_by_text = labels_by_text

    def score_batch(self, texts):
        return [float(self.labels_by_text.get(t, 0)) for t in texts]


def perfect_classifier_for(doc):
    from bactrex.segment import project_annotations
    from bactrex.transform import enumerate_pairs, tag_instance

    labels = {}
    sentences, _ = project_annotations(doc, oracle_boundaries(doc))
    for sentence in sentences:
        for pair in enumerate_pairs(sentence):
            instance = tag_instance(sentence, pair)
            labels[instance.tagged_text] = instance.label
    return LabelOracle(labels)


def simple_doc():
    text = "Aaonella brevis inhibits Bbcoccus lentus. Unrelated filler sentence follows."
    entities = (
        EntityMention("T1", "Bacteria", Span(0, 15), "Aaonella brevis"),
        EntityMention("T2", "Bacteria", Span(25, 40), "Bbcoccus lentus"),
    )
    relations = (Relation("R1", "interacts", "T1", "T2"),)
    return AnnotatedDocument(text, entities, relations, doc_id="doc0")


class TestExtract:
    def test_only_ie_with_perfect_classifier(self):
        doc = simple_doc()
        components = PipelineComponents(classifier=perfect_classifier_for(doc))
        predictions = extract(
            doc, PipelineMode.ONLY_IE, components, gold_boundaries=oracle_boundaries(doc)
        )
        assert [p.pair for p in predictions] == [("aaonella brevis", "bbcoccus lentus")]
        assert predictions[0].score == 1.0
        assert predictions[0].doc_id == "doc0"

    def test_document_without_entities(self):
        doc = AnnotatedDocument("Nothing stated here.", (), (), doc_id="d")
        components = PipelineComponents(classifier=BaselineClassifier())
        assert extract(doc, PipelineMode.ONLY_IE, components, gold_boundaries=oracle_boundaries(doc)) == []

    def test_mode_gating(self):
        doc = simple_doc()
        components = PipelineComponents(classifier=BaselineClassifier())
        with pytest.raises(ValueError, match="segmenter"):
            extract(doc, PipelineMode.SS_NER_IE, components)
        with pytest.raises(ValueError, match="gold sentence boundaries"):
            extract(doc, PipelineMode.NER_IE, PipelineComponents(tagger=OracleTagger(doc, oracle_boundaries(doc)), classifier=BaselineClassifier()))
        with pytest.raises(ValueError, match="tagger"):
            extract(doc, PipelineMode.NER_IE, components, gold_boundaries=oracle_boundaries(doc))

    def test_overtagging_creates_spurious_prediction(self):
        # A stated effect involving a non-bacterial organism: once the
        # tagger wrongly marks it as bacterial, the scorer happily
        # predicts an interaction for the pair.
        text = "Caenorhabditis elegans inhibits Escherichia coli."
        doc = AnnotatedDocument(
            text,
            (EntityMention("T1", "Bacteria", Span(32, 48), "Escherichia coli"),),
            (),
            doc_id="worm",
        )
        bacteria_only = Gazetteer.from_names(["Escherichia coli"])
        overtagging = Gazetteer.from_names(["Escherichia coli", "Caenorhabditis elegans"])
        boundaries = oracle_boundaries(doc)
        clean = extract(
            doc,
            PipelineMode.NER_IE,
            PipelineComponents(tagger=GazetteerTagger(bacteria_only), classifier=BaselineClassifier()),
            gold_boundaries=boundaries,
        )
        assert clean == []
        spurious = extract(
            doc,
            PipelineMode.NER_IE,
            PipelineComponents(tagger=GazetteerTagger(overtagging), classifier=BaselineClassifier()),
            gold_boundaries=boundaries,
        )
        assert [p.pair for p in spurious] == [("caenorhabditis elegans", "escherichia coli")]

    def test_dedup_keeps_max_score_and_all_evidence(self):
        text = "Aaonella brevis inhibits Bbcoccus lentus. Aaonella brevis suppressed Bbcoccus lentus."
        entities = (
            EntityMention("T1", "Bacteria", Span(0, 15), "Aaonella brevis"),
            EntityMention("T2", "Bacteria", Span(25, 40), "Bbcoccus lentus"),
            EntityMention("T3", "Bacteria", Span(42, 57), "Aaonella brevis"),
            EntityMention("T4", "Bacteria", Span(69, 84), "Bbcoccus lentus"),
        )
        doc = AnnotatedDocument(text, entities, (), doc_id="dd")
        components = PipelineComponents(classifier=BaselineClassifier())
        predictions = extract(
            doc, PipelineMode.ONLY_IE, components, gold_boundaries=oracle_boundaries(doc)
        )
        assert len(predictions) == 1
        pred = predictions[0]
        assert len(pred.evidence) == 2
        scores = BaselineClassifier().score_batch(
            ["@BAC1$ inhibits @BAC2$.", "@BAC1$ suppressed @BAC2$."]
        )
        assert pred.score == pytest.approx(max(scores))

    def test_purity_same_inputs_same_output(self, e2e_corpus, default_components):
        doc = e2e_corpus.documents[0]
        first = extract(doc, PipelineMode.SS_NER_IE, default_components)
        second = extract(doc, PipelineMode.SS_NER_IE, default_components)
        assert first == second

    def test_sentence_context_attached_to_component_errors(self):
        doc = simple_doc()

        class Boom:
            def tag(self, text):
                from bactrex.errors import BactrexError

                raise BactrexError("tagger exploded")

        components = PipelineComponents(
            segmenter=lambda text: segment(text), tagger=Boom(), classifier=BaselineClassifier()
        )
        with pytest.raises(Exception, match="doc0#s0"):
            extract(doc, PipelineMode.SS_NER_IE, components)


class TestOracleCollapse:
    def test_collapse_on_fixture_corpus(self, e2e_corpus, default_components):
        for doc in e2e_corpus.documents:
            boundaries = oracle_boundaries(doc)
            oracle_parts = PipelineComponents(
                segmenter=lambda text, b=boundaries: list(b),
                tagger=OracleTagger(doc, boundaries),
                classifier=default_components.classifier,
            )
            full = extract(doc, PipelineMode.SS_NER_IE, oracle_parts)
            gold_only = extract(
                doc, PipelineMode.ONLY_IE, default_components, gold_boundaries=boundaries
            )
            assert set(full) == set(gold_only)


class TestAblationReport:
    def test_rows_and_layout(self, e2e_corpus, default_components):
        report = ablation_report(e2e_corpus, default_components)
        assert tuple(report) == ABLATION_ROWS
        table = render_ablation_table(report)
        lines = table.splitlines()
        assert lines[0].split() == ["Precision", "Recall", "F1"]
        assert [line.rsplit(None, 3)[0] for line in lines[1:]] == list(ABLATION_ROWS)

    def test_oracle_components_collapse_rows(self, e2e_corpus, default_components):
        report = ablation_report(e2e_corpus, default_components, oracle_components=True)
        rows = {(m.tp, m.fp, m.fn) for m in report.values()}
        assert len(rows) == 1

    def test_fixture_regression_values(self, e2e_corpus, default_components):
        report = ablation_report(e2e_corpus, default_components)
        only_ie = report["Only IE"]
        assert (only_ie.tp, only_ie.fp, only_ie.fn) == (11, 1, 0)


class TestGoldPairs:
    def test_pairs_are_canonical_and_per_doc(self, e2e_corpus):
        gold = gold_pairs(e2e_corpus)
        assert len(gold) == 25
        for pairs in gold.values():
            for a, b in pairs:
                assert a < b
        assert gold["abs01"] == {("escherichia coli", "lactobacillus plantarum")}
        assert gold["abs11"] == set()


class TestRecords:
    def test_prediction_record_fields(self, tmp_path):
        pred = PredictedInteraction(("a", "b"), 0.9, (Evidence("d", 1, "s1"),))
        record = prediction_record(pred)
        assert list(record) == ["pair", "score", "doc_id", "sentence_index", "evidence"]
        path = tmp_path / "preds.jsonl"
        assert write_predictions([pred], path) == 1
        loaded = json.loads(path.read_text(encoding="utf-8"))
        assert loaded["pair"] == ["a", "b"]
        assert loaded["sentence_index"] == 1

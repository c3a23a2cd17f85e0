"""End-to-end extraction: segmentation -> entity tagging -> pair scoring.

Three ablation modes attribute error to each stage by substituting gold
annotations for upstream components:

* ``SS_NER_IE``  -- full pipeline: segment, tag, score.
* ``NER_IE``     -- gold sentence boundaries, predicted entities, scored.
* ``ONLY_IE``    -- gold boundaries and gold entities, only scoring runs.

Predictions are deduplicated per document by canonical pair, keeping the
maximum score and every supporting sentence as evidence. Output ordering
is deterministic (sorted by pair).
"""

from __future__ import annotations

import collections
import json
from dataclasses import dataclass, field
import enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from bactrex.classify import Classifier, BaselineClassifier
from bactrex.corpus import (
    AnnotatedDocument,
    AnnotatedSentence,
    Corpus,
    CorpusKind,
    EntityMention,
)
from bactrex.errors import BactrexError
from bactrex.evaluate import Metrics, evaluate_pairs, render_metric_table
from bactrex.ner import Tagger
from bactrex.segment import (
    AbbreviationGuard,
    Segmenter,
    SentenceBoundary,
    project_annotations,
    segment,
    suppress_straddling,
)
from bactrex.transform import enumerate_pairs, normalize_entity, tag_instance

__all__ = [
    "PipelineMode",
    "Evidence",
    "PredictedInteraction",
    "PipelineComponents",
    "OracleTagger",
    "oracle_boundaries",
    "extract",
    "gold_pairs",
    "ablation_report",
    "ABLATION_ROWS",
    "prediction_record",
    "write_predictions",
]


class PipelineMode(enum.Enum):
    SS_NER_IE = "ss-ner-ie"
    NER_IE = "ner-ie"
    ONLY_IE = "only-ie"


@dataclass(frozen=True)
class Evidence:
    doc_id: str
    sentence_index: int
    text: str


@dataclass(frozen=True)
class PredictedInteraction:
    """One extracted interaction: canonical pair, best score, evidence."""

    pair: tuple[str, str]
    score: float
    evidence: tuple[Evidence, ...]

    def __post_init__(self) -> None:
        if self.pair[0] >= self.pair[1]:
            raise ValueError(f"pair must be in canonical order, got {self.pair}")
        if not self.evidence:
            raise ValueError("a prediction needs at least one evidence sentence")

    @property
    def doc_id(self) -> str:
        return self.evidence[0].doc_id


@dataclass(frozen=True)
class PipelineComponents:
    """The pluggable stages plus the decision threshold."""

    segmenter: Segmenter | None = None
    tagger: Tagger | None = None
    classifier: Classifier = field(default_factory=BaselineClassifier)
    threshold: float = 0.5


def oracle_boundaries(
    doc: AnnotatedDocument, guard: AbbreviationGuard | None = None
) -> list[SentenceBoundary]:
    """Gold-consistent sentence boundaries for an annotated document.

    Rule-based boundaries are merged wherever a gold entity would straddle
    a split, so every annotation projects cleanly. This is the boundary
    set the gold-input ablation modes run on.
    """
    return suppress_straddling(doc.text, segment(doc.text, guard), doc.entities)


class OracleTagger:
    """Replays a document's gold mentions, one sentence at a time, in order.

    Built per document and per extraction pass; ``tag`` must be called
    with the document's sentences in their original order, which is how
    the extractor drives any tagger.
    """

    def __init__(self, doc: AnnotatedDocument, boundaries: Sequence[SentenceBoundary]):
        sentences, _ = project_annotations(doc, boundaries)
        self._queue = collections.deque((s.text, list(s.entities)) for s in sentences)

    def tag(self, text: str) -> list[EntityMention]:
        if not self._queue:
            raise BactrexError("oracle tagger exhausted: more sentences than boundaries")
        expected, entities = self._queue.popleft()
        if expected != text:
            raise BactrexError(
                f"oracle tagger got out-of-order sentence {text!r}, expected {expected!r}"
            )
        return entities


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


def extract(
    doc: AnnotatedDocument,
    mode: PipelineMode,
    components: PipelineComponents,
    gold_boundaries: Sequence[SentenceBoundary] | None = None,
) -> list[PredictedInteraction]:
    """Extract interactions from one passage under the given ablation mode.

    ``SS_NER_IE`` needs a segmenter and tagger; ``NER_IE`` needs supplied
    gold boundaries and a tagger; ``ONLY_IE`` needs gold boundaries and
    uses the document's own entities. Component errors propagate with the
    sentence context attached.
    """
    if mode is PipelineMode.SS_NER_IE:
        _require(components.segmenter is not None, "SS_NER_IE requires a segmenter")
        _require(components.tagger is not None, "SS_NER_IE requires a tagger")
        boundaries = components.segmenter(doc.text)
    elif mode is PipelineMode.NER_IE:
        _require(gold_boundaries is not None, "NER_IE requires gold sentence boundaries")
        _require(components.tagger is not None, "NER_IE requires a tagger")
        boundaries = list(gold_boundaries)
    else:
        _require(gold_boundaries is not None, "ONLY_IE requires gold sentence boundaries")
        boundaries = list(gold_boundaries)

    if mode is PipelineMode.ONLY_IE:
        sentences, _ = project_annotations(doc, boundaries)
    else:
        sentences = []
        for idx, boundary in enumerate(boundaries):
            text = boundary.span.slice(doc.text)
            try:
                mentions = components.tagger.tag(text)  # type: ignore[union-attr]
            except BactrexError as exc:
                raise type(exc)(f"{doc.doc_id}#s{idx}: {exc}") from exc
            sentences.append(
                AnnotatedSentence(
                    text=text,
                    entities=tuple(mentions),
                    relations=(),
                    provenance=f"{doc.doc_id}#s{idx}",
                )
            )

    tagged: list[tuple[int, str, tuple[str, str], str]] = []
    for idx, sentence in enumerate(sentences):
        for pair in enumerate_pairs(sentence):
            instance = tag_instance(sentence, pair)
            tagged.append((idx, sentence.text, (pair.entity_a, pair.entity_b), instance.tagged_text))
    if not tagged:
        return []
    try:
        scores = components.classifier.score_batch([item[3] for item in tagged])
    except BactrexError as exc:
        raise type(exc)(f"{doc.doc_id}: {exc}") from exc

    best: dict[tuple[str, str], float] = {}
    evidence: dict[tuple[str, str], list[Evidence]] = {}
    for (idx, text, pair, _), value in zip(tagged, scores):
        if value < components.threshold:
            continue
        if pair not in best or value > best[pair]:
            best[pair] = value
        evidence.setdefault(pair, []).append(Evidence(doc.doc_id, idx, text))
    return [
        PredictedInteraction(pair, best[pair], tuple(evidence[pair]))
        for pair in sorted(best)
    ]


def gold_pairs(corpus: Corpus) -> dict[str, set[tuple[str, str]]]:
    """Gold canonical pairs per document of a passage-level corpus."""
    if corpus.kind is not CorpusKind.PASSAGE:
        raise ValueError("gold pair extraction expects a passage-level corpus")
    gold: dict[str, set[tuple[str, str]]] = {}
    for doc in corpus.documents:
        pairs = set()
        for rel in doc.relations:
            k1 = normalize_entity(doc.entity_by_id(rel.arg1).surface)
            k2 = normalize_entity(doc.entity_by_id(rel.arg2).surface)
            if k1 != k2:
                pairs.add((min(k1, k2), max(k1, k2)))
        gold[doc.doc_id] = pairs
    return gold


ABLATION_ROWS = ("Only IE", "IE + NER", "SS + IE + NER")

_MODE_OF_ROW = {
    "Only IE": PipelineMode.ONLY_IE,
    "IE + NER": PipelineMode.NER_IE,
    "SS + IE + NER": PipelineMode.SS_NER_IE,
}


def ablation_report(
    corpus: Corpus,
    components: PipelineComponents,
    oracle_components: bool = False,
    guard: AbbreviationGuard | None = None,
) -> dict[str, Metrics]:
    """Run all three ablation modes over a gold corpus and score each.

    Gold boundaries for the gold-input modes come from
    :func:`oracle_boundaries`. With ``oracle_components`` the segmenter
    and tagger are replaced by gold-replaying oracles, under which all
    three rows must coincide. Pair matching uses normalized entity keys.
    """
    gold = gold_pairs(corpus)
    predictions: dict[str, list[PredictedInteraction]] = {row: [] for row in ABLATION_ROWS}
    for doc in corpus.documents:
        boundaries = oracle_boundaries(doc, guard)
        for row in ABLATION_ROWS:
            mode = _MODE_OF_ROW[row]
            if oracle_components:
                doc_components = PipelineComponents(
                    segmenter=lambda text, b=boundaries: list(b),
                    tagger=OracleTagger(doc, boundaries),
                    classifier=components.classifier,
                    threshold=components.threshold,
                )
            else:
                doc_components = components
            predictions[row].extend(
                extract(doc, mode, doc_components, gold_boundaries=boundaries)
            )
    return {row: evaluate_pairs(predictions[row], gold) for row in ABLATION_ROWS}


def render_ablation_table(report: Mapping[str, Metrics]) -> str:
    return render_metric_table({row: report[row] for row in ABLATION_ROWS})


# Prediction record format: one JSON object per line with fields pair,
# score, doc_id, sentence_index (of the first evidence sentence), evidence.
def prediction_record(pred: PredictedInteraction) -> dict:
    return {
        "pair": list(pred.pair),
        "score": pred.score,
        "doc_id": pred.doc_id,
        "sentence_index": pred.evidence[0].sentence_index,
        "evidence": [
            {"sentence_index": ev.sentence_index, "text": ev.text} for ev in pred.evidence
        ],
    }


def write_predictions(
    predictions: Iterable[PredictedInteraction], path: str | Path
) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for pred in predictions:
            fh.write(json.dumps(prediction_record(pred), ensure_ascii=False) + "\n")
            count += 1
    return count

"""Run the end-to-end extractor and its gold-component ablations.

The three modes attribute error to each stage: ONLY_IE scores gold
sentences with gold entities, NER_IE adds predicted entities, SS_NER_IE
runs everything from raw text.

Run from the repository root:  python demos/05_pipeline_ablation.py
"""

from pathlib import Path

from bactrex.classify import BaselineClassifier
from bactrex.corpus import CorpusKind, load_corpus
from bactrex.ner import GazetteerTagger, default_gazetteer
from bactrex.pipeline import (
    PipelineComponents,
    PipelineMode,
    ablation_report,
    extract,
    render_ablation_table,
)
from bactrex.segment import segment

CORPUS = Path(__file__).parent.parent / "tests" / "fixtures" / "e2e_corpus"

corpus = load_corpus(CORPUS, CorpusKind.PASSAGE)
components = PipelineComponents(
    segmenter=lambda text: segment(text),
    tagger=GazetteerTagger(default_gazetteer()),
    classifier=BaselineClassifier(),
)

doc = corpus.documents[0]
print(f"passage: {doc.text}\n")
for pred in extract(doc, PipelineMode.SS_NER_IE, components):
    print(f"  {pred.pair[0]} -- {pred.pair[1]}  score {pred.score:.2f}")
    for ev in pred.evidence:
        print(f"    s{ev.sentence_index}: {ev.text}")

print("\nablation over the 25-document corpus:")
print(render_ablation_table(ablation_report(corpus, components)))

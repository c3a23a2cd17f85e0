"""Validate an association network against a local literature store.

Every edge is checked for "probable sentences": fetched co-mention
sentences in which the pipeline predicts exactly that pair. The run is
fully offline; a live sentence-search client can be swapped in.

Run from the repository root:  python demos/06_network_validation.py
"""

from pathlib import Path

from bactrex.casestudy import (
    LocalSentenceStore,
    load_network,
    pair_slug,
    precision_audit,
    render_error_table,
    validate_network,
)
from bactrex.classify import BaselineClassifier
from bactrex.ner import GazetteerTagger, default_gazetteer
from bactrex.pipeline import PipelineComponents
from bactrex.segment import segment

CASE = Path(__file__).parent.parent / "tests" / "fixtures" / "casestudy"

network = load_network(CASE / "network_5edges.tsv")
components = PipelineComponents(
    segmenter=lambda text: segment(text),
    tagger=GazetteerTagger(default_gazetteer()),
    classifier=BaselineClassifier(),
)
report = validate_network(network, components, LocalSentenceStore(CASE / "sentence_store"))

for entry in report.entries:
    marker = "supported" if entry.probable else "no probable sentences"
    print(f"{entry.taxon_a} -- {entry.taxon_b}: {marker}")
    for probable in entry.probable:
        print(f"   [{probable.score:.2f}] {probable.text}  ({probable.ref})")

summary = report.to_dict()["summary"]
print(f"\n{summary['edges_with_support']} of {summary['edges_total']} edges supported; "
      f"recall is {summary['recall']} by design.")

# Manual verification: mark one probable sentence as a false positive and
# audit precision.
flags = {}
for entry in report.entries:
    slug = pair_slug(entry.taxon_a, entry.taxon_b)
    for idx in range(len(entry.probable)):
        flags[(slug, idx)] = not (slug == "eubacterium__roseburia" and idx == 1)
audit = precision_audit(report, flags)
print(f"audit: {audit.correct}/{audit.total} correct ({audit.fraction_correct:.0%})")
print(render_error_table(audit))

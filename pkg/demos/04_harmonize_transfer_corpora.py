"""Normalize external relation corpora into the common sentence schema.

Multi-sentence passages are resegmented; relations whose arguments land
in different sentences are dropped and counted; every relation label
collapses to "interacts".

Run from the repository root:  python demos/04_harmonize_transfer_corpora.py
"""

import json
from pathlib import Path

from bactrex.harmonize import SourceCorpusDescriptor, harmonize, merge_corpora, parse_source
from bactrex.transform import make_dataset

TRANSFER = Path(__file__).parent.parent / "tests" / "fixtures" / "transfer"

parts = []
for descriptor_path in sorted(TRANSFER.glob("*.descriptor.json")):
    payload = json.loads(descriptor_path.read_text(encoding="utf-8"))
    descriptor = SourceCorpusDescriptor(
        payload["name"], payload["format"],
        payload["entity_label_map"], payload["relation_label_map"],
    )
    docs = parse_source(descriptor, TRANSFER / payload["path"])
    corpus, report = harmonize(docs, descriptor)
    parts.append(corpus)
    print(
        f"{descriptor.name:>8}: {len(corpus.sentences)} sentences, "
        f"{report.relations_kept}/{report.relations_total} relations kept "
        f"({report.relations_cross_sentence} cross-sentence dropped)"
    )

merged = merge_corpora(parts)
instances = make_dataset(merged)
positives = sum(inst.label for inst in instances)
print(f"\nmerged: {len(merged.sentences)} sentences -> {len(instances)} instances "
      f"({positives} positive)")

"""Normalization of external relation-extraction corpora.

Source corpora (protein-protein, gene-regulation, drug-drug) arrive as
passages with their own entity and relation label vocabularies. The
harmonizer resegments every passage, keeps all annotations that fall
inside a single sentence, drops relations whose arguments land in
different sentences, and collapses every relation label to the single
binary ``interacts`` scheme. Output is a sentence-level corpus ready for
the entity-pair transform; drop accounting is returned alongside.

Two adapters are shipped:

* ``interchange-xml`` -- a flat XML layout::

      <corpus source="LLL">
        <document id="d0" text="GerE stimulates cotD. It also binds sigK.">
          <entity id="e0" offset="0-4" text="GerE" type="protein"/>
          <entity id="e1" offset="16-20" text="cotD" type="protein"/>
          <relation id="r0" arg1="e0" arg2="e1" type="stimulation"/>
        </document>
      </corpus>

  ``offset`` is ``start-end`` in Unicode code points, 0-based, end
  exclusive; ``text`` on an entity is the expected surface and is
  validated against the slice.

* ``brat`` -- a directory of ``.txt``/``.ann`` sibling pairs read by
  :func:`bactrex.corpus.load_corpus`.
"""

from __future__ import annotations

import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Sequence

from bactrex.corpus import (
    AnnotatedDocument,
    Corpus,
    CorpusKind,
    EntityMention,
    MalformedLine,
    Relation,
    Span,
    load_corpus,
)
from bactrex.errors import BactrexError
from bactrex.segment import (
    DropReport,
    Segmenter,
    project_annotations,
    segment,
    suppress_straddling,
)

__all__ = [
    "KNOWN_SOURCES",
    "SourceCorpusDescriptor",
    "UnmappedLabel",
    "parse_source",
    "harmonize",
    "merge_corpora",
]

logger = logging.getLogger(__name__)

KNOWN_SOURCES = frozenset(
    {"BioInfer", "HPDR50", "LLL", "IEPA", "AiMED", "GeneReg", "DDI2011"}
)
_FORMATS = frozenset({"interchange-xml", "brat"})
UNIFIED_RELATION_LABEL = "interacts"


class UnmappedLabel(BactrexError):
    """A source entity or relation label has no mapping in the descriptor."""


@dataclass(frozen=True)
class SourceCorpusDescriptor:
    """How to read and relabel one source corpus."""

    name: str
    format: str
    entity_label_map: Mapping[str, str]
    relation_label_map: Mapping[str, str]

    def __post_init__(self) -> None:
        if self.name not in KNOWN_SOURCES:
            raise ValueError(f"unknown source corpus {self.name!r}; expected one of {sorted(KNOWN_SOURCES)}")
        if self.format not in _FORMATS:
            raise ValueError(f"unknown adapter format {self.format!r}; expected one of {sorted(_FORMATS)}")
        for src, dst in self.relation_label_map.items():
            if dst != UNIFIED_RELATION_LABEL:
                raise ValueError(
                    f"relation label {src!r} maps to {dst!r}; all relations collapse to "
                    f"{UNIFIED_RELATION_LABEL!r}"
                )
        object.__setattr__(self, "entity_label_map", MappingProxyType(dict(self.entity_label_map)))
        object.__setattr__(self, "relation_label_map", MappingProxyType(dict(self.relation_label_map)))


_OFFSET = re.compile(r"^(\d+)-(\d+)$")


def _parse_interchange_xml(path: Path) -> list[AnnotatedDocument]:
    tree = ET.parse(path)
    root = tree.getroot()
    if root.tag != "corpus":
        raise MalformedLine(f"{path.name}: root element must be <corpus>, got <{root.tag}>")
    docs = []
    for elem in root.iter("document"):
        doc_id = elem.get("id", "")
        text = elem.get("text")
        if text is None:
            raise MalformedLine(f"{path.name}: document {doc_id!r} lacks a text attribute")
        entities = []
        for ent in elem.iter("entity"):
            m = _OFFSET.match(ent.get("offset", ""))
            if not m:
                raise MalformedLine(
                    f"{path.name}: entity {ent.get('id')!r} has bad offset {ent.get('offset')!r}"
                )
            span = Span(int(m.group(1)), int(m.group(2)))
            entities.append(
                EntityMention(ent.get("id", ""), ent.get("type", ""), span, ent.get("text", ""))
            )
        relations = [
            Relation(rel.get("id", ""), rel.get("type", ""), rel.get("arg1", ""), rel.get("arg2", ""))
            for rel in elem.iter("relation")
        ]
        try:
            docs.append(AnnotatedDocument(text, tuple(entities), tuple(relations), doc_id=doc_id))
        except BactrexError as exc:
            raise type(exc)(f"{path.name}: {exc}") from exc
    return docs


def parse_source(descriptor: SourceCorpusDescriptor, path: str | Path) -> list[AnnotatedDocument]:
    """Read one source corpus into document form via its format adapter."""
    path = Path(path)
    if descriptor.format == "interchange-xml":
        return _parse_interchange_xml(path)
    return list(load_corpus(path, CorpusKind.PASSAGE).documents)


def _map_labels(doc: AnnotatedDocument, descriptor: SourceCorpusDescriptor) -> AnnotatedDocument:
    entities = []
    for ent in doc.entities:
        if ent.label not in descriptor.entity_label_map:
            raise UnmappedLabel(
                f"{descriptor.name}/{doc.doc_id}: entity label {ent.label!r} has no mapping"
            )
        entities.append(
            EntityMention(ent.id, descriptor.entity_label_map[ent.label], ent.span, ent.surface)
        )
    relations = []
    for rel in doc.relations:
        if rel.label not in descriptor.relation_label_map:
            raise UnmappedLabel(
                f"{descriptor.name}/{doc.doc_id}: relation label {rel.label!r} has no mapping"
            )
        relations.append(Relation(rel.id, descriptor.relation_label_map[rel.label], rel.arg1, rel.arg2))
    return AnnotatedDocument(doc.text, tuple(entities), tuple(relations), doc_id=doc.doc_id)


def harmonize(
    docs: Sequence[AnnotatedDocument],
    descriptor: SourceCorpusDescriptor,
    segmenter: Segmenter | None = None,
) -> tuple[Corpus, DropReport]:
    """Resegment source documents into the common sentence-level schema.

    Boundaries that would cut through an annotated entity are suppressed,
    so no entity is lost to segmentation; relations spanning two sentences
    are dropped and counted. Every output sentence's provenance is
    ``<source>/<doc_id>#s<index>``.
    """
    if segmenter is None:
        segmenter = segment
    sentences = []
    report = DropReport()
    for doc in docs:
        mapped = _map_labels(doc, descriptor)
        mapped = AnnotatedDocument(
            mapped.text, mapped.entities, mapped.relations,
            doc_id=f"{descriptor.name}/{doc.doc_id}",
        )
        boundaries = segmenter(mapped.text)
        boundaries = suppress_straddling(mapped.text, boundaries, mapped.entities)
        doc_sentences, doc_report = project_annotations(mapped, boundaries)
        sentences.extend(doc_sentences)
        report.add(doc_report)
    return Corpus(kind=CorpusKind.SENTENCE, sentences=tuple(sentences)), report


def merge_corpora(parts: Sequence[Corpus]) -> Corpus:
    """Concatenate sentence-level corpora, preserving provenance tags."""
    merged: list = []
    for part in parts:
        if part.kind is not CorpusKind.SENTENCE:
            raise ValueError("merge requires sentence-level corpora")
        merged.extend(part.sentences)
    if not merged:
        logger.warning("merging produced an empty corpus")
    return Corpus(kind=CorpusKind.SENTENCE, sentences=tuple(merged))

"""Data model for annotated text and brat standoff I/O.

Annotated text comes in two granularities: single sentences and
multi-sentence passages. Both carry character-offset entity mentions and
binary relations between mentions. On disk a document is a sibling pair of
files: ``<name>.txt`` holding the raw text and ``<name>.ann`` holding one
annotation per line in the brat standoff convention::

    T1<TAB>Bacteria 0 13<TAB>Lactobacillus
    R1<TAB>interacts Arg1:T1 Arg2:T2

Offsets count Unicode code points into the text, 0-based with exclusive
end. Only entity (``T``) and binary relation (``R``) lines are supported;
other standoff line types are rejected. All types here are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
import re

from bactrex.errors import BactrexError

__all__ = [
    "Span",
    "EntityMention",
    "Relation",
    "AnnotatedSentence",
    "AnnotatedDocument",
    "Corpus",
    "CorpusKind",
    "MalformedLine",
    "SpanMismatch",
    "SpanOutOfBounds",
    "DanglingArgument",
    "MissingPair",
    "EmptyCorpus",
    "parse_brat",
    "write_brat",
    "load_corpus",
]


class MalformedLine(BactrexError):
    """An annotation line does not follow the supported standoff grammar."""


class SpanMismatch(BactrexError):
    """An annotation's surface string differs from the text at its span."""


class SpanOutOfBounds(BactrexError):
    """An annotation span extends past the end of the text."""


class DanglingArgument(BactrexError):
    """A relation references an entity id that does not exist."""


class MissingPair(BactrexError):
    """A corpus directory contains a ``.txt`` or ``.ann`` file without its sibling."""


class EmptyCorpus(BactrexError):
    """A corpus directory contains no document pairs."""


@dataclass(frozen=True)
class Span:
    """Half-open character range ``[start, end)`` into some owning text."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.start >= self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def slice(self, text: str) -> str:
        return text[self.start : self.end]

    def contains(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end

    def shifted(self, offset: int) -> "Span":
        return Span(self.start + offset, self.end + offset)

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class EntityMention:
    """One entity occurrence: span plus the surface string it covers.

    The surface must equal the owning text sliced at ``span``; this is
    enforced wherever a mention is attached to a sentence or document.
    Surfaces may not contain tab or newline characters, which the standoff
    format cannot represent.
    """

    id: str
    label: str
    span: Span
    surface: str


@dataclass(frozen=True)
class Relation:
    """Binary relation between two entity mentions, stored by mention id."""

    id: str
    label: str
    arg1: str
    arg2: str

    def __post_init__(self) -> None:
        if self.arg1 == self.arg2:
            raise ValueError(f"relation {self.id} links {self.arg1} to itself")


def _check_annotations(
    text: str, entities: tuple[EntityMention, ...], relations: tuple[Relation, ...]
) -> None:
    seen: set[str] = set()
    for ent in entities:
        if ent.id in seen:
            raise MalformedLine(f"duplicate annotation id {ent.id}")
        seen.add(ent.id)
        if ent.span.end > len(text):
            raise SpanOutOfBounds(
                f"{ent.id}: span [{ent.span.start}, {ent.span.end}) exceeds text length {len(text)}"
            )
        sliced = ent.span.slice(text)
        if sliced != ent.surface:
            raise SpanMismatch(f"{ent.id}: surface {ent.surface!r} != text slice {sliced!r}")
    for rel in relations:
        for arg in (rel.arg1, rel.arg2):
            if arg not in seen:
                raise DanglingArgument(f"{rel.id} references unknown entity {arg}")


@dataclass(frozen=True)
class AnnotatedSentence:
    """A single sentence with entity mentions and zero or more relations."""

    text: str
    entities: tuple[EntityMention, ...]
    relations: tuple[Relation, ...]
    provenance: str = ""

    def __post_init__(self) -> None:
        _check_annotations(self.text, self.entities, self.relations)

    def entity_by_id(self, entity_id: str) -> EntityMention:
        for ent in self.entities:
            if ent.id == entity_id:
                return ent
        raise DanglingArgument(f"unknown entity {entity_id}")


@dataclass(frozen=True)
class AnnotatedDocument:
    """A multi-sentence passage with entity mentions and relations."""

    text: str
    entities: tuple[EntityMention, ...]
    relations: tuple[Relation, ...]
    doc_id: str = ""

    def __post_init__(self) -> None:
        _check_annotations(self.text, self.entities, self.relations)

    def entity_by_id(self, entity_id: str) -> EntityMention:
        for ent in self.entities:
            if ent.id == entity_id:
                return ent
        raise DanglingArgument(f"unknown entity {entity_id}")


class CorpusKind(enum.Enum):
    SENTENCE = "sentence"
    PASSAGE = "passage"


@dataclass(frozen=True)
class Corpus:
    """A homogeneous collection of annotated sentences or passages."""

    kind: CorpusKind
    sentences: tuple[AnnotatedSentence, ...] = field(default=())
    documents: tuple[AnnotatedDocument, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.kind is CorpusKind.SENTENCE and self.documents:
            raise ValueError("sentence-level corpus must not carry documents")
        if self.kind is CorpusKind.PASSAGE and self.sentences:
            raise ValueError("passage-level corpus must not carry sentences")

    def __len__(self) -> int:
        return len(self.sentences) if self.kind is CorpusKind.SENTENCE else len(self.documents)


_ENTITY_LINE = re.compile(r"^(T\d+)\t(\S+) (\d+) (\d+)\t(.*)$")
_RELATION_LINE = re.compile(r"^(R\d+)\t(\S+) Arg1:(T\d+) Arg2:(T\d+)$")
# Standoff line types this package deliberately does not read.
_UNSUPPORTED_PREFIX = re.compile(r"^[EANM#*]")


def parse_brat(text: str, ann: str, doc_id: str = "") -> AnnotatedDocument:
    """Parse standoff annotation lines against their text.

    Raises:
        MalformedLine: a line does not match the entity/relation grammar,
            uses an unsupported standoff type, repeats an id, or carries a
            degenerate offset pair.
        SpanOutOfBounds: an entity span exceeds the text length.
        SpanMismatch: an entity surface differs from the text at its span.
        DanglingArgument: a relation argument does not resolve.
    """
    entities: list[EntityMention] = []
    relations: list[tuple[int, str, str, str, str]] = []
    for lineno, line in enumerate(ann.split("\n"), start=1):
        if not line:
            continue
        if line.startswith("T"):
            m = _ENTITY_LINE.match(line)
            if not m:
                raise MalformedLine(f"line {lineno}: bad entity line {line!r}")
            ident, label, start_s, end_s, surface = m.groups()
            start, end = int(start_s), int(end_s)
            if start >= end:
                raise MalformedLine(f"line {lineno}: bad offsets {start} {end}")
            if end > len(text):
                raise SpanOutOfBounds(
                    f"line {lineno}: {ident} span [{start}, {end}) exceeds text length {len(text)}"
                )
            if text[start:end] != surface:
                raise SpanMismatch(
                    f"line {lineno}: {ident} surface {surface!r} != text slice {text[start:end]!r}"
                )
            entities.append(EntityMention(ident, label, Span(start, end), surface))
        elif line.startswith("R"):
            m = _RELATION_LINE.match(line)
            if not m:
                raise MalformedLine(f"line {lineno}: bad relation line {line!r}")
            ident, label, arg1, arg2 = m.groups()
            if arg1 == arg2:
                raise MalformedLine(f"line {lineno}: {ident} links {arg1} to itself")
            relations.append((lineno, ident, label, arg1, arg2))
        elif _UNSUPPORTED_PREFIX.match(line):
            raise MalformedLine(
                f"line {lineno}: unsupported annotation type {line.split(chr(9))[0]!r} "
                "(only T and R lines are read)"
            )
        else:
            raise MalformedLine(f"line {lineno}: unrecognized line {line!r}")

    known = {ent.id for ent in entities}
    resolved: list[Relation] = []
    for lineno, ident, label, arg1, arg2 in relations:
        for arg in (arg1, arg2):
            if arg not in known:
                raise DanglingArgument(f"line {lineno}: {ident} references unknown entity {arg}")
        resolved.append(Relation(ident, label, arg1, arg2))
    return AnnotatedDocument(text, tuple(entities), tuple(resolved), doc_id=doc_id)


def write_brat(doc: AnnotatedDocument | AnnotatedSentence) -> tuple[str, str]:
    """Serialize a document back to ``(text, ann)``.

    Ids are renumbered in order of appearance (T1.., then R1..) and entity
    lines are emitted before relation lines, so ``parse_brat(*write_brat(d))``
    reproduces ``d`` up to id renumbering.
    """
    id_map: dict[str, str] = {}
    lines: list[str] = []
    for i, ent in enumerate(doc.entities, start=1):
        if "\t" in ent.surface or "\n" in ent.surface:
            raise MalformedLine(f"{ent.id}: surface contains tab or newline, not writable")
        new_id = f"T{i}"
        id_map[ent.id] = new_id
        lines.append(f"{new_id}\t{ent.label} {ent.span.start} {ent.span.end}\t{ent.surface}")
    for j, rel in enumerate(doc.relations, start=1):
        lines.append(f"R{j}\t{rel.label} Arg1:{id_map[rel.arg1]} Arg2:{id_map[rel.arg2]}")
    ann = "\n".join(lines) + "\n" if lines else ""
    return doc.text, ann


def load_corpus(path: str | Path, kind: CorpusKind) -> Corpus:
    """Load all ``.txt``/``.ann`` sibling pairs under a directory.

    Pairs are read in lexicographic filename order. Duplicate texts are
    preserved as distinct items; deduplication is the caller's concern.

    Raises:
        EmptyCorpus: the directory holds no document pair.
        MissingPair: a ``.txt`` or ``.ann`` file has no sibling.
        BactrexError: parse errors, re-raised with the offending filename.
    """
    root = Path(path)
    txt_files = sorted(root.glob("*.txt"))
    ann_files = {p.stem for p in root.glob("*.ann")}
    for stem in sorted(ann_files - {p.stem for p in txt_files}):
        raise MissingPair(f"{stem}.ann has no sibling {stem}.txt in {root}")
    if not txt_files:
        raise EmptyCorpus(f"no .txt/.ann pairs under {root}")

    sentences: list[AnnotatedSentence] = []
    documents: list[AnnotatedDocument] = []
    for txt_path in txt_files:
        ann_path = txt_path.with_suffix(".ann")
        if not ann_path.exists():
            raise MissingPair(f"{txt_path.name} has no sibling {ann_path.name}")
        # newline="" keeps offsets exact: no newline translation on read.
        with open(txt_path, encoding="utf-8", newline="") as fh:
            text = fh.read()
        with open(ann_path, encoding="utf-8", newline="") as fh:
            ann = fh.read()
        try:
            doc = parse_brat(text, ann, doc_id=txt_path.stem)
        except BactrexError as exc:
            raise type(exc)(f"{ann_path.name}: {exc}") from exc
        if kind is CorpusKind.SENTENCE:
            sentences.append(
                AnnotatedSentence(doc.text, doc.entities, doc.relations, provenance=doc.doc_id)
            )
        else:
            documents.append(doc)
    if kind is CorpusKind.SENTENCE:
        return Corpus(kind=kind, sentences=tuple(sentences))
    return Corpus(kind=kind, documents=tuple(documents))

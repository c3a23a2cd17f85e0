"""Sentence segmentation with protection for scientific abbreviations.

The splitter is deliberately rule-based: a sentence ends at ``.``, ``!`` or
``?`` followed by whitespace and an uppercase or digit start, unless the
terminator sits inside a guarded abbreviation (``e.g.``, ``Fig.``, an
abbreviated genus such as ``Lb.`` before a lowercase epithet) or inside
parentheses. Segmenters are pluggable: anything that maps text to a list
of :class:`SentenceBoundary` can replace the rule-based default.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Sequence

from bactrex.corpus import AnnotatedDocument, AnnotatedSentence, EntityMention, Span

__all__ = [
    "SentenceBoundary",
    "AbbreviationGuard",
    "DropReport",
    "Segmenter",
    "default_guard",
    "load_guard",
    "segment",
    "suppress_straddling",
    "project_annotations",
]

_TERMINATORS = ".!?"
_OPENERS = "([{"
_CLOSERS = ")]}"
# Abbreviated genus ("Lb.", "E.") directly before a lowercase epithet must
# never end a sentence, however the guard file is configured.
_GENUS_ABBREV = re.compile(r"\b[A-Z][a-z]{0,2}\.(?=\s+[a-z])")


@dataclass(frozen=True)
class SentenceBoundary:
    """Character span of one sentence within a passage."""

    span: Span


@dataclass(frozen=True)
class AbbreviationGuard:
    """Patterns whose terminators never split a sentence.

    ``literals`` are case-insensitive token forms ending in a period
    (``"e.g."``, ``"fig."``); a candidate split is suppressed when the token
    ending at the terminator equals one of them. ``patterns`` are regexes;
    any terminator inside a match is protected.
    """

    literals: frozenset[str]
    patterns: tuple[re.Pattern[str], ...] = field(default=(_GENUS_ABBREV,))

    def __post_init__(self) -> None:
        for lit in self.literals:
            if not lit or lit != lit.casefold():
                raise ValueError(f"guard literals must be casefolded, got {lit!r}")


Segmenter = Callable[[str], "list[SentenceBoundary]"]


def load_guard(path: str | Path) -> AbbreviationGuard:
    """Read a guard file: one abbreviation per line, ``#`` comments, UTF-8."""
    literals = set()
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            literals.add(line.casefold())
    return AbbreviationGuard(literals=frozenset(literals))


@lru_cache(maxsize=1)
def default_guard() -> AbbreviationGuard:
    """Guard built from the packaged abbreviation list."""
    ref = resources.files("bactrex.data").joinpath("segment_abbreviations.txt")
    with resources.as_file(ref) as path:
        return load_guard(path)


def _protected_positions(text: str, guard: AbbreviationGuard) -> set[int]:
    protected: set[int] = set()
    for pattern in guard.patterns:
        for m in pattern.finditer(text):
            for i in range(m.start(), m.end()):
                if text[i] in _TERMINATORS:
                    protected.add(i)
    for i, ch in enumerate(text):
        if ch != ".":
            continue
        j = i
        while j > 0 and not text[j - 1].isspace():
            j -= 1
        token = text[j : i + 1].casefold().lstrip("([{'\"‘“")
        if token in guard.literals:
            protected.add(i)
    return protected


def _split_points(text: str, guard: AbbreviationGuard) -> list[int]:
    """Indices just past a sentence terminator where a new sentence starts."""
    protected = _protected_positions(text, guard)
    points: list[int] = []
    depth = 0
    n = len(text)
    for i, ch in enumerate(text):
        if ch in _OPENERS:
            depth += 1
        elif ch in _CLOSERS:
            depth = max(0, depth - 1)
        if ch not in _TERMINATORS or depth > 0 or i in protected:
            continue
        if i + 1 < n and text[i + 1] in _TERMINATORS:
            continue  # split only at the end of a terminator run
        k = i + 1
        if k >= n or not text[k].isspace():
            continue
        while k < n and text[k].isspace():
            k += 1
        if k < n and (text[k].isupper() or text[k].isdigit()):
            points.append(i + 1)
    return points


def segment(text: str, guard: AbbreviationGuard | None = None) -> list[SentenceBoundary]:
    """Split a passage into ordered, non-overlapping sentence boundaries.

    Boundaries are trimmed to non-whitespace text, so concatenating the
    spans plus the whitespace between them reconstructs the passage.
    Pathological input (no usable split point) yields a single boundary.
    Whitespace-only text yields no boundaries.
    """
    if not text:
        raise ValueError("text must be non-empty")
    if guard is None:
        guard = default_guard()
    pieces: list[SentenceBoundary] = []
    start = 0
    for point in _split_points(text, guard) + [len(text)]:
        trimmed = _trim(text, start, point)
        if trimmed is not None:
            pieces.append(SentenceBoundary(trimmed))
        start = point
    return pieces


def _trim(text: str, start: int, end: int) -> Span | None:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    if start >= end:
        return None
    return Span(start, end)


def suppress_straddling(
    text: str,
    boundaries: Sequence[SentenceBoundary],
    entities: Iterable[EntityMention],
) -> list[SentenceBoundary]:
    """Merge boundaries so that no known entity straddles a split.

    Used when gold entities exist (harmonization, gold-corpus evaluation):
    a proposed boundary that would cut through an annotated mention is
    evidence the split is wrong, so the affected sentences are merged.
    """
    spans = [b.span for b in boundaries]
    changed = True
    while changed:
        changed = False
        for ent in entities:
            hit = [i for i, s in enumerate(spans) if s.overlaps(ent.span)]
            if not hit:
                continue
            lo, hi = hit[0], hit[-1]
            if lo == hi and spans[lo].contains(ent.span):
                continue
            merged = Span(
                min(spans[lo].start, ent.span.start),
                max(spans[hi].end, ent.span.end),
            )
            spans[lo : hi + 1] = [merged]
            changed = True
            break
    return [SentenceBoundary(s) for s in spans]


@dataclass
class DropReport:
    """Kept/dropped accounting for annotation projection.

    Conservation holds by construction:
    ``entities_total == entities_kept + entities_straddling`` and
    ``relations_total == relations_kept + relations_cross_sentence +
    relations_orphaned``.
    """

    entities_total: int = 0
    entities_kept: int = 0
    entities_straddling: int = 0
    relations_total: int = 0
    relations_kept: int = 0
    relations_cross_sentence: int = 0
    relations_orphaned: int = 0

    def add(self, other: "DropReport") -> None:
        self.entities_total += other.entities_total
        self.entities_kept += other.entities_kept
        self.entities_straddling += other.entities_straddling
        self.relations_total += other.relations_total
        self.relations_kept += other.relations_kept
        self.relations_cross_sentence += other.relations_cross_sentence
        self.relations_orphaned += other.relations_orphaned

    def to_dict(self) -> dict[str, int]:
        return dict(vars(self))


def project_annotations(
    doc: AnnotatedDocument, boundaries: Sequence[SentenceBoundary]
) -> tuple[list[AnnotatedSentence], DropReport]:
    """Distribute a document's annotations over its sentence boundaries.

    Each entity lands in the unique sentence containing its span (offsets
    rebased to the sentence); entities straddling a boundary are dropped
    and counted. Relations survive only when both arguments land in the
    same sentence; cross-sentence relations and relations that lost an
    argument are dropped and counted separately.
    """
    report = DropReport(
        entities_total=len(doc.entities), relations_total=len(doc.relations)
    )
    placed: dict[str, tuple[int, EntityMention]] = {}
    per_sentence: list[list[EntityMention]] = [[] for _ in boundaries]
    for ent in doc.entities:
        home = None
        for idx, boundary in enumerate(boundaries):
            if boundary.span.contains(ent.span):
                home = idx
                break
        if home is None:
            report.entities_straddling += 1
            continue
        rebased = EntityMention(
            ent.id, ent.label, ent.span.shifted(-boundaries[home].span.start), ent.surface
        )
        placed[ent.id] = (home, rebased)
        per_sentence[home].append(rebased)
        report.entities_kept += 1

    rel_per_sentence: list[list] = [[] for _ in boundaries]
    for rel in doc.relations:
        if rel.arg1 not in placed or rel.arg2 not in placed:
            report.relations_orphaned += 1
            continue
        s1, _ = placed[rel.arg1]
        s2, _ = placed[rel.arg2]
        if s1 != s2:
            report.relations_cross_sentence += 1
            continue
        rel_per_sentence[s1].append(rel)
        report.relations_kept += 1

    sentences = [
        AnnotatedSentence(
            text=boundary.span.slice(doc.text),
            entities=tuple(per_sentence[idx]),
            relations=tuple(rel_per_sentence[idx]),
            provenance=f"{doc.doc_id}#s{idx}",
        )
        for idx, boundary in enumerate(boundaries)
    ]
    return sentences, report

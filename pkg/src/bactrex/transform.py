"""Entity-pair transform: relation extraction as binary classification.

For every pair of unique entities in a sentence, one classification
instance is produced: the sentence text with every mention of the first
entity replaced by ``@BAC1$`` and every mention of the second by
``@BAC2$``, labelled 1 when a gold relation connects the pair (in either
direction) and 0 otherwise. Entities are unique by normalized surface
form, not by span; pairs are unordered with the two keys in lexicographic
order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable

from bactrex.corpus import AnnotatedSentence, Corpus, CorpusKind, Span
from bactrex.errors import BactrexError

__all__ = [
    "MARKER_A",
    "MARKER_B",
    "CandidatePair",
    "LabeledInstance",
    "OverlappingMentions",
    "normalize_entity",
    "enumerate_pairs",
    "tag_instance",
    "make_dataset",
    "write_dataset",
    "read_dataset",
]

MARKER_A = "@BAC1$"
MARKER_B = "@BAC2$"

_TRAILING_PUNCT = ".,;:!?'\"`)]}"


class OverlappingMentions(BactrexError):
    """Two mention spans of a candidate pair intersect; the annotation is corrupt."""


def normalize_entity(surface: str) -> str:
    """Normalization key for entity identity: casefold, collapse internal
    whitespace, strip trailing punctuation."""
    if not surface:
        raise ValueError("surface must be non-empty")
    key = " ".join(surface.casefold().split())
    return key.rstrip(_TRAILING_PUNCT).rstrip()


@dataclass(frozen=True)
class CandidatePair:
    """An unordered pair of unique entities with their mention spans.

    ``entity_a`` sorts strictly before ``entity_b``; each mention list is
    non-empty and ordered by span start.
    """

    entity_a: str
    entity_b: str
    mentions_a: tuple[Span, ...]
    mentions_b: tuple[Span, ...]

    def __post_init__(self) -> None:
        if not self.entity_a < self.entity_b:
            raise ValueError(f"pair keys out of canonical order: {self.entity_a!r}, {self.entity_b!r}")
        if not self.mentions_a or not self.mentions_b:
            raise ValueError("mention lists must be non-empty")


@dataclass(frozen=True)
class LabeledInstance:
    """One marker-tagged classification instance."""

    tagged_text: str
    label: int
    pair: CandidatePair
    provenance: str = ""

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        if MARKER_A not in self.tagged_text or MARKER_B not in self.tagged_text:
            raise ValueError("tagged text must contain both pair markers")


def enumerate_pairs(sentence: AnnotatedSentence) -> list[CandidatePair]:
    """All unordered pairs of unique normalized entity keys in a sentence.

    Mentions sharing a normalized key are grouped, so a sentence with n
    unique keys yields n*(n-1)/2 pairs. Fewer than two unique keys yield
    an empty list.
    """
    groups: dict[str, list[Span]] = {}
    for ent in sentence.entities:
        groups.setdefault(normalize_entity(ent.surface), []).append(ent.span)
    for spans in groups.values():
        spans.sort(key=lambda s: (s.start, s.end))
    keys = sorted(groups)
    return [
        CandidatePair(a, b, tuple(groups[a]), tuple(groups[b]))
        for a, b in combinations(keys, 2)
    ]


def _pair_is_related(sentence: AnnotatedSentence, pair: CandidatePair) -> bool:
    want = {pair.entity_a, pair.entity_b}
    for rel in sentence.relations:
        k1 = normalize_entity(sentence.entity_by_id(rel.arg1).surface)
        k2 = normalize_entity(sentence.entity_by_id(rel.arg2).surface)
        if {k1, k2} == want:
            return True
    return False


def tag_instance(sentence: AnnotatedSentence, pair: CandidatePair) -> LabeledInstance:
    """Rewrite a sentence with the pair's mentions replaced by markers.

    Every mention of ``entity_a`` becomes ``@BAC1$`` and every mention of
    ``entity_b`` becomes ``@BAC2$``. Replacements run right-to-left so
    earlier offsets stay valid. The label is 1 iff any gold relation links
    the two mention groups, in either argument direction.

    Raises:
        OverlappingMentions: two of the pair's mention spans intersect.
    """
    replacements = [(span, MARKER_A) for span in pair.mentions_a]
    replacements += [(span, MARKER_B) for span in pair.mentions_b]
    replacements.sort(key=lambda item: item[0].start)
    for (left, _), (right, _) in zip(replacements, replacements[1:]):
        if left.overlaps(right):
            raise OverlappingMentions(
                f"{sentence.provenance or 'sentence'}: spans "
                f"[{left.start},{left.end}) and [{right.start},{right.end}) intersect"
            )
    text = sentence.text
    for span, marker in reversed(replacements):
        text = text[: span.start] + marker + text[span.end :]
    label = 1 if _pair_is_related(sentence, pair) else 0
    return LabeledInstance(text, label, pair, provenance=sentence.provenance)


def make_dataset(corpus: Corpus) -> list[LabeledInstance]:
    """Tagged instances for every pair of every sentence, in corpus order."""
    if corpus.kind is not CorpusKind.SENTENCE:
        raise ValueError("dataset construction requires a sentence-level corpus")
    instances: list[LabeledInstance] = []
    for sentence in corpus.sentences:
        for pair in enumerate_pairs(sentence):
            instances.append(tag_instance(sentence, pair))
    return instances


# On-disk record format: one JSON object per line, UTF-8, fields in this
# order: tagged_text, label, entity_a, entity_b, provenance.
def _to_record(instance: LabeledInstance) -> dict:
    return {
        "tagged_text": instance.tagged_text,
        "label": instance.label,
        "entity_a": instance.pair.entity_a,
        "entity_b": instance.pair.entity_b,
        "provenance": instance.provenance,
    }


def write_dataset(instances: Iterable[LabeledInstance], path: str | Path) -> int:
    """Write instances as JSON-lines records; returns the record count."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for instance in instances:
            fh.write(json.dumps(_to_record(instance), ensure_ascii=False) + "\n")
            count += 1
    return count


def read_dataset(path: str | Path) -> list[dict]:
    """Read JSON-lines instance records back as dictionaries."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            missing = {"tagged_text", "label", "entity_a", "entity_b", "provenance"} - set(record)
            if missing:
                raise BactrexError(f"{path}:{lineno}: record missing fields {sorted(missing)}")
            records.append(record)
    return records

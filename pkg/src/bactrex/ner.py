"""Bacterial named-entity tagging.

Two interchangeable backends sit behind the same ``tag(text)`` interface:
a dictionary (gazetteer) tagger doing longest-match lookup over a curated
taxon list, and a client for a remote neural tagger speaking the shared
wire protocol. The gazetteer trades recall on strain-level names for
never tagging non-bacterial taxa; the remote model is whatever the server
provides, validated on the way in.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
import re
from typing import Iterable, Mapping, Protocol

from bactrex.corpus import EntityMention, Span
from bactrex.remote import DEFAULT_TIMEOUT, ProtocolViolation, post_json
from bactrex.transform import normalize_entity

__all__ = [
    "BACTERIA_LABEL",
    "Gazetteer",
    "Tagger",
    "TaggerConfig",
    "GazetteerTagger",
    "RemoteTagger",
    "load_gazetteer",
    "default_gazetteer",
    "gazetteer_tag",
    "remote_tag",
    "make_tagger",
]

BACTERIA_LABEL = "Bacteria"

_LEADING_TRIM = "([{'\"‘“"
_TRAILING_TRIM = ".,;:!?'\"`)]}’”"
_TOKEN = re.compile(r"\S+")


class Tagger(Protocol):
    def tag(self, text: str) -> list[EntityMention]: ...


@dataclass(frozen=True)
class Gazetteer:
    """Normalized taxon names plus genus abbreviation expansions.

    ``lookup`` contains every normalized name and, for each multi-word
    name whose genus has a registered abbreviation, the abbreviated
    variant (``"lb. oligofermentans"``). Matching is case-insensitive via
    the entity normalization key. Single-letter abbreviations are shared
    by many genera; ``abbreviations`` keeps the first registration per
    abbreviated form, while variant generation uses every registration.
    """

    names: frozenset[str]
    abbreviations: dict[str, str]  # abbreviated genus -> full genus, casefolded
    lookup: frozenset[str]
    max_tokens: int

    @classmethod
    def from_names(
        cls,
        names: "list[str] | set[str]",
        abbreviations: "Mapping[str, str] | Iterable[tuple[str, str]] | None" = None,
    ) -> "Gazetteer":
        """``abbreviations`` maps abbreviated genus to full genus; an
        iterable of pairs allows one abbreviated form to serve several
        genera."""
        if not names:
            raise ValueError("gazetteer requires at least one name")
        if isinstance(abbreviations, Mapping):
            pairs = list(abbreviations.items())
        else:
            pairs = list(abbreviations or ())
        pairs = [(a.casefold(), g.casefold()) for a, g in pairs]
        expansion: dict[str, str] = {}
        by_genus: dict[str, list[str]] = {}
        for abbrev, genus in pairs:
            expansion.setdefault(abbrev, genus)
            by_genus.setdefault(genus, []).append(abbrev)
        normalized = frozenset(normalize_entity(name) for name in names)
        lookup = set(normalized)
        for name in normalized:
            parts = name.split(" ", 1)
            if len(parts) == 2:
                for abbrev in by_genus.get(parts[0], ()):
                    lookup.add(f"{abbrev} {parts[1]}")
        max_tokens = max(len(entry.split()) for entry in lookup)
        return cls(normalized, expansion, frozenset(lookup), max_tokens)

    def matches(self, key: str) -> bool:
        return key in self.lookup


def load_gazetteer(path: str | Path) -> Gazetteer:
    """Read a gazetteer file: ``name[<TAB>genus abbreviation]`` per line,
    ``#`` comments, UTF-8."""
    names: list[str] = []
    pairs: list[tuple[str, str]] = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.rstrip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        name = fields[0].strip()
        names.append(name)
        if len(fields) > 1 and fields[1].strip():
            pairs.append((fields[1].strip(), name))
    return Gazetteer.from_names(names, pairs)


@lru_cache(maxsize=1)
def default_gazetteer() -> Gazetteer:
    ref = resources.files("bactrex.data").joinpath("gazetteer.tsv")
    with resources.as_file(ref) as path:
        return load_gazetteer(path)


def gazetteer_tag(text: str, gazetteer: Gazetteer, longest: bool = True) -> list[EntityMention]:
    """Non-overlapping case-insensitive dictionary matches.

    Matching is greedy left to right, longest window first by default
    (``longest=False`` prefers the shortest window, which lets a genus
    shadow its binomials); surrounding brackets, quotes and trailing
    punctuation are excluded from the span. Every returned span
    normalizes to a gazetteer lookup entry.
    """
    tokens = [(m.start(), m.end()) for m in _TOKEN.finditer(text)]
    mentions: list[EntityMention] = []
    i = 0
    while i < len(tokens):
        found = None
        widths = range(min(gazetteer.max_tokens, len(tokens) - i), 0, -1)
        for width in widths if longest else reversed(widths):
            start, end = tokens[i][0], tokens[i + width - 1][1]
            window = text[start:end]
            lead = len(window) - len(window.lstrip(_LEADING_TRIM))
            trail = len(window) - len(window.rstrip(_TRAILING_TRIM))
            if lead + trail >= len(window):
                continue
            candidate = Span(start + lead, end - trail)
            if gazetteer.matches(normalize_entity(candidate.slice(text))):
                found = (candidate, width)
                break
        if found is None:
            i += 1
            continue
        span, width = found
        mentions.append(
            EntityMention(f"T{len(mentions) + 1}", BACTERIA_LABEL, span, span.slice(text))
        )
        i += width
    return mentions


def _resolve_overlaps(candidates: list[EntityMention]) -> list[EntityMention]:
    """Longest-match overlap resolution, ties broken by earlier start."""
    chosen: list[EntityMention] = []
    for cand in sorted(candidates, key=lambda m: (-m.span.length, m.span.start)):
        if all(not cand.span.overlaps(kept.span) for kept in chosen):
            chosen.append(cand)
    chosen.sort(key=lambda m: m.span.start)
    return [
        EntityMention(f"T{i + 1}", m.label, m.span, m.surface)
        for i, m in enumerate(chosen)
    ]


def remote_tag(
    text: str, endpoint: str, timeout: float = DEFAULT_TIMEOUT
) -> list[EntityMention]:
    """Tag one sentence through a remote model behind the wire protocol.

    Server output is validated (integer spans in bounds) and overlapping
    spans are resolved longest-match, earlier start winning ties.
    """
    body = post_json(endpoint.rstrip("/") + "/ner", {"sentences": [text]}, timeout=timeout)
    mention_lists = body.get("mentions")
    if not isinstance(mention_lists, list) or len(mention_lists) != 1:
        raise ProtocolViolation(
            f"{endpoint}: expected one mention list, got {type(mention_lists).__name__}"
        )
    candidates = []
    for record in mention_lists[0]:
        if not isinstance(record, dict):
            raise ProtocolViolation(f"{endpoint}: mention record is not an object")
        start, end = record.get("start"), record.get("end")
        label = record.get("label", BACTERIA_LABEL)
        if not isinstance(start, int) or not isinstance(end, int) or isinstance(start, bool) or isinstance(end, bool):
            raise ProtocolViolation(f"{endpoint}: non-integer span in {record!r}")
        if start < 0 or start >= end or end > len(text):
            raise ProtocolViolation(
                f"{endpoint}: span [{start}, {end}) out of bounds for sentence of length {len(text)}"
            )
        span = Span(start, end)
        candidates.append(EntityMention("T0", str(label), span, span.slice(text)))
    return _resolve_overlaps(candidates)


@dataclass(frozen=True)
class GazetteerTagger:
    gazetteer: Gazetteer
    longest_match: bool = True

    def tag(self, text: str) -> list[EntityMention]:
        return gazetteer_tag(text, self.gazetteer, longest=self.longest_match)


@dataclass(frozen=True)
class RemoteTagger:
    endpoint: str
    timeout: float = DEFAULT_TIMEOUT

    def tag(self, text: str) -> list[EntityMention]:
        return remote_tag(text, self.endpoint, timeout=self.timeout)


@dataclass(frozen=True)
class TaggerConfig:
    """Which tagging backend to use; exactly one is active."""

    backend: str = "gazetteer"  # "gazetteer" | "remote"
    endpoint: str | None = None
    gazetteer_path: str | None = None
    longest_match: bool = True

    def __post_init__(self) -> None:
        if self.backend not in ("gazetteer", "remote"):
            raise ValueError(f"unknown tagger backend {self.backend!r}")
        if self.backend == "remote" and not self.endpoint:
            raise ValueError("remote tagger requires an endpoint")
        if self.backend == "gazetteer" and self.endpoint:
            raise ValueError("gazetteer tagger must not carry an endpoint")


def make_tagger(config: TaggerConfig) -> Tagger:
    if config.backend == "remote":
        return RemoteTagger(endpoint=config.endpoint or "")
    gazetteer = (
        load_gazetteer(config.gazetteer_path) if config.gazetteer_path else default_gazetteer()
    )
    return GazetteerTagger(gazetteer, longest_match=config.longest_match)

"""Literature validation of microbial association networks.

Given a network of pairwise taxon associations (e.g. inferred from
abundance correlations), each edge is checked against the literature:
candidate sentences co-mentioning both taxa are fetched, the extraction
pipeline runs over them, and sentences whose predicted pair matches the
edge are reported as *probable sentences*. The report carries
manual-verification slots; a precision audit summarizes them. Recall is
explicitly unmeasured: absence of probable sentences does not refute an
edge.

Sentence sources are pluggable. A directory of per-pair sentence files
(JSON lines ``{"ref": ..., "text": ...}``, one file per canonical pair)
serves offline runs and doubles as the on-disk cache layout; a client for
a public sentence-search web service covers live runs and is off unless
explicitly enabled.
"""

from __future__ import annotations

import json
import logging
import os
import re
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Protocol, Sequence

import requests

from bactrex.corpus import AnnotatedDocument
from bactrex.errors import BactrexError
from bactrex.pipeline import PipelineComponents, PipelineMode, extract
from bactrex.remote import Transport
from bactrex.transform import normalize_entity

__all__ = [
    "AssociationNetwork",
    "FetchedSentence",
    "ProbableSentence",
    "EdgeResult",
    "ValidationReport",
    "AuditSummary",
    "RateLimited",
    "IncompleteFlags",
    "SentenceSource",
    "LocalSentenceStore",
    "LitsenseClient",
    "CachedSource",
    "pair_slug",
    "load_network",
    "fetch_sentences",
    "validate_network",
    "precision_audit",
    "render_error_table",
]

logger = logging.getLogger(__name__)

DEFAULT_FETCH_CAP = 100


class RateLimited(BactrexError):
    """The sentence-search service refused further requests."""


class IncompleteFlags(BactrexError):
    """A precision audit is missing verification flags for some sentences."""


@dataclass(frozen=True)
class AssociationNetwork:
    """Unordered pairwise taxon associations to validate."""

    edges: tuple[tuple[str, str], ...]
    source_id: str = ""

    def __post_init__(self) -> None:
        for a, b in self.edges:
            if not a or not b:
                raise ValueError("edge names must be non-empty")
            if normalize_entity(a) == normalize_entity(b):
                raise ValueError(f"self-edge on {a!r}")


def load_network(path: str | Path) -> AssociationNetwork:
    """Read a network file: one edge per line, two tab-separated names,
    ``#`` comments, UTF-8."""
    edges = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split("\t")]
        if len(fields) != 2 or not all(fields):
            raise BactrexError(f"{path}:{lineno}: expected two tab-separated taxon names")
        edges.append((fields[0], fields[1]))
    return AssociationNetwork(tuple(edges), source_id=Path(path).stem)


@dataclass(frozen=True)
class FetchedSentence:
    text: str
    ref: str = ""


_SLUG_OK = re.compile(r"[^a-z0-9._-]+")


def pair_slug(a: str, b: str) -> str:
    """Filesystem-safe key for a canonical pair, used for store and cache files."""
    ka, kb = sorted((normalize_entity(a), normalize_entity(b)))
    clean = lambda key: _SLUG_OK.sub("-", key.replace(" ", "_"))
    return f"{clean(ka)}__{clean(kb)}"


class SentenceSource(Protocol):
    def fetch(self, taxon_a: str, taxon_b: str) -> list[FetchedSentence]: ...


def _read_sentence_file(path: Path) -> list[FetchedSentence]:
    sentences = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        record = json.loads(line)
        if "text" not in record:
            raise BactrexError(f"{path}:{lineno}: sentence record lacks a text field")
        sentences.append(FetchedSentence(text=record["text"], ref=record.get("ref", "")))
    return sentences


def _write_sentence_file(path: Path, sentences: Sequence[FetchedSentence]) -> None:
    # Write-then-rename keeps the file whole under concurrent writers.
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for s in sentences:
                fh.write(json.dumps({"ref": s.ref, "text": s.text}, ensure_ascii=False) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class LocalSentenceStore:
    """Offline source: one ``<pair_slug>.jsonl`` file per pair; missing
    files mean no co-mentions."""

    root: Path

    def fetch(self, taxon_a: str, taxon_b: str) -> list[FetchedSentence]:
        path = Path(self.root) / f"{pair_slug(taxon_a, taxon_b)}.jsonl"
        if not path.exists():
            return []
        return _read_sentence_file(path)


@dataclass
class LitsenseClient:
    """Client for a sentence-level semantic-search web service.

    The query sends both taxon names, each quoted. Responses are expected
    as a JSON list of records with ``text`` and an identifier field
    (``pmid`` or ``ref``). HTTP 429 honours Retry-After up to
    ``max_retries`` attempts before raising :class:`RateLimited`;
    ``min_interval`` seconds are kept between requests as a rate ceiling.
    """

    base_url: str
    timeout: float = 30.0
    max_retries: int = 3
    min_interval: float = 0.0
    _last_request: float = field(default=0.0, repr=False)

    def fetch(self, taxon_a: str, taxon_b: str) -> list[FetchedSentence]:
        query = f'"{taxon_a}" "{taxon_b}"'
        attempts = 0
        while True:
            wait = self._last_request + self.min_interval - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            self._last_request = time.monotonic()
            try:
                response = requests.get(
                    self.base_url, params={"query": query}, timeout=self.timeout
                )
            except requests.Timeout as exc:
                raise Transport(f"{self.base_url}: timed out") from exc
            except requests.RequestException as exc:
                raise Transport(f"{self.base_url}: {exc}") from exc
            if response.status_code == 429:
                attempts += 1
                if attempts > self.max_retries:
                    raise RateLimited(f"{self.base_url}: still throttled after {attempts} attempts")
                retry_after = min(float(response.headers.get("Retry-After", 1.0)), 60.0)
                logger.warning("rate limited for %r, retrying in %.1fs", query, retry_after)
                time.sleep(retry_after)
                continue
            if response.status_code != 200:
                raise Transport(f"{self.base_url}: HTTP {response.status_code}")
            try:
                records = response.json()
            except ValueError as exc:
                raise Transport(f"{self.base_url}: response is not JSON") from exc
            if not isinstance(records, list):
                raise Transport(f"{self.base_url}: expected a JSON list of sentence records")
            sentences = []
            for record in records:
                if not isinstance(record, dict) or "text" not in record:
                    continue
                ref = record.get("ref") or record.get("pmid") or ""
                sentences.append(FetchedSentence(text=str(record["text"]), ref=str(ref)))
            return sentences


@dataclass(frozen=True)
class CachedSource:
    """Disk cache in the local-store layout wrapped around another source."""

    cache_dir: Path
    inner: SentenceSource

    def fetch(self, taxon_a: str, taxon_b: str) -> list[FetchedSentence]:
        root = Path(self.cache_dir)
        root.mkdir(parents=True, exist_ok=True)
        path = root / f"{pair_slug(taxon_a, taxon_b)}.jsonl"
        if path.exists():
            return _read_sentence_file(path)
        sentences = self.inner.fetch(taxon_a, taxon_b)
        _write_sentence_file(path, sentences)
        return sentences


def _mentions_both(text: str, key_a: str, key_b: str) -> bool:
    folded = " ".join(text.casefold().split())
    return key_a in folded and key_b in folded


def fetch_sentences(
    taxon_a: str,
    taxon_b: str,
    source: SentenceSource,
    cap: int = DEFAULT_FETCH_CAP,
) -> list[FetchedSentence]:
    """Sentences co-mentioning both taxa, re-filtered and capped.

    Whatever the source returned, only sentences in which both normalized
    names actually appear are kept, at most ``cap`` of them. An empty
    result is not an error.
    """
    key_a, key_b = normalize_entity(taxon_a), normalize_entity(taxon_b)
    kept = [
        s for s in source.fetch(taxon_a, taxon_b) if _mentions_both(s.text, key_a, key_b)
    ]
    return kept[:cap]


@dataclass(frozen=True)
class ProbableSentence:
    """A sentence in which the pipeline predicted the queried pair."""

    text: str
    ref: str
    score: float
    verified: bool | None = None


@dataclass(frozen=True)
class EdgeResult:
    taxon_a: str
    taxon_b: str
    canonical: tuple[str, str]
    probable: tuple[ProbableSentence, ...]
    error: str | None = None


@dataclass(frozen=True)
class ValidationReport:
    source_id: str
    fetch_cap: int
    pair_matching: str  # protocol choice, recorded in every report
    entries: tuple[EdgeResult, ...]

    @property
    def edges_with_support(self) -> int:
        return sum(1 for entry in self.entries if entry.probable)

    @property
    def probable_total(self) -> int:
        return sum(len(entry.probable) for entry in self.entries)

    def to_dict(self) -> dict:
        return {
            "network_source": self.source_id,
            "fetch_cap": self.fetch_cap,
            "pair_matching": self.pair_matching,
            "edges": [
                {
                    "pair": [entry.taxon_a, entry.taxon_b],
                    "canonical": list(entry.canonical),
                    "probable": [
                        {
                            "text": p.text,
                            "ref": p.ref,
                            "score": p.score,
                            "verified": p.verified,
                        }
                        for p in entry.probable
                    ],
                    "error": entry.error,
                }
                for entry in self.entries
            ],
            "summary": {
                "edges_total": len(self.entries),
                "edges_with_support": self.edges_with_support,
                "probable_sentences": self.probable_total,
                "recall": "unmeasured",
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)


def validate_network(
    network: AssociationNetwork,
    components: PipelineComponents,
    source: SentenceSource,
    fetch_cap: int = DEFAULT_FETCH_CAP,
) -> ValidationReport:
    """Run the pipeline over fetched sentences for every edge.

    Each fetched sentence goes through full extraction (``SS_NER_IE``);
    predictions whose canonical pair matches the edge become probable
    sentences. Per-edge failures are recorded on the entry and the run
    continues.
    """
    entries = []
    for taxon_a, taxon_b in network.edges:
        key = tuple(sorted((normalize_entity(taxon_a), normalize_entity(taxon_b))))
        probable: list[ProbableSentence] = []
        error = None
        try:
            sentences = fetch_sentences(taxon_a, taxon_b, source, cap=fetch_cap)
            for idx, fetched in enumerate(sentences):
                doc = AnnotatedDocument(
                    fetched.text, (), (), doc_id=f"{pair_slug(taxon_a, taxon_b)}#{idx}"
                )
                for pred in extract(doc, PipelineMode.SS_NER_IE, components):
                    if pred.pair == key:
                        probable.append(
                            ProbableSentence(fetched.text, fetched.ref, pred.score)
                        )
        except BactrexError as exc:
            logger.error("edge (%s, %s) failed: %s", taxon_a, taxon_b, exc)
            error = str(exc)
        entries.append(EdgeResult(taxon_a, taxon_b, key, tuple(probable), error))
    return ValidationReport(
        source_id=network.source_id,
        fetch_cap=fetch_cap,
        pair_matching="normalized-entity-keys",
        entries=tuple(entries),
    )


@dataclass(frozen=True)
class AuditSummary:
    """Outcome of manually verifying every probable sentence."""

    total: int
    correct: int
    errors: tuple[tuple[str, str, str], ...]  # (sentence, entity 1, entity 2)

    @property
    def fraction_correct(self) -> float:
        return self.correct / self.total if self.total else 0.0


def precision_audit(
    report: ValidationReport, flags: Mapping[tuple[str, int], bool]
) -> AuditSummary:
    """Fold manual correct/incorrect flags into a precision summary.

    ``flags`` maps ``(pair_slug, sentence index within the edge)`` to the
    verdict. Every probable sentence needs a flag; recall stays
    unmeasured by design.
    """
    total = correct = 0
    errors = []
    missing = []
    for entry in report.entries:
        slug = pair_slug(entry.taxon_a, entry.taxon_b)
        for idx, sentence in enumerate(entry.probable):
            verdict = flags.get((slug, idx))
            if verdict is None:
                missing.append((slug, idx))
                continue
            total += 1
            if verdict:
                correct += 1
            else:
                errors.append((sentence.text, entry.taxon_a, entry.taxon_b))
    if missing:
        raise IncompleteFlags(f"missing verification flags for {missing}")
    return AuditSummary(total=total, correct=correct, errors=tuple(errors))


def render_error_table(audit: AuditSummary) -> str:
    """False-positive examples, one row per error: sentence and the pair."""
    lines = ["  ".join(["#", "Sentence", "Entity 1", "Entity 2"])]
    for i, (sentence, a, b) in enumerate(audit.errors, start=1):
        lines.append("  ".join([str(i), sentence, a, b]))
    return "\n".join(lines)

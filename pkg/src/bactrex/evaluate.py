"""Splitting, scoring and multi-run aggregation.

Precision, recall and F1 follow the usual confusion-count definitions
with an explicit zero convention: a degenerate denominator yields 0.0 and
sets the ``degenerate`` flag instead of raising. Repeated runs are
summarized as mean and sample (n-1) standard deviation per metric and
rendered to two decimals.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Collection, Iterable, Mapping, Protocol, Sequence
import random

from bactrex.corpus import Corpus, CorpusKind
from bactrex.errors import BactrexError

__all__ = [
    "Metrics",
    "RunAggregate",
    "LengthMismatch",
    "TooFewRuns",
    "SplitTooSmall",
    "split",
    "evaluate_instances",
    "evaluate_pairs",
    "aggregate",
    "render_metric_table",
    "render_aggregate_table",
]


class LengthMismatch(BactrexError):
    """Prediction and gold sequences differ in length."""


class TooFewRuns(BactrexError):
    """Aggregation needs at least two runs to report a standard deviation."""


class SplitTooSmall(BactrexError):
    """The corpus cannot populate both sides of a split."""


@dataclass(frozen=True)
class Metrics:
    """Confusion counts with derived precision/recall/F1.

    ``degenerate`` is set when any denominator was zero and the zero
    convention kicked in.
    """

    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    degenerate: bool = False

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "Metrics":
        degenerate = False
        if tp + fp == 0:
            precision, degenerate = 0.0, True
        else:
            precision = tp / (tp + fp)
        if tp + fn == 0:
            recall, degenerate = 0.0, True
        else:
            recall = tp / (tp + fn)
        if precision + recall == 0.0:
            f1, degenerate = 0.0, True
        else:
            f1 = 2 * precision * recall / (precision + recall)
        return cls(tp, fp, fn, precision, recall, f1, degenerate)

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class RunAggregate:
    """Mean and sample standard deviation of metrics over repeated runs."""

    precision_mean: float
    precision_std: float
    recall_mean: float
    recall_std: float
    f1_mean: float
    f1_std: float
    run_count: int

    def to_dict(self) -> dict:
        return dict(vars(self))


def split(
    corpus: Corpus, train_fraction: float = 0.85, seed: int = 0
) -> tuple[Corpus, Corpus]:
    """Random sentence-granularity split, deterministic given the seed.

    The training side takes ``ceil(train_fraction * N)`` sentences,
    clamped so the test side is never empty. All instances derived from
    one sentence land on one side by construction.
    """
    if corpus.kind is not CorpusKind.SENTENCE:
        raise ValueError("splitting is defined on sentence-level corpora")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train fraction must be inside (0, 1), got {train_fraction}")
    n = len(corpus.sentences)
    if n < 2:
        raise SplitTooSmall(f"need at least 2 sentences to split, got {n}")
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    train_size = min(math.ceil(train_fraction * n), n - 1)
    train_idx = sorted(indices[:train_size])
    test_idx = sorted(indices[train_size:])
    pick = lambda idx: Corpus(
        kind=CorpusKind.SENTENCE, sentences=tuple(corpus.sentences[i] for i in idx)
    )
    return pick(train_idx), pick(test_idx)


def evaluate_instances(predictions: Sequence[bool], gold: Sequence[bool]) -> Metrics:
    """Positional instance-level metrics."""
    if len(predictions) != len(gold):
        raise LengthMismatch(f"{len(predictions)} predictions vs {len(gold)} gold labels")
    tp = sum(1 for p, g in zip(predictions, gold) if p and g)
    fp = sum(1 for p, g in zip(predictions, gold) if p and not g)
    fn = sum(1 for p, g in zip(predictions, gold) if not p and g)
    return Metrics.from_counts(tp, fp, fn)


class _HasPairAndDoc(Protocol):
    pair: tuple[str, str]

    @property
    def doc_id(self) -> str: ...


def evaluate_pairs(
    predicted: Iterable[_HasPairAndDoc],
    gold: Mapping[str, Collection[tuple[str, str]]],
) -> Metrics:
    """Set-based metrics keyed by (document id, canonical pair).

    ``gold`` maps each document id to its gold pairs; documents absent
    from ``gold`` count every prediction as a false positive.
    """
    predicted_keys: set[tuple[str, tuple[str, str]]] = set()
    for pred in predicted:
        predicted_keys.add((pred.doc_id, tuple(pred.pair)))
    gold_keys = {
        (doc_id, tuple(pair)) for doc_id, pairs in gold.items() for pair in pairs
    }
    tp = len(predicted_keys & gold_keys)
    fp = len(predicted_keys - gold_keys)
    fn = len(gold_keys - predicted_keys)
    return Metrics.from_counts(tp, fp, fn)


def aggregate(runs: Sequence[Metrics]) -> RunAggregate:
    """Mean and sample standard deviation per metric over >= 2 runs."""
    if len(runs) < 2:
        raise TooFewRuns(f"need at least 2 runs, got {len(runs)}")
    def stats(values: list[float]) -> tuple[float, float]:
        return statistics.mean(values), statistics.stdev(values)
    p_mean, p_std = stats([m.precision for m in runs])
    r_mean, r_std = stats([m.recall for m in runs])
    f_mean, f_std = stats([m.f1 for m in runs])
    return RunAggregate(p_mean, p_std, r_mean, r_std, f_mean, f_std, len(runs))


def _render_rows(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [
        max(len(str(cell)) for cell in column)
        for column in zip(header, *rows)
    ]
    lines = []
    for row in [header, *rows]:
        lines.append("  ".join(str(cell).ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def render_metric_table(rows: Mapping[str, Metrics]) -> str:
    """Aligned table with one labelled row per configuration."""
    body = [
        [label, f"{m.precision:.2f}", f"{m.recall:.2f}", f"{m.f1:.2f}"]
        for label, m in rows.items()
    ]
    return _render_rows(["", "Precision", "Recall", "F1"], body)


def render_aggregate_table(columns: Mapping[str, RunAggregate]) -> str:
    """Aligned table with metric rows and one mean +/- std column per model."""
    header = ["", *columns.keys()]
    cell = lambda mean, std: f"{mean:.2f} ± {std:.2f}"
    body = [
        ["Precision", *[cell(a.precision_mean, a.precision_std) for a in columns.values()]],
        ["Recall", *[cell(a.recall_mean, a.recall_std) for a in columns.values()]],
        ["F1", *[cell(a.f1_mean, a.f1_std) for a in columns.values()]],
    ]
    return _render_rows(header, body)

"""Instance records and word-level tokenization.

Records arrive in the shared JSON-lines format: one object per line with
at least ``tagged_text`` (string containing both ``@BAC1$``/``@BAC2$``
markers) and ``label`` (0 or 1). The vocabulary is built from the first
training stage and frozen afterwards; unseen tokens map to ``[UNK]``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

MARKER_A = "@BAC1$"
MARKER_B = "@BAC2$"

PAD, UNK, CLS, EOS = "[PAD]", "[UNK]", "[CLS]", "[EOS]"
_SPECIALS = (PAD, UNK, CLS, EOS, MARKER_A, MARKER_B)

_TOKEN = re.compile(r"@BAC[12]\$|[A-Za-z0-9'’-]+|[^\sA-Za-z0-9]")


class RecordError(ValueError):
    """An instance record file does not follow the agreed format."""


@dataclass(frozen=True)
class Record:
    tagged_text: str
    label: int


def read_records(path: str | Path) -> list[Record]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                payload = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(payload, dict) or "tagged_text" not in payload or "label" not in payload:
                raise RecordError(f"{path}:{lineno}: record needs tagged_text and label fields")
            if payload["label"] not in (0, 1):
                raise RecordError(f"{path}:{lineno}: label must be 0 or 1")
            records.append(Record(str(payload["tagged_text"]), int(payload["label"])))
    return records


def load_corpus(paths: Sequence[str | Path], mixing: str = "concat") -> list[Record]:
    """Read one or more record files, concatenated or interleaved."""
    parts = [read_records(p) for p in paths]
    if mixing == "concat" or len(parts) <= 1:
        return [record for part in parts for record in part]
    mixed: list[Record] = []
    for i in range(max(len(part) for part in parts)):
        for part in parts:
            if i < len(part):
                mixed.append(part[i])
    return mixed


def tokenize(text: str) -> list[str]:
    return [
        tok if tok in (MARKER_A, MARKER_B) else tok.lower()
        for tok in _TOKEN.findall(text)
    ]


def has_markers(text: str) -> bool:
    return MARKER_A in text and MARKER_B in text


@dataclass(frozen=True)
class Vocab:
    index: dict[str, int]

    @classmethod
    def build(cls, texts: Iterable[str]) -> "Vocab":
        index = {token: i for i, token in enumerate(_SPECIALS)}
        for text in texts:
            for token in tokenize(text):
                if token not in index:
                    index[token] = len(index)
        return cls(index)

    def __len__(self) -> int:
        return len(self.index)

    def encode(self, text: str, max_len: int, style: str) -> list[int]:
        """Token ids for one instance.

        ``style="cls"`` prepends the pooled classification token;
        ``style="eos"`` appends the end token whose embedding is pooled.
        """
        unk = self.index[UNK]
        ids = [self.index.get(tok, unk) for tok in tokenize(text)]
        if style == "cls":
            ids = [self.index[CLS]] + ids[: max_len - 1]
        elif style == "eos":
            ids = ids[: max_len - 1] + [self.index[EOS]]
        else:
            raise ValueError(f"unknown encoding style {style!r}")
        return ids

    def to_dict(self) -> dict[str, int]:
        return dict(self.index)

    @classmethod
    def from_dict(cls, payload: dict[str, int]) -> "Vocab":
        return cls({str(k): int(v) for k, v in payload.items()})

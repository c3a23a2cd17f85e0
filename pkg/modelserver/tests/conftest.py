import json
import random
from pathlib import Path

import pytest

from modelserver.plan import Hyperparameters

# Interaction-style cue verbs vs. neutral co-occurrence verbs; the two
# template families share everything else, so the verb carries the label.
CUES = (
    "inhibits", "suppresses", "promotes", "stimulates", "antagonizes",
    "kills", "outcompetes", "enhances", "displaces", "degrades", "lyses",
    "protects",
)
NEUTRAL = (
    "accompanies", "precedes", "follows", "resembles", "neighbors",
    "parallels", "matches", "mirrors", "joins", "flanks", "borders",
    "tracks",
)
FILLER = ("in", "the", "sample", "under", "test", "conditions", "during", "growth")


def make_records(rng: random.Random, count: int, cues, neutral) -> list[dict]:
    records = []
    for i in range(count):
        related = i % 2 == 0
        verb = rng.choice(cues if related else neutral)
        padding = " ".join(rng.choice(FILLER) for _ in range(rng.randint(0, 4)))
        text = f"@BAC1$ {verb} @BAC2$ {padding}".strip() + "."
        records.append(
            {
                "tagged_text": text,
                "label": int(related),
                "entity_a": "taxon a",
                "entity_b": "taxon b",
                "provenance": f"synth{i}",
            }
        )
    return records


def write_records(path: Path, records: list[dict]) -> Path:
    path.write_text(
        "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records),
        encoding="utf-8",
    )
    return path


@pytest.fixture()
def record_family(tmp_path):
    """(pretrain, finetune, eval) record files with shared cue structure.

    The fine-tuning file covers only a quarter of the cue and neutral
    verbs; the evaluation file spans all of them.
    """
    rng = random.Random(99)
    pretrain = write_records(tmp_path / "pretrain.jsonl", make_records(rng, 240, CUES, NEUTRAL))
    finetune = write_records(tmp_path / "finetune.jsonl", make_records(rng, 48, CUES[:3], NEUTRAL[:3]))
    evaluation = write_records(tmp_path / "eval.jsonl", make_records(rng, 96, CUES, NEUTRAL))
    return pretrain, finetune, evaluation


def fast_hp(**overrides) -> Hyperparameters:
    defaults = dict(
        learning_rate=1e-3,
        batch_size=16,
        max_epochs=20,
        patience=3,
        embed_dim=32,
        layers=2,
        heads=2,
        ffn_dim=64,
        max_len=32,
        seed=0,
    )
    defaults.update(overrides)
    return Hyperparameters(**defaults)

"""Training loop, early stopping, regimens, and the served model.

Training minimizes binary cross-entropy on the sigmoid output with Adam,
holding out a validation fraction of the training records for early
stopping: when validation loss has not improved for ``patience`` epochs,
training stops and the best-validation-loss weights are restored. The
explicit regimen runs the loop twice, first on the transfer records and
then on the fine-tuning records, with the vocabulary frozen after the
first stage.
"""

from __future__ import annotations

import copy
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import torch
from torch import nn

from modelserver.data import Record, Vocab, has_markers, load_corpus
from modelserver.encoders import ScoringModel, build_encoder
from modelserver.plan import Hyperparameters, TrainingPlan


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; aborted with diagnostics."""


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    val_loss: float

    def to_dict(self) -> dict:
        return dict(vars(self))


@dataclass
class StageLog:
    stage: str
    epochs: list[EpochLog] = field(default_factory=list)
    best_epoch: int = -1
    best_val_loss: float = math.inf
    stopped_epoch: int = -1

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "best_epoch": self.best_epoch,
            "best_val_loss": self.best_val_loss,
            "stopped_epoch": self.stopped_epoch,
            "epochs": [entry.to_dict() for entry in self.epochs],
        }


def _batches(
    records: Sequence[Record], vocab: Vocab, hp: Hyperparameters, style: str,
    shuffle: bool, rng: random.Random,
):
    order = list(range(len(records)))
    if shuffle:
        rng.shuffle(order)
    for start in range(0, len(order), hp.batch_size):
        chunk = [records[i] for i in order[start : start + hp.batch_size]]
        encoded = [vocab.encode(r.tagged_text, hp.max_len, style) for r in chunk]
        lengths = torch.tensor([len(ids) for ids in encoded], dtype=torch.long)
        width = int(lengths.max())
        ids = torch.zeros(len(encoded), width, dtype=torch.long)
        for row, seq in enumerate(encoded):
            ids[row, : len(seq)] = torch.tensor(seq, dtype=torch.long)
        labels = torch.tensor([float(r.label) for r in chunk])
        yield ids, lengths, labels


def _epoch_loss(model, batches, loss_fn, optimizer=None) -> float:
    total, count = 0.0, 0
    for ids, lengths, labels in batches:
        if optimizer is not None:
            optimizer.zero_grad()
            logits = model(ids, lengths)
            loss = loss_fn(logits, labels)
            loss.backward()
            optimizer.step()
        else:
            with torch.no_grad():
                logits = model(ids, lengths)
                loss = loss_fn(logits, labels)
        total += loss.item() * len(labels)
        count += len(labels)
    return total / max(count, 1)


def run_stage(
    model: ScoringModel,
    records: Sequence[Record],
    vocab: Vocab,
    hp: Hyperparameters,
    stage: str,
    seed: int,
) -> StageLog:
    """Train until early stopping and restore the best-validation weights."""
    if len(records) < 2:
        raise ValueError(f"stage {stage!r} needs at least 2 records, got {len(records)}")
    rng = random.Random(seed)
    order = list(range(len(records)))
    rng.shuffle(order)
    val_size = max(1, round(hp.validation_fraction * len(records)))
    val_size = min(val_size, len(records) - 1)
    val = [records[i] for i in order[:val_size]]
    train_part = [records[i] for i in order[val_size:]]

    style = model.encoder.encoding_style
    loss_fn = nn.BCEWithLogitsLoss()
    optimizer = torch.optim.Adam(model.parameters(), lr=hp.learning_rate)
    log = StageLog(stage=stage)
    best_state = copy.deepcopy(model.state_dict())
    since_best = 0
    for epoch in range(hp.max_epochs):
        model.train()
        train_loss = _epoch_loss(
            model, _batches(train_part, vocab, hp, style, True, rng), loss_fn, optimizer
        )
        model.eval()
        val_loss = _epoch_loss(
            model, _batches(val, vocab, hp, style, False, rng), loss_fn
        )
        if not (math.isfinite(train_loss) and math.isfinite(val_loss)):
            raise TrainingDiverged(
                f"stage {stage!r} diverged at epoch {epoch}: "
                f"train_loss={train_loss}, val_loss={val_loss}, lr={hp.learning_rate}"
            )
        log.epochs.append(EpochLog(epoch, train_loss, val_loss))
        if val_loss < log.best_val_loss - hp.min_delta:
            log.best_val_loss = val_loss
            log.best_epoch = epoch
            best_state = copy.deepcopy(model.state_dict())
            since_best = 0
        else:
            if val_loss < log.best_val_loss:
                # still the best weights, just not enough to reset patience
                log.best_val_loss = val_loss
                log.best_epoch = epoch
                best_state = copy.deepcopy(model.state_dict())
            since_best += 1
            if since_best >= hp.patience:
                break
    log.stopped_epoch = log.epochs[-1].epoch
    model.load_state_dict(best_state)
    return log


@dataclass
class ServedModel:
    """A trained scorer plus everything needed to serve and audit it."""

    identifier: str
    regimen: str
    head_description: str
    model: ScoringModel
    vocab: Vocab
    plan: TrainingPlan
    logs: list[StageLog]

    def score_batch(self, texts: Sequence[str]) -> tuple[list[float], list[dict]]:
        """Scores in [0, 1], one per input, preserving order.

        Items without both pair markers get a placeholder score of 0.0 and
        an entry in the returned error list. Batches are padded to the
        model's fixed maximum length, so an instance scores identically
        whatever batch it arrives in.
        """
        hp = self.plan.hyperparameters
        style = self.model.encoder.encoding_style
        scores = [0.0] * len(texts)
        errors = []
        valid: list[tuple[int, str]] = []
        for i, text in enumerate(texts):
            if isinstance(text, str) and has_markers(text):
                valid.append((i, text))
            else:
                errors.append({"index": i, "error": "missing_markers"})
        self.model.eval()
        with torch.no_grad():
            for start in range(0, len(valid), hp.batch_size):
                chunk = valid[start : start + hp.batch_size]
                encoded = [self.vocab.encode(t, hp.max_len, style) for _, t in chunk]
                lengths = torch.tensor([len(ids) for ids in encoded], dtype=torch.long)
                ids = torch.zeros(len(encoded), hp.max_len, dtype=torch.long)
                for row, seq in enumerate(encoded):
                    ids[row, : len(seq)] = torch.tensor(seq, dtype=torch.long)
                probs = torch.sigmoid(self.model(ids, lengths))
                for (i, _), value in zip(chunk, probs.tolist()):
                    value = float(value)
                    if not math.isfinite(value):
                        value = 0.0
                    scores[i] = min(1.0, max(0.0, value))
        return scores, errors

    def save(self, directory: str | Path) -> None:
        """Checkpoint layout: weights.pt, vocab.json, plan.json, metadata.json."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        torch.save(self.model.state_dict(), directory / "weights.pt")
        (directory / "vocab.json").write_text(
            json.dumps(self.vocab.to_dict(), ensure_ascii=False), encoding="utf-8"
        )
        (directory / "plan.json").write_text(
            json.dumps(self.plan.to_dict(), indent=2), encoding="utf-8"
        )
        (directory / "metadata.json").write_text(
            json.dumps(
                {
                    "identifier": self.identifier,
                    "regimen": self.regimen,
                    "head": self.head_description,
                    "training_log": [log.to_dict() for log in self.logs],
                },
                indent=2,
            ),
            encoding="utf-8",
        )

    @classmethod
    def load(cls, directory: str | Path) -> "ServedModel":
        directory = Path(directory)
        plan_payload = json.loads((directory / "plan.json").read_text(encoding="utf-8"))
        plan = TrainingPlan(
            regimen=plan_payload["regimen"],
            encoder=plan_payload["encoder"],
            pretrain_records=tuple(plan_payload.get("pretrain_records", ())),
            finetune_records=plan_payload.get("finetune_records"),
            mixing=plan_payload.get("mixing", "concat"),
            hyperparameters=Hyperparameters(**plan_payload.get("hyperparameters", {})),
        )
        vocab = Vocab.from_dict(json.loads((directory / "vocab.json").read_text(encoding="utf-8")))
        metadata = json.loads((directory / "metadata.json").read_text(encoding="utf-8"))
        encoder = build_encoder(plan.encoder, len(vocab), plan.hyperparameters)
        model = ScoringModel(encoder)
        model.load_state_dict(torch.load(directory / "weights.pt", weights_only=True))
        return cls(
            identifier=metadata["identifier"],
            regimen=metadata["regimen"],
            head_description=metadata["head"],
            model=model,
            vocab=vocab,
            plan=plan,
            logs=[],
        )


def train(plan: TrainingPlan) -> ServedModel:
    """Run the plan's regimen and return the best checkpointed model.

    The vocabulary is built from the first training stage's records and
    frozen afterwards; later stages map unseen tokens to ``[UNK]``.
    """
    hp = plan.hyperparameters
    torch.manual_seed(hp.seed)
    stages: list[tuple[str, list[Record]]] = []
    if plan.regimen in ("explicit", "non_finetuned"):
        stages.append(("pretrain", load_corpus(plan.pretrain_records, plan.mixing)))
    if plan.regimen in ("explicit", "implicit"):
        stages.append(("finetune", load_corpus([plan.finetune_records])))

    vocab = Vocab.build(record.tagged_text for record in stages[0][1])
    encoder = build_encoder(plan.encoder, len(vocab), hp)
    model = ScoringModel(encoder)
    logs = []
    for index, (stage, records) in enumerate(stages):
        logs.append(run_stage(model, records, vocab, hp, stage, seed=hp.seed + index))
    return ServedModel(
        identifier=f"{plan.encoder}/{plan.regimen}",
        regimen=plan.regimen,
        head_description=ScoringModel.head_description,
        model=model,
        vocab=vocab,
        plan=plan,
        logs=logs,
    )


def evaluate(served: ServedModel, records: Sequence[Record], threshold: float = 0.5) -> dict:
    """Precision/recall/F1 of the served model on held-out records."""
    scores, _ = served.score_batch([r.tagged_text for r in records])
    tp = fp = fn = 0
    for score, record in zip(scores, records):
        predicted = score >= threshold
        if predicted and record.label:
            tp += 1
        elif predicted and not record.label:
            fp += 1
        elif not predicted and record.label:
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1, "tp": tp, "fp": fp, "fn": fn}

"""Training plans: regimen, corpora, encoder choice, hyperparameters.

Three regimens are supported:

* ``explicit``      -- train on the transfer (pretraining) records, then
  fine-tune on the target records; needs both corpora.
* ``implicit``      -- fine-tune on the target records only.
* ``non_finetuned`` -- train on the transfer records only and serve that
  model as-is.

Hyperparameter defaults live here, never inside the training loop, and
the resolved values are written into every checkpoint.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

REGIMENS = ("implicit", "explicit", "non_finetuned")
ENCODERS = ("bidirectional-encoder", "generative-decoder")
MIXING = ("concat", "interleave")


class PlanError(ValueError):
    """A plan file or plan object is invalid."""


@dataclass(frozen=True)
class Hyperparameters:
    learning_rate: float = 1e-3
    batch_size: int = 16
    max_epochs: int = 30
    patience: int = 3
    min_delta: float = 0.0  # improvement smaller than this does not reset patience
    validation_fraction: float = 0.1
    embed_dim: int = 32
    layers: int = 2
    heads: int = 2
    ffn_dim: int = 64
    max_len: int = 48
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise PlanError("learning_rate must be positive")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 0:
            raise PlanError("batch_size/max_epochs must be >= 1 and patience >= 0")
        if self.min_delta < 0:
            raise PlanError("min_delta must be non-negative")
        if not 0.0 < self.validation_fraction < 1.0:
            raise PlanError("validation_fraction must be inside (0, 1)")
        if self.embed_dim % self.heads:
            raise PlanError("embed_dim must be divisible by heads")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class TrainingPlan:
    regimen: str
    encoder: str = "bidirectional-encoder"
    pretrain_records: tuple[str, ...] = ()
    finetune_records: str | None = None
    mixing: str = "concat"
    hyperparameters: Hyperparameters = field(default_factory=Hyperparameters)

    def __post_init__(self) -> None:
        if self.regimen not in REGIMENS:
            raise PlanError(f"unknown regimen {self.regimen!r}; expected one of {REGIMENS}")
        if self.encoder not in ENCODERS:
            raise PlanError(f"unknown encoder {self.encoder!r}; expected one of {ENCODERS}")
        if self.mixing not in MIXING:
            raise PlanError(f"unknown mixing {self.mixing!r}; expected one of {MIXING}")
        needs_pretrain = self.regimen in ("explicit", "non_finetuned")
        needs_finetune = self.regimen in ("explicit", "implicit")
        if needs_pretrain and not self.pretrain_records:
            raise PlanError(f"regimen {self.regimen!r} requires pretrain records")
        if not needs_pretrain and self.pretrain_records:
            raise PlanError(f"regimen {self.regimen!r} must not carry pretrain records")
        if needs_finetune and not self.finetune_records:
            raise PlanError(f"regimen {self.regimen!r} requires finetune records")
        if not needs_finetune and self.finetune_records:
            raise PlanError(f"regimen {self.regimen!r} must not carry finetune records")

    def to_dict(self) -> dict:
        return {
            "regimen": self.regimen,
            "encoder": self.encoder,
            "pretrain_records": list(self.pretrain_records),
            "finetune_records": self.finetune_records,
            "mixing": self.mixing,
            "hyperparameters": self.hyperparameters.to_dict(),
        }


_PLAN_KEYS = {"regimen", "encoder", "pretrain_records", "finetune_records", "mixing", "hyperparameters"}


def load_plan(path: str | Path) -> TrainingPlan:
    """Read a JSON plan file; relative record paths resolve against it."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PlanError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise PlanError(f"{path}: plan must be a JSON object")
    unknown = set(payload) - _PLAN_KEYS
    if unknown:
        raise PlanError(f"{path}: unknown plan keys {sorted(unknown)}")
    hp_payload = payload.get("hyperparameters", {})
    hp_unknown = set(hp_payload) - {f.name for f in dataclasses.fields(Hyperparameters)}
    if hp_unknown:
        raise PlanError(f"{path}: unknown hyperparameters {sorted(hp_unknown)}")

    def resolve(value: str) -> str:
        p = Path(value)
        return str(p if p.is_absolute() else path.parent / p)

    pretrain = payload.get("pretrain_records", ())
    if isinstance(pretrain, str):
        pretrain = (pretrain,)
    finetune = payload.get("finetune_records")
    return TrainingPlan(
        regimen=payload.get("regimen", ""),
        encoder=payload.get("encoder", "bidirectional-encoder"),
        pretrain_records=tuple(resolve(p) for p in pretrain),
        finetune_records=resolve(finetune) if finetune else None,
        mixing=payload.get("mixing", "concat"),
        hyperparameters=Hyperparameters(**hp_payload),
    )

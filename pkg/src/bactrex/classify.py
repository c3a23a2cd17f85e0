"""Interaction scoring for marker-tagged instances.

Two backends sit behind one ``score_batch`` interface: a lexical logistic
baseline that runs anywhere with no model weights to download, and a
client for a remote neural scorer speaking the shared wire protocol. The
baseline featurizes the token window around the closest ``@BAC1$`` /
``@BAC2$`` marker pair: interaction-cue hits, the capped marker distance,
and a negation flag. Scores are probabilities in [0, 1]; a prediction is
positive when the score reaches the configured threshold (``>=``).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from bactrex.errors import BactrexError
from bactrex.remote import DEFAULT_TIMEOUT, ProtocolViolation, post_json
from bactrex.transform import MARKER_A, MARKER_B, LabeledInstance

__all__ = [
    "MissingMarkers",
    "DegenerateTraining",
    "BaselineModel",
    "BaselineClassifier",
    "RemoteClassifier",
    "Classifier",
    "ClassifierConfig",
    "default_baseline",
    "fit_baseline",
    "loss_and_grad",
    "score",
    "classify",
    "make_classifier",
    "save_model",
    "load_model",
]


class MissingMarkers(BactrexError):
    """A tagged text does not contain both pair markers."""


class DegenerateTraining(BactrexError):
    """The training set contains only one class."""


_TOKEN = re.compile(r"@BAC[12]\$|[A-Za-z0-9'’-]+")

DEFAULT_WINDOW = 10
DEFAULT_NEGATION_CUES = ("not", "no", "never", "without", "cannot")

# Hand-set cue weights for the ready-to-run model; fit_baseline learns its
# own from data.
_DEFAULT_CUE_WEIGHT = 4.0
_DEFAULT_CUE_TERMS = (
    "inhibit", "inhibits", "inhibited", "inhibition", "inhibitory",
    "suppress", "suppresses", "suppressed", "suppression",
    "promote", "promotes", "promoted", "promotion",
    "stimulate", "stimulates", "stimulated", "stimulation",
    "enhance", "enhances", "enhanced",
    "antagonize", "antagonizes", "antagonized", "antagonistic", "antagonism",
    "synergistic", "synergy", "synergism",
    "kill", "kills", "killed", "killing",
    "outcompete", "outcompetes", "outcompeted",
    "compete", "competes", "competed", "competition",
    "co-aggregate", "coaggregates", "co-aggregates", "coaggregation",
    "cross-feed", "cross-feeding", "crossfeeding",
    "interact", "interacts", "interacted", "interaction",
    "reduce", "reduces", "reduced",
    "degrade", "degrades", "degraded",
    "lyse", "lyses", "lysed",
    "displace", "displaces", "displaced",
    "protect", "protects", "protected",
)


def tokenize(tagged_text: str) -> list[str]:
    """Marker-preserving word tokens; non-marker tokens are lowercased."""
    return [
        tok if tok in (MARKER_A, MARKER_B) else tok.lower()
        for tok in _TOKEN.findall(tagged_text)
    ]


def featurize(
    tagged_text: str,
    window: int = DEFAULT_WINDOW,
    negation_cues: Sequence[str] = DEFAULT_NEGATION_CUES,
) -> tuple[set[str], float, float]:
    """(region token set, normalized marker distance, negation flag).

    The region is the token stretch between the closest ``@BAC1$`` /
    ``@BAC2$`` occurrence pair, widened by ``window`` tokens on each side;
    markers themselves are excluded. Distance is the token gap between the
    closest pair, capped at ``window`` and scaled to [0, 1].
    """
    tokens = tokenize(tagged_text)
    pos_a = [i for i, tok in enumerate(tokens) if tok == MARKER_A]
    pos_b = [i for i, tok in enumerate(tokens) if tok == MARKER_B]
    if not pos_a or not pos_b:
        missing = MARKER_A if not pos_a else MARKER_B
        raise MissingMarkers(f"tagged text lacks {missing}: {tagged_text!r}")
    lo, hi = min(
        ((min(a, b), max(a, b)) for a in pos_a for b in pos_b),
        key=lambda pair: pair[1] - pair[0],
    )
    region = {
        tok
        for tok in tokens[max(0, lo - window) : hi + 1 + window]
        if tok not in (MARKER_A, MARKER_B)
    }
    distance = min(hi - lo, window) / window
    negation = 1.0 if region.intersection(negation_cues) else 0.0
    return region, distance, negation


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


@dataclass(frozen=True)
class BaselineModel:
    """Logistic model over cue, distance and negation features."""

    lexicon: dict[str, float]
    bias: float
    window: int = DEFAULT_WINDOW
    distance_weight: float = -1.0
    negation_weight: float = -1.5
    negation_cues: tuple[str, ...] = DEFAULT_NEGATION_CUES

    def __post_init__(self) -> None:
        if not self.lexicon:
            raise ValueError("lexicon must be non-empty")
        values = [self.bias, self.distance_weight, self.negation_weight, *self.lexicon.values()]
        if not all(math.isfinite(v) for v in values):
            raise ValueError("model weights must be finite")

    def score_text(self, tagged_text: str) -> float:
        region, distance, negation = featurize(tagged_text, self.window, self.negation_cues)
        z = self.bias + self.distance_weight * distance + self.negation_weight * negation
        z += sum(weight for term, weight in self.lexicon.items() if term in region)
        return _sigmoid(z)


def default_baseline() -> BaselineModel:
    """Ready-to-run model with the hand-curated interaction-cue lexicon."""
    return BaselineModel(
        lexicon={term: _DEFAULT_CUE_WEIGHT for term in _DEFAULT_CUE_TERMS},
        bias=-2.0,
    )


def loss_and_grad(
    params: np.ndarray, features: np.ndarray, labels: np.ndarray, l2: float = 0.0
) -> tuple[float, np.ndarray]:
    """Mean logistic cross-entropy and its analytic gradient.

    ``params`` is the weight vector with the bias as its last element;
    the L2 penalty excludes the bias.
    """
    weights, bias = params[:-1], params[-1]
    z = features @ weights + bias
    # log(1 + e^-|z|) + max(z, 0) - z*y, stable for large |z|
    loss = float(np.mean(np.logaddexp(0.0, -np.abs(z)) + np.maximum(z, 0.0) - z * labels))
    loss += 0.5 * l2 * float(weights @ weights)
    prob = 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
    residual = (prob - labels) / len(labels)
    grad = np.concatenate([features.T @ residual + l2 * weights, [residual.sum()]])
    return loss, grad


def fit_baseline(
    train: Sequence[LabeledInstance],
    seed: int = 0,
    window: int = DEFAULT_WINDOW,
    learning_rate: float = 0.5,
    iterations: int = 400,
    l2: float = 1e-4,
) -> BaselineModel:
    """Fit the logistic baseline by full-batch gradient descent.

    Deterministic given the seed (which drives only the tiny random
    initialization). Raises :class:`DegenerateTraining` when the training
    set is single-class.
    """
    labels = np.array([float(inst.label) for inst in train])
    if len(labels) == 0 or labels.min() == labels.max():
        raise DegenerateTraining("training set must contain both classes")
    featurized = [featurize(inst.tagged_text, window) for inst in train]
    vocab = sorted({tok for region, _, _ in featurized for tok in region})
    index = {tok: i for i, tok in enumerate(vocab)}
    n_features = len(vocab) + 2  # + distance + negation
    features = np.zeros((len(train), n_features))
    for row, (region, distance, negation) in enumerate(featurized):
        for tok in region:
            features[row, index[tok]] = 1.0
        features[row, len(vocab)] = distance
        features[row, len(vocab) + 1] = negation

    rng = np.random.default_rng(seed)
    params = np.concatenate([rng.normal(0.0, 0.01, n_features), [0.0]])
    for _ in range(iterations):
        _, grad = loss_and_grad(params, features, labels, l2)
        params -= learning_rate * grad
    return BaselineModel(
        lexicon={tok: float(params[index[tok]]) for tok in vocab},
        bias=float(params[-1]),
        window=window,
        distance_weight=float(params[len(vocab)]),
        negation_weight=float(params[len(vocab) + 1]),
    )


class Classifier(Protocol):
    def score_batch(self, tagged_texts: Sequence[str]) -> list[float]: ...


@dataclass(frozen=True)
class BaselineClassifier:
    model: BaselineModel = field(default_factory=default_baseline)

    def score_batch(self, tagged_texts: Sequence[str]) -> list[float]:
        return [self.model.score_text(text) for text in tagged_texts]


@dataclass(frozen=True)
class RemoteClassifier:
    endpoint: str
    timeout: float = DEFAULT_TIMEOUT

    def score_batch(self, tagged_texts: Sequence[str]) -> list[float]:
        body = post_json(
            self.endpoint.rstrip("/") + "/score",
            {"instances": list(tagged_texts)},
            timeout=self.timeout,
        )
        scores = body.get("scores")
        if not isinstance(scores, list) or len(scores) != len(tagged_texts):
            got = len(scores) if isinstance(scores, list) else type(scores).__name__
            raise ProtocolViolation(
                f"{self.endpoint}: expected {len(tagged_texts)} scores, got {got}"
            )
        validated = []
        for value in scores:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ProtocolViolation(f"{self.endpoint}: non-numeric score {value!r}")
            value = float(value)
            if not math.isfinite(value) or not 0.0 <= value <= 1.0:
                raise ProtocolViolation(f"{self.endpoint}: score {value} outside [0, 1]")
            validated.append(value)
        return validated


@dataclass(frozen=True)
class ClassifierConfig:
    """Which scoring backend to use and where predictions cut off."""

    backend: str = "baseline"  # "baseline" | "remote"
    threshold: float = 0.5
    endpoint: str | None = None
    model_path: str | None = None

    def __post_init__(self) -> None:
        if self.backend not in ("baseline", "remote"):
            raise ValueError(f"unknown classifier backend {self.backend!r}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must be strictly inside (0, 1), got {self.threshold}")
        if self.backend == "remote" and not self.endpoint:
            raise ValueError("remote classifier requires an endpoint")


def make_classifier(config: ClassifierConfig) -> Classifier:
    if config.backend == "remote":
        return RemoteClassifier(endpoint=config.endpoint or "")
    model = load_model(config.model_path) if config.model_path else default_baseline()
    return BaselineClassifier(model)


def _text_of(instance: "LabeledInstance | str") -> str:
    return instance.tagged_text if isinstance(instance, LabeledInstance) else instance


def score(instance: "LabeledInstance | str", backend: Classifier) -> float:
    """Probability-like interaction score in [0, 1] for one instance."""
    text = _text_of(instance)
    if MARKER_A not in text or MARKER_B not in text:
        raise MissingMarkers(f"tagged text lacks a pair marker: {text!r}")
    return backend.score_batch([text])[0]


def classify(
    instance: "LabeledInstance | str", backend: Classifier, threshold: float = 0.5
) -> bool:
    """True iff the score reaches the threshold (ties predict positive)."""
    return score(instance, backend) >= threshold


def save_model(model: BaselineModel, path: str | Path) -> None:
    payload = {
        "lexicon": model.lexicon,
        "bias": model.bias,
        "window": model.window,
        "distance_weight": model.distance_weight,
        "negation_weight": model.negation_weight,
        "negation_cues": list(model.negation_cues),
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")


def load_model(path: str | Path) -> BaselineModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return BaselineModel(
            lexicon=dict(payload["lexicon"]),
            bias=float(payload["bias"]),
            window=int(payload["window"]),
            distance_weight=float(payload["distance_weight"]),
            negation_weight=float(payload["negation_weight"]),
            negation_cues=tuple(payload["negation_cues"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise BactrexError(f"{path}: not a valid baseline model file: {exc}") from exc

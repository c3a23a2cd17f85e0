"""Trainable transformer backend for interaction scoring.

Consumes marker-tagged instance records (JSON lines with ``tagged_text``
and ``label`` fields), trains a small transformer classifier under one of
three regimens (training on transfer corpora only, fine-tuning only, or
transfer training followed by fine-tuning), and serves scores over the
shared ``/score`` wire protocol.
"""

__version__ = "0.1.0"

from modelserver.plan import Hyperparameters, TrainingPlan, load_plan
from modelserver.train import ServedModel, TrainingDiverged, train

__all__ = [
    "Hyperparameters",
    "TrainingPlan",
    "load_plan",
    "ServedModel",
    "TrainingDiverged",
    "train",
    "__version__",
]

"""Learner zoo: algorithms, feature selection, budgets and model files."""

from .clock import Clock
from .featsel import FsOutcome, fs_space, run_feature_selection
from .registry import (AlgorithmEntry, Encoder, FittedModel, TrainOutcome, default_rules,
                       evaluate_error, family_of, load_model, registry, registry_by_id,
                       save_model, train_model)

__all__ = [
    "AlgorithmEntry", "Clock", "Encoder", "FittedModel", "FsOutcome", "TrainOutcome",
    "default_rules", "evaluate_error", "family_of", "fs_space", "load_model", "registry",
    "registry_by_id", "run_feature_selection", "save_model", "train_model",
]

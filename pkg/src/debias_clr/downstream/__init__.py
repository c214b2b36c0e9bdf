"""Downstream representativeness benchmark: classifiers, metrics, grids."""

from .classifiers import ALL_KINDS, fit, predict
from .evaluate import EvalCell, EvalReport, VariantData, balance_training_set, evaluate
from .forest import DecisionTree, RandomForest
from .metrics import accuracy, cohen_kappa, confusion_counts, mcc

__all__ = [
    "ALL_KINDS",
    "fit",
    "predict",
    "EvalCell",
    "EvalReport",
    "VariantData",
    "balance_training_set",
    "evaluate",
    "DecisionTree",
    "RandomForest",
    "accuracy",
    "cohen_kappa",
    "confusion_counts",
    "mcc",
]

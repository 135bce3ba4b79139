from .io import load_model, save_model
from .models import (
    ABModel,
    DTModel,
    FAMILIES,
    KNNModel,
    LDAModel,
    LearnerConfig,
    RFModel,
    TrainedModel,
    fit,
    predict_proba,
    training_cross_entropy,
)
from .tree import DecisionTree

__all__ = [
    "ABModel",
    "DTModel",
    "DecisionTree",
    "FAMILIES",
    "KNNModel",
    "LDAModel",
    "LearnerConfig",
    "RFModel",
    "TrainedModel",
    "fit",
    "load_model",
    "predict_proba",
    "save_model",
    "training_cross_entropy",
]

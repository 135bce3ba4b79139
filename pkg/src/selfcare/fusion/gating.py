"""Context gating: branch selection from ACC/EMG features.

Per-sample gating labels name the branch with the least training loss;
a decision tree learns to predict them from context features, and the
δ rule turns its probabilities into a branch subset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset.types import Device
from ..errors import ConfigError, DataError
from ..learners.models import DTModel, LearnerConfig, TrainedModel
from ..learners.models import fit as fit_learner
from .branches import BranchSpec

#: Context feature source per device (the gate's input).
CONTEXT_GROUP = {Device.WRIST: "ACC", Device.CHEST: "EMG"}


@dataclass(frozen=True)
class GateDecision:
    branch_ids: tuple[str, ...]
    probabilities: np.ndarray
    delta: float
    #: Selected branch ids in ascending id order (the processing order).
    selected: tuple[str, ...]
    #: The maximum-probability branch (ties resolved to the lowest id).
    argmax_branch: str
    context_source: str


def generate_gating_labels(
    ce_per_branch: dict[str, np.ndarray], branches: tuple[BranchSpec, ...]
) -> np.ndarray:
    """Per-sample branch ids with minimal cross entropy.

    Exact ties prefer the branch with fewer sensors, then lexicographic
    branch id order.
    """
    if not branches:
        raise DataError("no branches to label against")
    matrix = np.column_stack([ce_per_branch[b.id] for b in branches])
    # Order branch columns by the tie-break key once; argmin then returns
    # the first minimal column in that order.
    tie_order = sorted(
        range(len(branches)), key=lambda j: (branches[j].n_sensors, branches[j].id)
    )
    winners = np.argmin(matrix[:, tie_order], axis=1)
    ids = np.asarray([branches[j].id for j in tie_order], dtype=object)
    return ids[winners]


class ConstantGate:
    """Gate for the degenerate case of a single observed gating label."""

    family = "CONST"

    def __init__(self, branch_id: str, n_features: int):
        self.classes_ = np.asarray([branch_id])
        self.n_features_ = int(n_features)

    def predict_proba(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        return np.ones((X.shape[0], 1))


def train_gate(
    context_features: np.ndarray,
    gating_labels: np.ndarray,
    min_samples_split: int = 20,
) -> TrainedModel | ConstantGate:
    """Decision tree over context features predicting branch labels."""
    X = np.asarray(context_features, dtype=np.float64)
    labels = np.asarray(gating_labels).astype(str)
    if np.unique(labels).size == 1:
        return ConstantGate(str(labels[0]), X.shape[1])
    config = LearnerConfig(family="DT", min_samples_split=min_samples_split)
    model = fit_learner(config, X, labels)
    assert isinstance(model, DTModel)
    return model


def gate_select(
    probabilities: np.ndarray,
    branch_ids: tuple[str, ...],
    delta: float,
    context_source: str = "",
) -> GateDecision:
    """Branches within δ of the maximum gate probability.

    The argmax branch always qualifies; δ=0 selects exactly the argmax set
    and δ=1 every branch.  Selection order is ascending branch id.
    """
    if not 0.0 <= delta <= 1.0:
        raise ConfigError(f"delta must lie in [0, 1], got {delta}")
    p = np.asarray(probabilities, dtype=np.float64).ravel()
    if p.size != len(branch_ids):
        raise DataError(f"{p.size} probabilities for {len(branch_ids)} branches")
    if p.size == 0:
        raise DataError("empty gate probability vector")
    best = float(np.max(p))
    id_order = sorted(range(p.size), key=lambda j: branch_ids[j])
    selected = tuple(branch_ids[j] for j in id_order if p[j] >= best - delta)
    argmax_branch = next(branch_ids[j] for j in id_order if p[j] == best)
    return GateDecision(
        tuple(branch_ids), p.copy(), float(delta), selected, argmax_branch, context_source
    )

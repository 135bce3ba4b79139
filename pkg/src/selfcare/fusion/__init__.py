"""Branch catalog, context gating, and late-fusion backends."""

from .branches import (
    BranchCatalog,
    BranchSpec,
    CATALOG,
    CHEST_BRANCHES,
    DEVICE_GROUPS,
    SHORTLISTS,
    WRIST_BRANCHES,
    early_fuse,
)
from .config import FUSION_BACKENDS, FusionSettings, default_settings, load_fusion_config, parse_fusion_config
from .gating import CONTEXT_GROUP, ConstantGate, GateDecision, gate_select, generate_gating_labels, train_gate
from .kalman import KalmanConfig, KalmanFuser, kalman_fuse, r_three_class, r_two_class
from .pipeline import (
    FeatureCache,
    PipelineBundle,
    load_bundle,
    save_bundle,
    selfcare_classify,
    shortlist_branches,
    train_pipeline,
)
from .voting import hard_vote, soft_vote

__all__ = [
    "BranchCatalog",
    "BranchSpec",
    "CATALOG",
    "CHEST_BRANCHES",
    "CONTEXT_GROUP",
    "DEVICE_GROUPS",
    "ConstantGate",
    "FUSION_BACKENDS",
    "FeatureCache",
    "FusionSettings",
    "GateDecision",
    "KalmanConfig",
    "KalmanFuser",
    "PipelineBundle",
    "SHORTLISTS",
    "WRIST_BRANCHES",
    "default_settings",
    "early_fuse",
    "gate_select",
    "generate_gating_labels",
    "hard_vote",
    "kalman_fuse",
    "load_bundle",
    "load_fusion_config",
    "parse_fusion_config",
    "r_three_class",
    "r_two_class",
    "save_bundle",
    "selfcare_classify",
    "shortlist_branches",
    "soft_vote",
    "train_gate",
    "train_pipeline",
]

from .cardiac import IBISeries, cardiac_features, detect_beats, ibi_series
from .extractors import (
    CANONICAL_GROUP_ORDER,
    EXTRACTORS,
    acc_features,
    eda_features,
    emg_features,
    extract_group,
    resp_features,
    temp_features,
    write_feature_csv,
)
from .types import DEFAULT_CONFIG, FeatureConfig, FeatureVector

__all__ = [
    "CANONICAL_GROUP_ORDER",
    "DEFAULT_CONFIG",
    "EXTRACTORS",
    "FeatureConfig",
    "FeatureVector",
    "IBISeries",
    "acc_features",
    "cardiac_features",
    "detect_beats",
    "eda_features",
    "emg_features",
    "extract_group",
    "ibi_series",
    "resp_features",
    "temp_features",
    "write_feature_csv",
]

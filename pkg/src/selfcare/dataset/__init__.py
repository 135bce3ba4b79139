from .store import load_store, write_store
from .synthetic import (
    Burst,
    ChannelModel,
    ClassEffect,
    SyntheticScenario,
    demo_wrist_scenario,
    generate_synthetic,
    synthetic_wrist_store,
)
from .types import (
    ACC_AXES,
    Device,
    Modality,
    SignalChannel,
    SubjectRecord,
    THREE_CLASS_NAMES,
    TWO_CLASS_NAMES,
    WindowedSegment,
    code_to_class,
)

__all__ = [
    "ACC_AXES",
    "Burst",
    "ChannelModel",
    "ClassEffect",
    "Device",
    "Modality",
    "SignalChannel",
    "SubjectRecord",
    "SyntheticScenario",
    "THREE_CLASS_NAMES",
    "TWO_CLASS_NAMES",
    "WindowedSegment",
    "code_to_class",
    "demo_wrist_scenario",
    "generate_synthetic",
    "load_store",
    "synthetic_wrist_store",
    "write_store",
]

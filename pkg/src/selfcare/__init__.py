"""Selective sensor-fusion toolkit for wearable stress classification.

Subpackages: dataset (store + synthetic signals), dsp (filtering and
windowing), features (per-sensor descriptors), learners (classifier
families), fusion (branches, gating, late fusion), evaluation (LOSO
harness and reports), cli (operator commands).
"""

__version__ = "0.1.0"

from . import errors
from .dataset.types import Device, Modality

__all__ = ["Device", "Modality", "__version__", "errors"]

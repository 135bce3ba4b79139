"""Core record types for multimodal wearable signals."""

from __future__ import annotations

import enum
from pathlib import Path

import numpy as np

from ..errors import IntegrityError, MissingModalityError


class Modality(str, enum.Enum):
    ACC_X = "ACC_X"
    ACC_Y = "ACC_Y"
    ACC_Z = "ACC_Z"
    BVP = "BVP"
    ECG = "ECG"
    EDA = "EDA"
    EMG = "EMG"
    RESP = "RESP"
    TEMP = "TEMP"
    # Derived low-passed EMG retained by preprocessing for peak features.
    # Never present in a stored dataset, only in preprocessed records.
    EMG_PEAK = "EMG_PEAK"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


#: Modalities that may appear in a stored dataset manifest.
RAW_MODALITIES = frozenset(m for m in Modality if m is not Modality.EMG_PEAK)

ACC_AXES = (Modality.ACC_X, Modality.ACC_Y, Modality.ACC_Z)


class Device(str, enum.Enum):
    WRIST = "wrist"
    CHEST = "chest"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


# Raw label codes.  The stored codes are kept verbatim; only these three map
# to classification targets, everything else counts as "other".
LABEL_BASELINE = 1
LABEL_STRESS = 2
LABEL_AMUSEMENT = 3

THREE_CLASS_NAMES = ("baseline", "stress", "amusement")
TWO_CLASS_NAMES = ("non_stress", "stress")

_CODE_TO_CLASS3 = {LABEL_BASELINE: 0, LABEL_STRESS: 1, LABEL_AMUSEMENT: 2}


def code_to_class(code: int, n_classes: int) -> int | None:
    """Map a raw label code to a class index, or None for "other" codes.

    3-class order: baseline, stress, amusement.  2-class order: non-stress
    (baseline + amusement pooled), stress.
    """
    cls3 = _CODE_TO_CLASS3.get(int(code))
    if cls3 is None:
        return None
    if n_classes == 3:
        return cls3
    if n_classes == 2:
        return 1 if cls3 == 1 else 0
    raise ValueError(f"unsupported class count {n_classes}")


class SignalChannel:
    """One modality's samples plus rate/unit metadata.

    Samples may be backed by a file and are loaded on first access; the
    declared sample count is validated against the file size at store load
    time, so lazy loading never changes what callers observe.
    """

    __slots__ = ("modality", "device", "rate_hz", "_data", "_source", "_count")

    def __init__(
        self,
        modality: Modality,
        device: Device,
        rate_hz: float,
        samples: np.ndarray | None = None,
        source: Path | None = None,
        sample_count: int | None = None,
    ):
        if rate_hz <= 0:
            raise IntegrityError(f"{modality}: rate_hz must be positive, got {rate_hz}")
        if samples is None and source is None:
            raise ValueError("need samples or a source file")
        self.modality = Modality(modality)
        self.device = Device(device)
        self.rate_hz = float(rate_hz)
        self._source = source
        if samples is not None:
            # Stored files are 32-bit floats; in memory everything runs in
            # float64 so filter chains keep full precision.
            samples = np.asarray(samples, dtype=np.float64)
            self._data = samples
            self._count = samples.size
        else:
            self._data = None
            self._count = int(sample_count) if sample_count is not None else None

    @property
    def samples(self) -> np.ndarray:
        if self._data is None:
            data = np.fromfile(self._source, dtype="<f4")
            if self._count is not None and data.size != self._count:
                raise IntegrityError(
                    f"channel {self.modality} ({self._source}): "
                    f"{data.size} samples on disk, {self._count} declared"
                )
            self._data = data.astype(np.float64)
        return self._data

    @property
    def n_samples(self) -> int:
        return self._count if self._count is not None else self._data.size

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.rate_hz

    def with_samples(self, samples: np.ndarray) -> "SignalChannel":
        """Copy of this channel carrying new sample data (same metadata)."""
        return SignalChannel(self.modality, self.device, self.rate_hz, samples=samples)


class SubjectRecord:
    """All channels and labels of one subject on one device."""

    def __init__(
        self,
        subject_id: str,
        device: Device,
        channels: dict[Modality, SignalChannel],
        labels: np.ndarray,
        label_rate_hz: float,
    ):
        if not channels:
            raise IntegrityError(f"{subject_id}/{device}: record has no channels")
        if label_rate_hz <= 0:
            raise IntegrityError(f"{subject_id}/{device}: label rate must be positive")
        self.subject_id = subject_id
        self.device = Device(device)
        self.channels = dict(channels)
        self.labels = np.asarray(labels, dtype=np.int32)
        self.label_rate_hz = float(label_rate_hz)
        if self.labels.size == 0:
            raise IntegrityError(f"{subject_id}/{device}: empty label sequence")

    @property
    def duration_s(self) -> float:
        """Common wall-clock span: the shortest channel rules."""
        return min(ch.duration_s for ch in self.channels.values())

    def channel(self, modality: Modality) -> SignalChannel:
        try:
            return self.channels[Modality(modality)]
        except KeyError:
            raise IntegrityError(
                f"{self.subject_id}/{self.device}: no {modality} channel"
            ) from None


class WindowedSegment:
    """A fixed-length multi-channel slice with a majority class label.

    ``label`` is a raw label code (already restricted to the three target
    classes by segmentation); ``start_s`` is the window's offset within the
    subject recording.
    """

    __slots__ = ("subject_id", "device", "start_s", "window_s", "channels", "label")

    def __init__(self, subject_id, device, start_s, window_s, channels, label):
        self.subject_id = subject_id
        self.device = Device(device)
        self.start_s = float(start_s)
        self.window_s = float(window_s)
        self.channels = channels  # dict[Modality, SignalChannel]
        self.label = int(label)

    def channel(self, modality: Modality) -> SignalChannel:
        try:
            return self.channels[Modality(modality)]
        except KeyError:
            raise MissingModalityError(
                f"segment {self.subject_id}@{self.start_s:g}s: no {modality} channel"
            ) from None

    @property
    def segment_id(self) -> str:
        return f"{self.subject_id}/{self.device.value}/{self.start_s:g}"

"""Feature vector container and the tunable detector configuration."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError


@dataclass(frozen=True)
class FeatureVector:
    """Ordered (name, value) pairs extracted from one segment.

    Equal modality sets always produce identical name sequences, so vectors
    are concatenable across segments into fixed-arity matrices.
    """

    names: tuple[str, ...]
    values: np.ndarray
    modalities: frozenset[str]
    segment_id: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if len(self.names) != values.size:
            raise DataError(
                f"{len(self.names)} names vs {values.size} values"
            )
        if not np.all(np.isfinite(values)):
            bad = [n for n, v in zip(self.names, values) if not np.isfinite(v)]
            raise DataError(f"non-finite feature values: {', '.join(bad)}")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))

    def concat(self, other: "FeatureVector") -> "FeatureVector":
        overlap = set(self.names) & set(other.names)
        if overlap:
            raise DataError(f"duplicate feature names on concat: {sorted(overlap)}")
        return FeatureVector(
            self.names + other.names,
            np.concatenate([self.values, other.values]),
            self.modalities | other.modalities,
            self.segment_id or other.segment_id,
        )


@dataclass(frozen=True)
class FeatureConfig:
    """Every detector threshold used by the extractors, in one place."""

    # Cardiac beat detection on the bandpassed signal.
    beat_threshold_frac: float = 0.5
    beat_rolling_window_s: float = 5.0
    beat_refractory_ms: float = 250.0
    ibi_min_ms: float = 250.0
    ibi_max_ms: float = 1500.0
    # Heart-rate variability spectral bands (Hz).
    hrv_bands: tuple[tuple[str, float, float], ...] = (
        ("ulf", 0.01, 0.04),
        ("lf", 0.04, 0.15),
        ("hf", 0.15, 0.40),
        ("uhf", 0.40, 1.00),
    )
    hrv_freq_step_hz: float = 0.002
    # Electrodermal decomposition.
    scl_window_s: float = 4.0
    scr_threshold_us: float = 0.01
    scr_min_duration_s: float = 0.5
    # Muscle-activity peaks and spectrum.
    emg_peak_threshold_stds: float = 1.5
    emg_n_bands: int = 7


DEFAULT_CONFIG = FeatureConfig()


def finite_or_zero(value: float) -> float:
    v = float(value)
    return v if np.isfinite(v) else 0.0


@dataclass
class _Builder:
    """Accumulates (name, value) pairs preserving insertion order."""

    prefix: str
    names: list[str] = field(default_factory=list)
    values: list[float] = field(default_factory=list)

    def add(self, name: str, value: float) -> None:
        self.names.append(f"{self.prefix}_{name}")
        self.values.append(finite_or_zero(value))

    def build(self, modalities, segment_id: str = "") -> FeatureVector:
        return FeatureVector(
            tuple(self.names), np.asarray(self.values), frozenset(modalities), segment_id
        )

"""Beat detection, inter-beat intervals, and heart-rate variability features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d
from scipy.signal import lombscargle

from ..dataset.types import Modality, WindowedSegment
from ..errors import InsufficientBeatsError
from .signals import local_maxima
from .types import DEFAULT_CONFIG, FeatureConfig, _Builder, FeatureVector


@dataclass(frozen=True)
class IBISeries:
    """Artifact-rejected inter-beat intervals with their end-beat times."""

    intervals_ms: np.ndarray
    times_s: np.ndarray  # time of each interval's closing beat

    def __len__(self) -> int:
        return self.intervals_ms.size


def detect_beats(
    x: np.ndarray, rate_hz: float, config: FeatureConfig = DEFAULT_CONFIG
) -> np.ndarray:
    """Beat sample indices on a bandpassed cardiac signal.

    Mean-removed local maxima above a rolling-maximum threshold, thinned by
    a refractory period that keeps the taller of two close candidates.
    Detection depends only on signal shape, so it is invariant to offset
    and positive scaling.
    """
    x0 = np.asarray(x, dtype=np.float64) - np.mean(x)
    window = max(3, int(round(config.beat_rolling_window_s * rate_hz)))
    rolling_max = maximum_filter1d(x0, size=window, mode="nearest")
    threshold = config.beat_threshold_frac * rolling_max
    candidates = [i for i in local_maxima(x0) if x0[i] >= threshold[i] and x0[i] > 0]

    refractory = config.beat_refractory_ms / 1000.0 * rate_hz
    beats: list[int] = []
    for i in candidates:
        if beats and i - beats[-1] < refractory:
            if x0[i] > x0[beats[-1]]:
                beats[-1] = i
        else:
            beats.append(i)
    return np.asarray(beats, dtype=int)


def ibi_series(
    beat_indices: np.ndarray, rate_hz: float, config: FeatureConfig = DEFAULT_CONFIG
) -> IBISeries:
    """Intervals between consecutive beats, keeping only [min, max] ms."""
    times = np.asarray(beat_indices, dtype=np.float64) / rate_hz
    intervals = np.diff(times) * 1000.0
    keep = (intervals >= config.ibi_min_ms) & (intervals <= config.ibi_max_ms)
    return IBISeries(intervals[keep], times[1:][keep])


def _band_energies(ibis: IBISeries, config: FeatureConfig) -> dict[str, float]:
    """Lomb-Scargle band energies of the unevenly sampled interval series."""
    energies = {name: 0.0 for name, _, _ in config.hrv_bands}
    if len(ibis) < 4:
        return energies
    centered = ibis.intervals_ms - np.mean(ibis.intervals_ms)
    if np.allclose(centered, 0.0):
        return energies
    lo = min(b[1] for b in config.hrv_bands)
    hi = max(b[2] for b in config.hrv_bands)
    freqs = np.arange(lo, hi + config.hrv_freq_step_hz / 2, config.hrv_freq_step_hz)
    power = lombscargle(ibis.times_s, centered, 2.0 * np.pi * freqs)
    for name, f_lo, f_hi in config.hrv_bands:
        mask = (freqs >= f_lo) & (freqs < f_hi)
        energies[name] = float(np.sum(power[mask]) * config.hrv_freq_step_hz)
    return energies


def cardiac_features(
    segment: WindowedSegment,
    source: Modality,
    config: FeatureConfig = DEFAULT_CONFIG,
) -> FeatureVector:
    """Heart-rate and variability features from an ECG or BVP channel."""
    source = Modality(source)
    channel = segment.channel(source)
    beats = detect_beats(channel.samples, channel.rate_hz, config)
    if beats.size < 2:
        raise InsufficientBeatsError(
            f"segment {segment.segment_id}: {beats.size} beat(s) in {source} window"
        )
    ibis = ibi_series(beats, channel.rate_hz, config)
    if len(ibis) < 1:
        raise InsufficientBeatsError(
            f"segment {segment.segment_id}: no physiological intervals in {source}"
        )
    b = _Builder(source.value.lower())

    hr = 60000.0 / ibis.intervals_ms
    b.add("hr_mean", np.mean(hr))
    b.add("hr_std", np.std(hr))
    b.add("hrv_mean", np.mean(ibis.intervals_ms))
    b.add("hrv_std", np.std(ibis.intervals_ms))

    diffs = np.diff(ibis.intervals_ms)
    diff_valid = diffs.size >= 1
    nn50 = float(np.sum(np.abs(diffs) > 50.0)) if diff_valid else 0.0
    b.add("nn50", nn50)
    b.add("pnn50", nn50 / diffs.size if diff_valid else 0.0)
    b.add("rmssd", np.sqrt(np.mean(diffs**2)) if diff_valid else 0.0)
    b.add("diff_valid", 1.0 if diff_valid else 0.0)

    energies = _band_energies(ibis, config)
    for name, _, _ in config.hrv_bands:
        b.add(f"energy_{name}", energies[name])
    ulf, lf, hf = energies["ulf"], energies["lf"], energies["hf"]
    band_sum = ulf + lf + hf
    spec_valid = band_sum > 0.0
    b.add("lf_hf", lf / hf if hf > 0 else 0.0)
    b.add("band_sum", band_sum)
    for name in ("ulf", "lf", "hf"):
        b.add(f"rel_{name}", energies[name] / band_sum if spec_valid else 0.0)
    b.add("lf_norm", lf / (lf + hf) if lf + hf > 0 else 0.0)
    b.add("hf_norm", hf / (lf + hf) if lf + hf > 0 else 0.0)
    b.add("spec_valid", 1.0 if spec_valid else 0.0)

    return b.build({source.value}, segment.segment_id)

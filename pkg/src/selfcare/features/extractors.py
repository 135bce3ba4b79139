"""Per-modality feature extractors and the group dispatch table."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..dataset.types import ACC_AXES, Modality, WindowedSegment
from ..errors import DataError, MissingModalityError
from .cardiac import cardiac_features
from .signals import (
    abs_integral,
    half_power_spectrum,
    least_squares_slope,
    local_maxima,
    moving_average,
    peak_frequency,
    pearson,
)
from .types import DEFAULT_CONFIG, FeatureConfig, FeatureVector, _Builder


def acc_features(
    segment: WindowedSegment, config: FeatureConfig = DEFAULT_CONFIG
) -> FeatureVector:
    """Accelerometer statistics per axis plus the 3D magnitude."""
    axes = [segment.channel(m) for m in ACC_AXES]
    rate = axes[0].rate_hz
    n = min(ch.samples.size for ch in axes)
    xyz = np.stack([np.asarray(ch.samples[:n], dtype=np.float64) for ch in axes])
    magnitude = np.sqrt(np.sum(xyz**2, axis=0))

    b = _Builder("acc")
    for name, axis in zip("xyz", xyz):
        b.add(f"mean_{name}", np.mean(axis))
    b.add("mean_3d", np.mean(magnitude))
    for name, axis in zip("xyz", xyz):
        b.add(f"std_{name}", np.std(axis))
    b.add("std_3d", np.std(magnitude))
    for name, axis in zip("xyz", xyz):
        b.add(f"absint_{name}", abs_integral(axis, rate))
    b.add("absint_total", sum(abs_integral(axis, rate) for axis in xyz))
    for name, axis in zip("xyz", xyz):
        b.add(f"peak_freq_{name}", peak_frequency(axis, rate))
    return b.build({"ACC"}, segment.segment_id)


def emg_features(
    segment: WindowedSegment, config: FeatureConfig = DEFAULT_CONFIG
) -> FeatureVector:
    """Muscle-activity statistics, spectrum, and peak-train features.

    Peaks are read from the separately low-passed peak channel; their
    amplitudes are measured relative to that channel's mean so offset
    shifts do not masquerade as activity.
    """
    channel = segment.channel(Modality.EMG)
    x = np.asarray(channel.samples, dtype=np.float64)
    rate = channel.rate_hz

    b = _Builder("emg")
    b.add("mean", np.mean(x))
    b.add("std", np.std(x))
    b.add("median", np.median(x))
    b.add("range", np.ptp(x))
    b.add("absint", abs_integral(x, rate))
    b.add("p10", np.percentile(x, 10))
    b.add("p90", np.percentile(x, 90))

    freqs, power = half_power_spectrum(x, rate)
    total = float(np.sum(power))
    b.add("mean_freq", float(np.sum(freqs * power)) / total if total > 0 else 0.0)
    if total > 0:
        cumulative = np.cumsum(power)
        b.add("median_freq", float(freqs[np.searchsorted(cumulative, total / 2.0)]))
    else:
        b.add("median_freq", 0.0)
    b.add("peak_freq", peak_frequency(x, rate))

    # Equal-width energy bands over (0, Nyquist]; DC carries no power after
    # mean removal, so the bands sum to the biased variance.
    edges = np.linspace(0.0, rate / 2.0, config.emg_n_bands + 1)
    for k in range(config.emg_n_bands):
        mask = (freqs > edges[k]) & (freqs <= edges[k + 1])
        b.add(f"band_{k + 1}", float(np.sum(power[mask])))

    peak_channel = segment.channel(Modality.EMG_PEAK)
    p = np.asarray(peak_channel.samples, dtype=np.float64)
    threshold = np.mean(p) + config.emg_peak_threshold_stds * np.std(p)
    peak_idx = np.asarray([i for i in local_maxima(p) if p[i] > threshold], dtype=int)
    amps = p[peak_idx] - np.mean(p)
    b.add("peak_count", float(peak_idx.size))
    b.add("peak_amp_mean", np.mean(amps) if amps.size else 0.0)
    b.add("peak_amp_std", np.std(amps) if amps.size else 0.0)
    b.add("peak_amp_sum", np.sum(amps) if amps.size else 0.0)
    b.add("peak_amp_norm_sum", np.sum(amps) / p.size if amps.size else 0.0)
    b.add("peak_valid", 1.0 if amps.size else 0.0)
    return b.build({"EMG"}, segment.segment_id)


def _scr_segments(residual: np.ndarray, rate: float, config: FeatureConfig):
    """Contiguous residual excursions above threshold lasting long enough."""
    above = residual > config.scr_threshold_us
    min_len = int(np.ceil(config.scr_min_duration_s * rate))
    runs = []
    start = None
    for i, flag in enumerate(above):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if i - start >= min_len:
                runs.append((start, i))
            start = None
    if start is not None and above.size - start >= min_len:
        runs.append((start, above.size))
    return runs


def eda_features(
    segment: WindowedSegment, config: FeatureConfig = DEFAULT_CONFIG
) -> FeatureVector:
    """Electrodermal level/response decomposition and summary statistics."""
    channel = segment.channel(Modality.EDA)
    x = np.asarray(channel.samples, dtype=np.float64)
    rate = channel.rate_hz

    b = _Builder("eda")
    b.add("mean", np.mean(x))
    b.add("std", np.std(x))
    b.add("min", np.min(x))
    b.add("max", np.max(x))
    b.add("slope", least_squares_slope(x, rate))
    b.add("range", np.ptp(x))

    scl = moving_average(x, int(round(config.scl_window_s * rate)))
    scr = x - scl
    t = np.arange(x.size) / rate
    b.add("scl_mean", np.mean(scl))
    b.add("scl_std", np.std(scl))
    b.add("scr_std", np.std(scr))
    b.add("scl_corr_t", pearson(scl, t))

    runs = _scr_segments(scr, rate, config)
    # Excursion amplitude is trough-to-peak on the conductance trace
    # itself: onset is walked back from the threshold crossing to the
    # preceding local minimum so the trend subtraction does not truncate
    # the measured rise.
    magnitudes = []
    for lo, hi in runs:
        onset = lo
        while onset > 0 and x[onset - 1] <= x[onset]:
            onset -= 1
        magnitudes.append(float(np.max(x[onset:hi]) - x[onset]))
    b.add("scr_count", float(len(runs)))
    b.add("scr_mag_sum", float(np.sum(magnitudes)) if runs else 0.0)
    b.add("scr_dur_sum", float(sum(hi - lo for lo, hi in runs)) / rate if runs else 0.0)
    b.add(
        "scr_area",
        float(sum(np.trapezoid(np.maximum(scr[lo:hi], 0.0), dx=1.0 / rate) for lo, hi in runs))
        if runs
        else 0.0,
    )
    return b.build({"EDA"}, segment.segment_id)


def _breath_extrema(x0: np.ndarray) -> list[tuple[int, int]]:
    """Alternating (index, sign) extrema between zero crossings.

    sign +1 marks a peak (end of inhalation), -1 a trough (end of
    exhalation).
    """
    signs = np.sign(x0)
    nonzero = np.flatnonzero(signs)
    if nonzero.size == 0:
        return []
    crossings = [0]
    last_sign = signs[nonzero[0]]
    for i in nonzero[1:]:
        if signs[i] != last_sign:
            crossings.append(i)
            last_sign = signs[i]
    crossings.append(x0.size)
    extrema = []
    for lo, hi in zip(crossings[:-1], crossings[1:]):
        lobe = x0[lo:hi]
        if lobe.size == 0 or np.all(lobe == 0.0):
            continue
        if np.max(lobe) > 0:
            extrema.append((lo + int(np.argmax(lobe)), +1))
        else:
            extrema.append((lo + int(np.argmin(lobe)), -1))
    return extrema


def resp_features(
    segment: WindowedSegment, config: FeatureConfig = DEFAULT_CONFIG
) -> FeatureVector:
    """Breath-cycle timing statistics from the bandpassed respiration trace."""
    channel = segment.channel(Modality.RESP)
    x = np.asarray(channel.samples, dtype=np.float64)
    rate = channel.rate_hz
    x0 = x - np.mean(x)

    extrema = _breath_extrema(x0)
    inhales: list[float] = []  # trough -> peak spans, seconds
    exhales: list[float] = []  # peak -> trough spans
    volumes: list[float] = []
    for (i0, s0), (i1, s1) in zip(extrema[:-1], extrema[1:]):
        if s0 == s1:
            continue
        span = (i1 - i0) / rate
        if s0 == -1:
            inhales.append(span)
            volumes.append(float(np.trapezoid(x0[i0 : i1 + 1] - x0[i0], dx=1.0 / rate)))
        else:
            exhales.append(span)

    b = _Builder("resp")
    valid = bool(inhales) and bool(exhales)
    b.add("inhale_mean", np.mean(inhales) if inhales else 0.0)
    b.add("inhale_std", np.std(inhales) if inhales else 0.0)
    b.add("exhale_mean", np.mean(exhales) if exhales else 0.0)
    b.add("exhale_std", np.std(exhales) if exhales else 0.0)
    b.add("ie_ratio", np.mean(inhales) / np.mean(exhales) if valid else 0.0)
    b.add("volume", np.sum(volumes) if volumes else 0.0)
    b.add("range", np.ptp(x))
    duration = x.size / rate
    cycles = min(len(inhales), len(exhales))
    b.add("rate", cycles / duration * 60.0 if valid else 0.0)
    b.add("breath_dur_sum", np.sum(inhales) + np.sum(exhales) if valid else 0.0)
    b.add("valid", 1.0 if valid else 0.0)
    return b.build({"RESP"}, segment.segment_id)


def temp_features(
    segment: WindowedSegment, config: FeatureConfig = DEFAULT_CONFIG
) -> FeatureVector:
    channel = segment.channel(Modality.TEMP)
    x = np.asarray(channel.samples, dtype=np.float64)
    b = _Builder("temp")
    b.add("mean", np.mean(x))
    b.add("std", np.std(x))
    b.add("min", np.min(x))
    b.add("max", np.max(x))
    b.add("slope", least_squares_slope(x, channel.rate_hz))
    b.add("range", np.ptp(x))
    return b.build({"TEMP"}, segment.segment_id)


# Sensor groups in the canonical concatenation order.  ACC covers the three
# axis channels; ECG and BVP share the cardiac extractor.
CANONICAL_GROUP_ORDER = ("ACC", "ECG", "BVP", "RESP", "EMG", "EDA", "TEMP")

EXTRACTORS = {
    "ACC": acc_features,
    "ECG": lambda seg, config=DEFAULT_CONFIG: cardiac_features(seg, Modality.ECG, config),
    "BVP": lambda seg, config=DEFAULT_CONFIG: cardiac_features(seg, Modality.BVP, config),
    "RESP": resp_features,
    "EMG": emg_features,
    "EDA": eda_features,
    "TEMP": temp_features,
}


def extract_group(
    segment: WindowedSegment, group: str, config: FeatureConfig = DEFAULT_CONFIG
) -> FeatureVector:
    """Run one sensor group's extractor on a segment."""
    try:
        extractor = EXTRACTORS[group]
    except KeyError:
        raise MissingModalityError(f"unknown sensor group '{group}'") from None
    return extractor(segment, config)


def write_feature_csv(
    path: str | Path,
    vectors: list[FeatureVector],
    labels: list[int],
    subject_ids: list[str],
) -> Path:
    """Feature matrix as CSV: subject_id,label then the canonical names."""
    if not vectors:
        raise DataError("no feature vectors to export")
    if not (len(vectors) == len(labels) == len(subject_ids)):
        raise DataError("vectors, labels and subject ids must align")
    names = vectors[0].names
    for v in vectors[1:]:
        if v.names != names:
            raise DataError("feature vectors disagree on names")
    path = Path(path)
    with path.open("w") as fh:
        fh.write("subject_id,label," + ",".join(names) + "\n")
        for sid, label, v in zip(subject_ids, labels, vectors):
            row = ",".join(f"{x:.10g}" for x in v.values)
            fh.write(f"{sid},{label},{row}\n")
    return path

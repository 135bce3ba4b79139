"""Filter design/application and sliding-window segmentation.

The per-device preprocessing chains and the 60 s / 5 s windowing policy
live here.  Filters are designed once per (spec, rate) and applied
length-preserving: IIR designs run forward-backward for zero phase, FIR
and Savitzky-Golay kernels are centered convolutions over a symmetric
reflection of the signal.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.signal import butter, firwin, savgol_coeffs, sosfiltfilt

from .dataset.types import (
    ACC_AXES,
    Device,
    Modality,
    SignalChannel,
    SubjectRecord,
    WindowedSegment,
    code_to_class,
)
from .errors import DesignError, InsufficientDataError


class FilterKind(str, enum.Enum):
    BUTTERWORTH_LOWPASS = "butterworth_lowpass"
    BUTTERWORTH_BANDPASS = "butterworth_bandpass"
    FIR_LOWPASS = "fir_lowpass"
    SAVITZKY_GOLAY = "savitzky_golay"


@dataclass(frozen=True)
class FilterSpec:
    kind: FilterKind
    order: int | None = None
    cutoff_hz: tuple[float, ...] = ()
    length: int | None = None
    window_size: int | None = None
    poly_order: int | None = None

    @staticmethod
    def butter_lowpass(order: int, cutoff_hz: float) -> "FilterSpec":
        return FilterSpec(FilterKind.BUTTERWORTH_LOWPASS, order=order, cutoff_hz=(cutoff_hz,))

    @staticmethod
    def butter_bandpass(order: int, low_hz: float, high_hz: float) -> "FilterSpec":
        return FilterSpec(
            FilterKind.BUTTERWORTH_BANDPASS, order=order, cutoff_hz=(low_hz, high_hz)
        )

    @staticmethod
    def fir_lowpass(length: int, cutoff_hz: float) -> "FilterSpec":
        return FilterSpec(FilterKind.FIR_LOWPASS, length=length, cutoff_hz=(cutoff_hz,))

    @staticmethod
    def savitzky_golay(window_size: int, poly_order: int) -> "FilterSpec":
        return FilterSpec(
            FilterKind.SAVITZKY_GOLAY, window_size=window_size, poly_order=poly_order
        )


@dataclass(frozen=True)
class FilterCoefficients:
    kind: FilterKind
    rate_hz: float
    sos: np.ndarray | None = None  # second-order sections (IIR)
    taps: np.ndarray | None = None  # convolution kernel (FIR / SG)

    @property
    def effective_order(self) -> int:
        if self.sos is not None:
            return 2 * self.sos.shape[0]
        return self.taps.size


def design_filter(spec: FilterSpec, rate_hz: float) -> FilterCoefficients:
    """Design coefficients for one filter spec at a sampling rate."""
    if rate_hz <= 0:
        raise DesignError(f"rate_hz must be positive, got {rate_hz}")
    nyq = rate_hz / 2.0
    kind = FilterKind(spec.kind)

    if kind in (FilterKind.BUTTERWORTH_LOWPASS, FilterKind.BUTTERWORTH_BANDPASS):
        if not spec.order or spec.order < 1:
            raise DesignError("Butterworth designs need a positive order")
        for c in spec.cutoff_hz:
            if not 0.0 < c < nyq:
                raise DesignError(
                    f"cutoff {c} Hz outside (0, {nyq}) Hz at rate {rate_hz} Hz"
                )
        if kind is FilterKind.BUTTERWORTH_LOWPASS:
            if len(spec.cutoff_hz) != 1:
                raise DesignError("lowpass takes exactly one cutoff")
            sos = butter(spec.order, spec.cutoff_hz[0], btype="lowpass", fs=rate_hz, output="sos")
        else:
            if len(spec.cutoff_hz) != 2 or not spec.cutoff_hz[0] < spec.cutoff_hz[1]:
                raise DesignError("bandpass takes two increasing cutoffs")
            sos = butter(spec.order, spec.cutoff_hz, btype="bandpass", fs=rate_hz, output="sos")
        return FilterCoefficients(kind, rate_hz, sos=np.asarray(sos))

    if kind is FilterKind.FIR_LOWPASS:
        if not spec.length or spec.length < 1:
            raise DesignError("FIR design needs a positive length")
        if len(spec.cutoff_hz) != 1 or not 0.0 < spec.cutoff_hz[0] < nyq:
            raise DesignError(
                f"FIR cutoff must lie in (0, {nyq}) Hz at rate {rate_hz} Hz"
            )
        taps = firwin(spec.length, spec.cutoff_hz[0], window="hamming", fs=rate_hz)
        return FilterCoefficients(kind, rate_hz, taps=np.asarray(taps))

    if kind is FilterKind.SAVITZKY_GOLAY:
        w, p = spec.window_size, spec.poly_order
        if not w or w % 2 == 0 or p is None or w <= p:
            raise DesignError("SG window must be odd and larger than the polynomial order")
        taps = savgol_coeffs(w, p)
        return FilterCoefficients(kind, rate_hz, taps=np.asarray(taps))

    raise DesignError(f"unknown filter kind {spec.kind}")  # pragma: no cover


def apply_filter(coeffs: FilterCoefficients, channel: SignalChannel) -> SignalChannel:
    """Run a designed filter over one channel, preserving length and rate."""
    x = np.asarray(channel.samples, dtype=np.float64)
    if x.size == 0:
        raise InsufficientDataError(f"{channel.modality}: empty channel")
    if x.size < 3 * coeffs.effective_order:
        raise InsufficientDataError(
            f"{channel.modality}: {x.size} samples < 3x filter order "
            f"({coeffs.effective_order})"
        )
    if coeffs.sos is not None:
        # Default forward-backward pad length; shorter inputs cannot be
        # reflected far enough to stabilize the passes.
        padlen = 3 * (2 * coeffs.sos.shape[0] + 1)
        if x.size <= padlen:
            raise InsufficientDataError(
                f"{channel.modality}: {x.size} samples too short for "
                f"zero-phase filtering (needs > {padlen})"
            )
        y = sosfiltfilt(coeffs.sos, x, padtype="even", padlen=padlen)
    else:
        taps = coeffs.taps
        # Centered convolution over a symmetric reflection of the ends.
        left = (taps.size - 1) // 2
        right = taps.size - 1 - left
        padded = np.pad(x, (left, right), mode="reflect")
        y = np.convolve(padded, taps[::-1], mode="valid")
    return channel.with_samples(y)


# Per-device preprocessing chains.  Tuples are (primary chain); the chest EMG
# peak channel is derived separately below.
_WRIST_CHAIN: dict[Modality, tuple[FilterSpec, ...]] = {
    **{axis: (FilterSpec.fir_lowpass(64, 0.4),) for axis in ACC_AXES},
    Modality.BVP: (FilterSpec.butter_bandpass(3, 0.7, 3.7),),
    Modality.EDA: (FilterSpec.butter_lowpass(6, 1.0),),
    Modality.TEMP: (FilterSpec.savitzky_golay(11, 3),),
}

_CHEST_SMOOTH = FilterSpec.savitzky_golay(11, 3)
_CHEST_CHAIN: dict[Modality, tuple[FilterSpec, ...]] = {
    **{axis: (FilterSpec.savitzky_golay(31, 5),) for axis in ACC_AXES},
    Modality.ECG: (_CHEST_SMOOTH, FilterSpec.butter_bandpass(3, 0.7, 3.7)),
    Modality.EMG: (_CHEST_SMOOTH,),
    Modality.EDA: (_CHEST_SMOOTH, FilterSpec.butter_lowpass(2, 5.0)),
    Modality.RESP: (_CHEST_SMOOTH, FilterSpec.butter_bandpass(3, 0.1, 0.35)),
    Modality.TEMP: (_CHEST_SMOOTH,),
}
_EMG_PEAK_SPEC = FilterSpec.butter_lowpass(3, 0.5)


def preprocess(record: SubjectRecord) -> SubjectRecord:
    """Apply the per-device filter chain; chest grows a derived EMG peak channel."""
    chain = _WRIST_CHAIN if record.device is Device.WRIST else _CHEST_CHAIN
    out: dict[Modality, SignalChannel] = {}
    for modality, channel in record.channels.items():
        filtered = channel
        for spec in chain.get(modality, ()):
            filtered = apply_filter(design_filter(spec, channel.rate_hz), filtered)
        out[modality] = filtered
        if record.device is Device.CHEST and modality is Modality.EMG:
            peak = apply_filter(design_filter(_EMG_PEAK_SPEC, channel.rate_hz), filtered)
            out[Modality.EMG_PEAK] = SignalChannel(
                Modality.EMG_PEAK, record.device, channel.rate_hz, samples=peak.samples
            )
    return SubjectRecord(
        record.subject_id, record.device, out, record.labels, record.label_rate_hz
    )


@dataclass(frozen=True)
class SegmentationSpec:
    window_s: float = 60.0
    slide_s: float = 5.0

    def validate(self) -> None:
        if self.window_s <= 0 or self.slide_s <= 0:
            raise DesignError("window and slide must be positive")
        if self.slide_s > self.window_s:
            raise DesignError("slide must not exceed the window")


def segment_count(duration_s: float, window_s: float, slide_s: float) -> int:
    """floor((duration - window) / slide) + 1, guarded against float jitter."""
    return int(np.floor((duration_s - window_s) / slide_s + 1e-9)) + 1


def _majority_code(codes: np.ndarray) -> int:
    """Majority raw label; non-target codes pool into one bucket.

    Ties fall to the later half of the window, then to the code whose last
    occurrence is latest.
    """
    bucketed = np.where(np.isin(codes, (1, 2, 3)), codes, -1)
    values, counts = np.unique(bucketed, return_counts=True)
    tied = values[counts == counts.max()]
    if tied.size > 1:
        later = bucketed[bucketed.size // 2 :]
        later_counts = np.array([(later == v).sum() for v in tied])
        tied = tied[later_counts == later_counts.max()]
    if tied.size > 1:
        last_seen = np.array([np.flatnonzero(bucketed == v)[-1] for v in tied])
        tied = tied[np.argsort(last_seen)][-1:]
    return int(tied[0])


def segment(record: SubjectRecord, spec: SegmentationSpec) -> list[WindowedSegment]:
    """Slice a record into sliding windows with majority labels.

    Windows whose majority label is outside the three target classes are
    dropped after counting, so the pre-filter count matches the closed-form
    formula exactly.
    """
    spec.validate()
    duration = min(record.duration_s, record.labels.size / record.label_rate_hz)
    if duration < spec.window_s:
        raise InsufficientDataError(
            f"{record.subject_id}/{record.device.value}: {duration:.1f}s "
            f"shorter than one {spec.window_s:.0f}s window"
        )
    n_windows = segment_count(duration, spec.window_s, spec.slide_s)
    segments: list[WindowedSegment] = []
    for i in range(n_windows):
        start_s = i * spec.slide_s
        lab_lo = int(round(start_s * record.label_rate_hz))
        lab_n = int(round(spec.window_s * record.label_rate_hz))
        window_codes = record.labels[lab_lo : lab_lo + lab_n]
        code = _majority_code(window_codes)
        if code_to_class(code, 3) is None:
            continue
        channels: dict[Modality, SignalChannel] = {}
        for modality, ch in record.channels.items():
            lo = int(round(start_s * ch.rate_hz))
            n = int(round(spec.window_s * ch.rate_hz))
            channels[modality] = ch.with_samples(ch.samples[lo : lo + n])
        segments.append(
            WindowedSegment(
                record.subject_id, record.device, start_s, spec.window_s, channels, code
            )
        )
    return segments

"""Shared numeric helpers for the feature extractors."""

from __future__ import annotations

import numpy as np


def least_squares_slope(x: np.ndarray, rate_hz: float) -> float:
    """Slope (units/s) of the least-squares line through the samples."""
    if x.size < 2:
        return 0.0
    t = np.arange(x.size) / rate_hz
    return float(np.polyfit(t, x, 1)[0])


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation; 0 when either side is constant."""
    sa, sb = np.std(a), np.std(b)
    if sa == 0.0 or sb == 0.0:
        return 0.0
    return float(np.corrcoef(a, b)[0, 1])


def abs_integral(x: np.ndarray, rate_hz: float) -> float:
    """Trapezoidal integral of |x| over the window (unit·s)."""
    return float(np.trapezoid(np.abs(x), dx=1.0 / rate_hz))


def half_power_spectrum(x: np.ndarray, rate_hz: float) -> tuple[np.ndarray, np.ndarray]:
    """One-sided power spectrum of the mean-removed signal.

    Weighted so the bins sum exactly to the biased variance (Parseval);
    the DC bin is retained at index 0 with zero power.
    """
    n = x.size
    x0 = x - np.mean(x)
    spec = np.abs(np.fft.rfft(x0)) ** 2 / n**2
    weights = np.full(spec.size, 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    freqs = np.fft.rfftfreq(n, d=1.0 / rate_hz)
    return freqs, spec * weights


def peak_frequency(x: np.ndarray, rate_hz: float) -> float:
    """Frequency of the strongest non-DC spectral bin; 0 for a flat signal."""
    freqs, power = half_power_spectrum(x, rate_hz)
    if power.size < 2:
        return 0.0
    body = power[1:]
    if body.max() <= 0.0:
        return 0.0
    return float(freqs[1 + int(np.argmax(body))])


def local_maxima(x: np.ndarray) -> np.ndarray:
    """Indices of strict-left / non-strict-right local maxima (plateau starts)."""
    if x.size < 3:
        return np.empty(0, dtype=int)
    interior = (x[1:-1] > x[:-2]) & (x[1:-1] >= x[2:])
    return np.flatnonzero(interior) + 1


def moving_average(x: np.ndarray, width: int) -> np.ndarray:
    """Centered moving average with odd reflection at the ends.

    Odd (anti-symmetric) reflection continues straight lines exactly, so
    a linear trend passes through unchanged instead of flattening at the
    window edges.
    """
    width = max(1, min(int(width), x.size))
    left = (width - 1) // 2
    right = width - 1 - left
    padded = np.pad(x, (left, right), mode="reflect", reflect_type="odd")
    kernel = np.full(width, 1.0 / width)
    return np.convolve(padded, kernel, mode="valid")

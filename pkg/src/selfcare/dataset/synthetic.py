"""Synthetic multimodal signal generation with controllable noise bursts.

Each channel is an offset plus a sinusoidal carrier plus order-1
autoregressive noise.  Label-dependent effects can shift the offset and
modulate carrier amplitude/frequency, and scheduled bursts inject extra
AR noise into selected modalities so a noise context is detectable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from ..errors import ConfigError
from .types import Device, Modality, SignalChannel, SubjectRecord

# Burst noise std is multiplier * this factor * the channel's baseline std,
# so in-burst sample variance clears multiplier^2 * baseline variance with
# margin to spare even on short windows.
_BURST_STD_FACTOR = 1.25


@dataclass(frozen=True)
class ClassEffect:
    """How one label code perturbs a channel's generator."""

    offset: float = 0.0
    amp_scale: float = 1.0
    freq_scale: float = 1.0


_NEUTRAL = ClassEffect()


@dataclass(frozen=True)
class ChannelModel:
    modality: Modality
    rate_hz: float
    offset: float = 0.0
    amp: float = 0.0
    freq_hz: float = 0.0
    noise_scale: float = 0.0
    ar_coeff: float = 0.8
    class_effects: dict[int, ClassEffect] = field(default_factory=dict)

    @property
    def baseline_std(self) -> float:
        return float(np.sqrt(self.amp**2 / 2.0 + self.noise_scale**2))


@dataclass(frozen=True)
class Burst:
    start_s: float
    end_s: float
    modalities: tuple[Modality, ...]
    multiplier: float


@dataclass(frozen=True)
class SyntheticScenario:
    duration_s: float
    channels: tuple[ChannelModel, ...]
    bursts: tuple[Burst, ...] = ()
    #: (start_s, end_s, raw label code); gaps get code 0.
    label_schedule: tuple[tuple[float, float, int], ...] = ()
    label_rate_hz: float = 32.0
    device: Device = Device.WRIST
    subject_id: str = "SYN"

    def validate(self) -> None:
        if self.duration_s <= 0:
            raise ConfigError("scenario duration must be positive")
        if not self.channels:
            raise ConfigError("scenario declares no channels")
        modalities = set()
        for ch in self.channels:
            if ch.rate_hz <= 0:
                raise ConfigError(f"{ch.modality}: rate must be positive")
            if not 0.0 <= ch.ar_coeff < 1.0:
                raise ConfigError(f"{ch.modality}: ar_coeff must lie in [0, 1)")
            if ch.modality in modalities:
                raise ConfigError(f"duplicate channel {ch.modality}")
            modalities.add(ch.modality)
        for b in self.bursts:
            if not (0.0 <= b.start_s < b.end_s <= self.duration_s):
                raise ConfigError(
                    f"burst [{b.start_s}, {b.end_s}] outside [0, {self.duration_s}]"
                )
            if b.multiplier < 0:
                raise ConfigError("burst multiplier must be >= 0")
            for m in b.modalities:
                if Modality(m) not in modalities:
                    raise ConfigError(f"burst names unknown modality {m}")
        for start, end, code in self.label_schedule:
            if not (0.0 <= start < end <= self.duration_s):
                raise ConfigError(f"label interval [{start}, {end}] out of range")
            if int(code) < 0:
                raise ConfigError("label codes must be non-negative")
        if self.label_rate_hz <= 0:
            raise ConfigError("label rate must be positive")


def _codes_at(schedule, n: int, rate_hz: float) -> np.ndarray:
    codes = np.zeros(n, dtype=np.int32)
    t = np.arange(n) / rate_hz
    for start, end, code in schedule:
        codes[(t >= start) & (t < end)] = int(code)
    return codes


def _ar1(rng: np.random.Generator, n: int, a: float) -> np.ndarray:
    """Unit-variance stationary AR(1) series of length n."""
    x0 = rng.standard_normal()
    if a == 0.0:
        return rng.standard_normal(n)
    innov = rng.standard_normal(n) * np.sqrt(1.0 - a * a)
    out, _ = lfilter([1.0], [1.0, -a], innov, zi=np.asarray([a * x0]))
    return out


def generate_synthetic(scenario: SyntheticScenario, seed: int) -> SubjectRecord:
    """Generate one subject's record; pure function of (scenario, seed)."""
    scenario.validate()
    channels: dict[Modality, SignalChannel] = {}
    for idx, model in enumerate(scenario.channels):
        # Independent child streams per channel keep every other channel
        # bit-identical when one channel's burst schedule changes.
        ss = np.random.SeedSequence(seed, spawn_key=(idx,))
        phase_rng, ar_rng, burst_rng = (
            np.random.default_rng(c) for c in ss.spawn(3)
        )
        n = int(round(scenario.duration_s * model.rate_hz))
        codes = _codes_at(scenario.label_schedule, n, model.rate_hz)
        effects = [scenario_effect(model, c) for c in np.unique(codes)]
        by_code = {c: e for c, e in zip(np.unique(codes), effects)}

        offset = np.full(n, model.offset)
        amp = np.full(n, model.amp)
        freq = np.full(n, model.freq_hz)
        for code, eff in by_code.items():
            mask = codes == code
            offset[mask] += eff.offset
            amp[mask] *= eff.amp_scale
            freq[mask] *= eff.freq_scale

        phase0 = phase_rng.uniform(0.0, 2.0 * np.pi)
        phase = phase0 + 2.0 * np.pi * np.cumsum(freq) / model.rate_hz
        samples = offset + amp * np.sin(phase)
        if model.noise_scale > 0.0:
            samples = samples + model.noise_scale * _ar1(ar_rng, n, model.ar_coeff)
        else:
            _ar1(ar_rng, n, model.ar_coeff)  # keep draw order fixed

        t = np.arange(n) / model.rate_hz
        for burst in scenario.bursts:
            if model.modality not in {Modality(m) for m in burst.modalities}:
                continue
            mask = (t >= burst.start_s) & (t < burst.end_s)
            extra = _ar1(burst_rng, int(mask.sum()), model.ar_coeff)
            samples[mask] += (
                burst.multiplier * _BURST_STD_FACTOR * model.baseline_std * extra
            )
        channels[model.modality] = SignalChannel(
            model.modality, scenario.device, model.rate_hz, samples=samples
        )

    n_lab = int(round(scenario.duration_s * scenario.label_rate_hz))
    labels = _codes_at(scenario.label_schedule, n_lab, scenario.label_rate_hz)
    return SubjectRecord(
        scenario.subject_id, scenario.device, channels, labels, scenario.label_rate_hz
    )


def scenario_effect(model: ChannelModel, code: int) -> ClassEffect:
    return model.class_effects.get(int(code), _NEUTRAL)


def demo_wrist_scenario(
    subject_index: int, seed: int = 1234, duration_s: float = 720.0
) -> SyntheticScenario:
    """One subject of the bundled demonstration scenario.

    Motion bursts land mostly inside stress blocks and swamp the axes plus
    the pulse and skin-conductance channels, so a context gate that watches
    the accelerometer can route those windows to branches with a clean
    temperature fallback.  Per-subject offsets and block order vary, keeping
    leave-one-subject-out evaluation non-trivial.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(subject_index, 7)))
    temp_base = 33.0 + rng.normal(0.0, 0.12)
    eda_base = 1.5 + rng.normal(0.0, 0.15)
    pulse_scale = rng.uniform(0.96, 1.04)
    acc_amp = 0.08 * rng.uniform(0.9, 1.1)

    acc_effects = {2: ClassEffect(amp_scale=2.2)}
    channels = (
        ChannelModel(Modality.ACC_X, 32.0, 0.0, acc_amp, 1.2, 0.04, 0.8, acc_effects),
        ChannelModel(Modality.ACC_Y, 32.0, 0.0, acc_amp, 1.5, 0.04, 0.8, acc_effects),
        ChannelModel(Modality.ACC_Z, 32.0, 1.0, acc_amp, 0.9, 0.04, 0.8, acc_effects),
        ChannelModel(
            Modality.BVP,
            64.0,
            0.0,
            1.0,
            1.1 * pulse_scale,
            0.07,
            0.6,
            {
                2: ClassEffect(amp_scale=0.85, freq_scale=1.5),
                3: ClassEffect(amp_scale=1.1, freq_scale=1.25),
            },
        ),
        ChannelModel(
            Modality.EDA,
            4.0,
            eda_base,
            0.15,
            0.03,
            0.05,
            0.97,
            {
                2: ClassEffect(offset=1.0, amp_scale=1.9),
                3: ClassEffect(offset=0.45, amp_scale=1.4),
            },
        ),
        ChannelModel(
            Modality.TEMP,
            4.0,
            temp_base,
            0.05,
            0.01,
            0.18,
            0.995,
            {2: ClassEffect(offset=-0.45), 3: ClassEffect(offset=-0.15)},
        ),
    )

    # One long block per class, rest first: the late fusion's asymmetric
    # noise map lets scores rise far faster than they decay, so the rest
    # class acts as a fixed reference the other blocks must outscore.
    tail = [2, 3] if rng.uniform() < 0.5 else [3, 2]
    order = [1] + tail
    block_s = duration_s / len(order)
    schedule = []
    bursts = []
    axes = (Modality.ACC_X, Modality.ACC_Y, Modality.ACC_Z)
    for i, code in enumerate(order):
        start = i * block_s
        schedule.append((start, start + block_s, code))
        if code == 2:
            p_burst, lo, hi = 0.75, 0.5, 0.85
        else:
            p_burst, lo, hi = 0.4, 0.3, 0.6
        if rng.uniform() < p_burst:
            length = block_s * rng.uniform(lo, hi)
            b0 = start + rng.uniform(0.0, block_s - length)
            bursts.append(Burst(b0, b0 + length, axes, 8.0))
            bursts.append(Burst(b0, b0 + length, (Modality.BVP, Modality.EDA), 5.0))

    return SyntheticScenario(
        duration_s=duration_s,
        channels=channels,
        bursts=tuple(bursts),
        label_schedule=tuple(schedule),
        label_rate_hz=32.0,
        device=Device.WRIST,
        subject_id=f"SYN{subject_index + 1:02d}",
    )


def synthetic_wrist_store(
    n_subjects: int = 6, seed: int = 1234, duration_s: float = 720.0
) -> dict[str, dict[Device, SubjectRecord]]:
    """Demonstration store: n wrist subjects from demo_wrist_scenario."""
    if n_subjects < 2:
        raise ConfigError("a usable store needs at least 2 subjects")
    store: dict[str, dict[Device, SubjectRecord]] = {}
    for i in range(n_subjects):
        scenario = demo_wrist_scenario(i, seed=seed, duration_s=duration_s)
        record = generate_synthetic(scenario, seed=seed + 7919 * i)
        store[scenario.subject_id] = {Device.WRIST: record}
    return store

"""On-disk dataset store: a manifest plus flat binary channel files.

Layout::

    <root>/manifest.json
    <root>/<subject>/<device>/<file>.bin   (little-endian float32 samples)
    <root>/<subject>/<device>/labels.bin   (little-endian int32 codes)

The manifest declares every channel's modality, rate and sample count.
Validation happens eagerly at load time from file sizes alone; sample data
is only read when a channel is first used.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import FormatError, IntegrityError
from .types import (
    Device,
    Modality,
    RAW_MODALITIES,
    SignalChannel,
    SubjectRecord,
)

MANIFEST_NAME = "manifest.json"

_F32_BYTES = 4
_I32_BYTES = 4


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise FormatError(message)


def _check_file(root: Path, rel: str, expect_bytes: int, what: str) -> Path:
    path = root / rel
    if not path.is_file():
        raise IntegrityError(f"{what}: file {rel} missing")
    actual = path.stat().st_size
    if actual != expect_bytes:
        raise IntegrityError(
            f"{what}: file {rel} holds {actual} bytes, expected {expect_bytes}"
        )
    return path


def load_store(root: str | Path) -> dict[str, dict[Device, SubjectRecord]]:
    """Load a dataset store, validating structure before any sample I/O.

    Returns ``{subject_id: {device: SubjectRecord}}`` with lazily loaded
    channels.  Raises FormatError for a missing or malformed manifest and
    IntegrityError when a binary file disagrees with its declaration.
    """
    root = Path(root)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise FormatError(f"no {MANIFEST_NAME} under {root}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{MANIFEST_NAME} is not valid JSON: {exc}") from exc

    _require(isinstance(manifest, dict), "manifest must be a JSON object")
    subjects = manifest.get("subjects")
    _require(isinstance(subjects, dict) and subjects, "manifest lacks a non-empty 'subjects' map")

    out: dict[str, dict[Device, SubjectRecord]] = {}
    for subject_id, devices in subjects.items():
        _require(isinstance(devices, dict) and devices, f"{subject_id}: empty device map")
        out[subject_id] = {}
        for device_name, decl in devices.items():
            try:
                device = Device(device_name)
            except ValueError:
                raise FormatError(f"{subject_id}: unknown device '{device_name}'") from None
            record = _load_device(root, subject_id, device, decl)
            out[subject_id][device] = record
    return out


def _load_device(root: Path, subject_id: str, device: Device, decl) -> SubjectRecord:
    where = f"{subject_id}/{device.value}"
    _require(isinstance(decl, dict), f"{where}: device entry must be an object")
    chan_decls = decl.get("channels")
    _require(isinstance(chan_decls, list) and chan_decls, f"{where}: no channels declared")
    label_decl = decl.get("labels")
    _require(isinstance(label_decl, dict), f"{where}: no labels declared")

    channels: dict[Modality, SignalChannel] = {}
    for cd in chan_decls:
        _require(isinstance(cd, dict), f"{where}: channel entry must be an object")
        for key in ("modality", "rate_hz", "sample_count", "dtype", "file"):
            _require(key in cd, f"{where}: channel entry lacks '{key}'")
        _require(cd["dtype"] == "f32le", f"{where}: unsupported channel dtype '{cd['dtype']}'")
        try:
            modality = Modality(cd["modality"])
        except ValueError:
            raise FormatError(f"{where}: unknown modality '{cd['modality']}'") from None
        _require(modality in RAW_MODALITIES, f"{where}: modality {modality} cannot be stored")
        if modality in channels:
            raise FormatError(f"{where}: duplicate channel {modality}")
        count = int(cd["sample_count"])
        _require(count > 0, f"{where}/{modality}: sample_count must be positive")
        rate = float(cd["rate_hz"])
        if rate <= 0:
            raise FormatError(f"{where}/{modality}: rate_hz must be positive")
        path = _check_file(root, cd["file"], count * _F32_BYTES, f"{where}/{modality}")
        channels[modality] = SignalChannel(
            modality, device, rate, source=path, sample_count=count
        )

    for key in ("rate_hz", "sample_count", "dtype", "file"):
        _require(key in label_decl, f"{where}: labels entry lacks '{key}'")
    _require(label_decl["dtype"] == "i32le", f"{where}: labels dtype must be i32le")
    label_rate = float(label_decl["rate_hz"])
    if label_rate <= 0:
        raise FormatError(f"{where}: label rate_hz must be positive")
    label_count = int(label_decl["sample_count"])
    _require(label_count > 0, f"{where}: label sample_count must be positive")
    label_path = _check_file(
        root, label_decl["file"], label_count * _I32_BYTES, f"{where}/labels"
    )

    _check_alignment(where, channels, label_rate, label_count)

    labels = np.fromfile(label_path, dtype="<i4")
    if labels.size != label_count:
        raise IntegrityError(
            f"{where}/labels: {labels.size} codes on disk, {label_count} declared"
        )
    return SubjectRecord(subject_id, device, channels, labels, label_rate)


def _check_alignment(
    where: str,
    channels: dict[Modality, SignalChannel],
    label_rate: float,
    label_count: int,
) -> None:
    """All declared durations must agree within one slowest-channel period."""
    durations = [ch.n_samples / ch.rate_hz for ch in channels.values()]
    durations.append(label_count / label_rate)
    slowest = min(min(ch.rate_hz for ch in channels.values()), label_rate)
    tolerance = 1.0 / slowest
    if max(durations) - min(durations) > tolerance + 1e-9:
        raise IntegrityError(
            f"{where}: channel durations span "
            f"{min(durations):.3f}s..{max(durations):.3f}s, "
            f"more than one sample period ({tolerance:.3f}s) apart"
        )


def write_store(root: str | Path, data: dict[str, dict[Device, SubjectRecord]]) -> Path:
    """Write records as a store; loading it back yields identical bytes."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    subjects: dict[str, dict] = {}
    for subject_id in sorted(data):
        subjects[subject_id] = {}
        for device in sorted(data[subject_id], key=lambda d: d.value):
            record = data[subject_id][device]
            devdir = root / subject_id / device.value
            devdir.mkdir(parents=True, exist_ok=True)
            chan_decls = []
            for modality in sorted(record.channels, key=lambda m: m.value):
                ch = record.channels[modality]
                rel = f"{subject_id}/{device.value}/{modality.value.lower()}.bin"
                ch.samples.astype("<f4").tofile(root / rel)
                chan_decls.append(
                    {
                        "modality": modality.value,
                        "rate_hz": ch.rate_hz,
                        "sample_count": int(ch.n_samples),
                        "dtype": "f32le",
                        "file": rel,
                    }
                )
            label_rel = f"{subject_id}/{device.value}/labels.bin"
            record.labels.astype("<i4").tofile(root / label_rel)
            subjects[subject_id][device.value] = {
                "channels": chan_decls,
                "labels": {
                    "rate_hz": record.label_rate_hz,
                    "sample_count": int(record.labels.size),
                    "dtype": "i32le",
                    "file": label_rel,
                },
            }
    manifest_path = root / MANIFEST_NAME
    manifest_path.write_text(json.dumps({"subjects": subjects}, indent=2) + "\n")
    return manifest_path

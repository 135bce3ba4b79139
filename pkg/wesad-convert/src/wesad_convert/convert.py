"""Convert serialized WESAD subject records to a columnar binary store.

Each subject of the source distribution ships as ``<root>/SX/SX.pkl``, a
pickled dict with per-device signal arrays and one protocol-label track.
Conversion rewrites every channel as a raw little-endian float32 file and
every label track as little-endian int32, plus a manifest declaring
modality, rate, and sample count per file.  No samples are touched:
no resampling, no filtering, no label remapping.

Output layout::

    <out>/manifest.json
    <out>/report.json
    <out>/<subject>/<device>/<modality>.bin
    <out>/<subject>/<device>/labels.bin
"""

from __future__ import annotations

import hashlib
import json
import pickle
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ConversionError(Exception):
    """A subject record is missing, unreadable, or malformed."""


#: The 15 subject ids of the public distribution (S1 and S12 were
#: discarded by the dataset authors due to sensor malfunction).
SUBJECT_IDS: tuple[str, ...] = tuple(
    f"S{i}" for i in range(2, 18) if i != 12
)

#: All chest channels and the protocol labels share one clock.
CHEST_RATE_HZ = 700.0
LABEL_RATE_HZ = 700.0

#: Wrist rates as documented by the source distribution, keyed by the
#: source signal name.  The store manifest is the downstream consumer's
#: only source of rate truth, so these are recorded there verbatim.
WRIST_RATES_HZ: dict[str, float] = {
    "ACC": 32.0,
    "BVP": 64.0,
    "EDA": 4.0,
    "TEMP": 4.0,
}

_ACC_AXES = ("ACC_X", "ACC_Y", "ACC_Z")

#: Source signal name -> output modality names per device.  Three-axis
#: accelerometry is split into one file per axis.
_CHEST_KEY_MAP: dict[str, tuple[str, ...]] = {
    "ACC": _ACC_AXES,
    "ECG": ("ECG",),
    "EMG": ("EMG",),
    "EDA": ("EDA",),
    "Temp": ("TEMP",),
    "Resp": ("RESP",),
}
_WRIST_KEY_MAP: dict[str, tuple[str, ...]] = {
    "ACC": _ACC_AXES,
    "BVP": ("BVP",),
    "EDA": ("EDA",),
    "TEMP": ("TEMP",),
}

#: float32 samples and int32 labels are both four bytes wide.
_SAMPLE_BYTES = 4


@dataclass(frozen=True)
class FileEntry:
    """One output file: a channel's samples or a device's label track."""

    device: str
    modality: str | None
    rate_hz: float
    sample_count: int
    file: str
    byte_length: int
    sha256: str

    def validate(self) -> None:
        expected = self.sample_count * _SAMPLE_BYTES
        if self.byte_length != expected:
            raise ConversionError(
                f"{self.file}: {self.byte_length} bytes for "
                f"{self.sample_count} samples, expected {expected}"
            )


@dataclass(frozen=True)
class SubjectReport:
    subject_id: str
    files: tuple[FileEntry, ...]
    label_histogram: dict[int, int]

    def validate(self) -> None:
        for entry in self.files:
            entry.validate()


@dataclass(frozen=True)
class ConversionReport:
    subjects: tuple[SubjectReport, ...]

    def validate(self) -> None:
        for subject in self.subjects:
            subject.validate()

    def payload(self) -> dict:
        out: dict = {"subjects": {}}
        for subject in self.subjects:
            per_device: dict = {}
            for entry in subject.files:
                dev = per_device.setdefault(
                    entry.device, {"channels": [], "labels": None}
                )
                record = {
                    "rate_hz": entry.rate_hz,
                    "sample_count": entry.sample_count,
                    "file": entry.file,
                    "byte_length": entry.byte_length,
                    "sha256": entry.sha256,
                }
                if entry.modality is None:
                    dev["labels"] = record
                else:
                    dev["channels"].append({"modality": entry.modality, **record})
            out["subjects"][subject.subject_id] = {
                "devices": per_device,
                "label_histogram": {
                    str(code): count
                    for code, count in sorted(subject.label_histogram.items())
                },
            }
        return out


def _load_record(source: Path, subject_id: str) -> dict:
    path = source / subject_id / f"{subject_id}.pkl"
    if not path.is_file():
        raise ConversionError(f"{subject_id}: record {path} missing")
    try:
        with path.open("rb") as fh:
            # The distribution's pickles predate Python 3; latin-1 keeps
            # their byte strings decodable and is a no-op otherwise.
            record = pickle.load(fh, encoding="latin1")
    except Exception as exc:
        raise ConversionError(f"{subject_id}: unreadable record: {exc}") from exc
    if not isinstance(record, dict) or "signal" not in record or "label" not in record:
        raise ConversionError(
            f"{subject_id}: record lacks 'signal'/'label' entries"
        )
    signal = record["signal"]
    if not isinstance(signal, dict) or "chest" not in signal or "wrist" not in signal:
        raise ConversionError(f"{subject_id}: record lacks chest/wrist signals")
    return record


def _columns(subject_id: str, device: str, key: str, raw, names) -> np.ndarray:
    """Return the signal as (n_samples, n_names) float64 columns."""
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[-1] == 1:
        arr = arr[..., 0]
    if len(names) == 1:
        if arr.ndim == 2 and arr.shape[1] == 1:
            arr = arr[:, 0]
        if arr.ndim != 1:
            raise ConversionError(
                f"{subject_id}: {device} {key} has shape {arr.shape}, expected one column"
            )
        arr = arr[:, None]
    else:
        if arr.ndim != 2 or arr.shape[1] != len(names):
            raise ConversionError(
                f"{subject_id}: {device} {key} has shape {arr.shape}, "
                f"expected {len(names)} columns"
            )
    if arr.shape[0] == 0:
        raise ConversionError(f"{subject_id}: {device} {key} is empty")
    return arr


def _write(path: Path, payload: bytes) -> tuple[int, str]:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)
    return len(payload), hashlib.sha256(payload).hexdigest()


def _convert_device(
    out: Path,
    subject_id: str,
    device: str,
    signals: dict,
    key_map: dict[str, tuple[str, ...]],
    rate_for: dict[str, float] | float,
    labels: np.ndarray,
) -> tuple[list[FileEntry], list[dict], dict]:
    unknown = sorted(set(signals) - set(key_map))
    if unknown:
        raise ConversionError(
            f"{subject_id}: unknown {device} modality '{unknown[0]}'"
        )
    missing = sorted(set(key_map) - set(signals))
    if missing:
        raise ConversionError(
            f"{subject_id}: {device} record lacks '{missing[0]}'"
        )

    entries: list[FileEntry] = []
    channel_decls: list[dict] = []
    for key in key_map:
        names = key_map[key]
        rate = rate_for if isinstance(rate_for, float) else rate_for[key]
        columns = _columns(subject_id, device, key, signals[key], names)
        for idx, name in enumerate(names):
            rel = f"{subject_id}/{device}/{name.lower()}.bin"
            data = np.ascontiguousarray(columns[:, idx], dtype="<f4").tobytes()
            byte_length, digest = _write(out / rel, data)
            entries.append(
                FileEntry(device, name, rate, columns.shape[0], rel, byte_length, digest)
            )
            channel_decls.append(
                {
                    "modality": name,
                    "rate_hz": rate,
                    "sample_count": int(columns.shape[0]),
                    "dtype": "f32le",
                    "file": rel,
                }
            )
    channel_decls.sort(key=lambda d: d["modality"])

    label_rel = f"{subject_id}/{device}/labels.bin"
    label_bytes = np.ascontiguousarray(labels, dtype="<i4").tobytes()
    byte_length, digest = _write(out / label_rel, label_bytes)
    entries.append(
        FileEntry(device, None, LABEL_RATE_HZ, labels.size, label_rel, byte_length, digest)
    )
    label_decl = {
        "rate_hz": LABEL_RATE_HZ,
        "sample_count": int(labels.size),
        "dtype": "i32le",
        "file": label_rel,
    }
    return entries, channel_decls, label_decl


def _labels(subject_id: str, raw) -> np.ndarray:
    labels = np.asarray(raw)
    if labels.ndim != 1 or labels.size == 0:
        raise ConversionError(
            f"{subject_id}: label track has shape {labels.shape}, expected one row"
        )
    as_i32 = labels.astype("<i4")
    if not np.array_equal(labels, as_i32):
        raise ConversionError(f"{subject_id}: non-integer protocol label codes")
    return as_i32


def convert(
    source_dir: str | Path,
    out_dir: str | Path,
    subjects: tuple[str, ...] | None = None,
) -> ConversionReport:
    """Convert subject records under source_dir into a store at out_dir.

    Converts the full 15-subject distribution unless an explicit subject
    subset is given.  Writes manifest.json and report.json under out_dir
    and returns the report.  Raises ConversionError naming the offending
    subject on any missing, unreadable, or malformed record.
    """
    source = Path(source_dir)
    if not source.is_dir():
        raise ConversionError(f"source directory {source} missing")
    if subjects is None:
        wanted = SUBJECT_IDS
    else:
        wanted = tuple(subjects)
        if not wanted:
            raise ConversionError("empty subject list")
        for sid in wanted:
            if sid not in SUBJECT_IDS:
                raise ConversionError(
                    f"unknown subject id '{sid}' (distribution has {SUBJECT_IDS[0]}"
                    f"..{SUBJECT_IDS[-1]} without S12)"
                )
    missing = [sid for sid in wanted if not (source / sid / f"{sid}.pkl").is_file()]
    if len(missing) == len(wanted):
        raise ConversionError(f"no subject records under {source}")
    if missing:
        raise ConversionError(f"{missing[0]}: record missing under {source}")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    subject_reports: list[SubjectReport] = []
    manifest_subjects: dict = {}
    for sid in sorted(wanted):
        record = _load_record(source, sid)
        labels = _labels(sid, record["label"])
        files: list[FileEntry] = []
        devices: dict = {}
        for device, key_map, rates in (
            ("chest", _CHEST_KEY_MAP, CHEST_RATE_HZ),
            ("wrist", _WRIST_KEY_MAP, WRIST_RATES_HZ),
        ):
            entries, channel_decls, label_decl = _convert_device(
                out, sid, device, record["signal"][device], key_map, rates, labels
            )
            files.extend(entries)
            devices[device] = {"channels": channel_decls, "labels": label_decl}
        codes, counts = np.unique(labels, return_counts=True)
        histogram = {int(c): int(n) for c, n in zip(codes, counts)}
        subject_reports.append(SubjectReport(sid, tuple(files), histogram))
        manifest_subjects[sid] = devices

    # Key order mirrors the store writer of the downstream toolkit so a
    # load-then-rewrite round trip reproduces the manifest byte for byte.
    manifest = {"subjects": manifest_subjects}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    report = ConversionReport(tuple(subject_reports))
    report.validate()
    (out / "report.json").write_text(
        json.dumps(report.payload(), indent=2, sort_keys=True) + "\n"
    )
    return report

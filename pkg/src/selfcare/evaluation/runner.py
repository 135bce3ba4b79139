"""LOSO drivers: branch/family benchmark grids and the fused pipeline.

Folds (and benchmark branches) are independent, so with jobs > 1 they run
in a process pool; results are reduced in fold order by the parent, which
keeps reports identical to a sequential run.
"""

from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..dataset.types import (
    Device,
    SubjectRecord,
    THREE_CLASS_NAMES,
    TWO_CLASS_NAMES,
    WindowedSegment,
    code_to_class,
)
from ..dsp import SegmentationSpec, preprocess, segment
from ..errors import DataError
from ..features.types import DEFAULT_CONFIG, FeatureConfig
from ..fusion.branches import CATALOG
from ..fusion.config import FusionSettings, default_settings
from ..fusion.kalman import KalmanFuser
from ..fusion.pipeline import FeatureCache, selfcare_classify, train_pipeline
from ..learners.models import FAMILIES, LearnerConfig, fit, predict_proba
from .loso import loso_folds
from .metrics import ConfusionMatrix, metrics
from .report import EvalReport, SegmentPrediction, config_fingerprint, settings_payload


def class_names_for(task: int) -> tuple[str, ...]:
    return THREE_CLASS_NAMES if task == 3 else TWO_CLASS_NAMES


def prepare_segments(
    store: dict[str, dict[Device, SubjectRecord]],
    device: Device,
    segmentation: SegmentationSpec | None = None,
) -> dict[str, list[WindowedSegment]]:
    """Filter and window every subject's recording for one device."""
    spec = segmentation or SegmentationSpec()
    out: dict[str, list[WindowedSegment]] = {}
    for subject_id in sorted(store):
        record = store[subject_id].get(device)
        if record is None:
            raise DataError(f"{subject_id} has no {device.value} recording")
        out[subject_id] = segment(preprocess(record), spec)
    return out


def fold_segments(
    segments_by_subject: dict[str, list[WindowedSegment]],
    train_ids: tuple[str, ...],
    test_id: str,
) -> tuple[list[WindowedSegment], list[WindowedSegment]]:
    train = [seg for sid in train_ids for seg in segments_by_subject[sid]]
    return train, list(segments_by_subject[test_id])


def _labels(segments, task: int) -> np.ndarray:
    return np.asarray([code_to_class(s.label, task) for s in segments], dtype=np.int64)


def _selfcare_fold(
    train: list[WindowedSegment],
    test: list[WindowedSegment],
    settings: FusionSettings,
    seed: int,
    feature_config: FeatureConfig,
    cache: FeatureCache | None = None,
):
    """Train on one fold and classify its held-out subject in time order."""
    cache = cache or FeatureCache(feature_config)
    task = settings.n_classes
    names = class_names_for(task)
    bundle = train_pipeline(
        train, settings, seed=seed, cache=cache, feature_config=feature_config
    )
    fuser = KalmanFuser(settings.kalman) if settings.backend == "kalman" else None
    y_true = []
    y_pred = []
    predictions = []
    gate_counts: dict[str, int] = {}
    for seg in test:
        predicted, decision, _ = selfcare_classify(seg, bundle, cache=cache, fuser=fuser)
        truth = code_to_class(seg.label, task)
        y_true.append(truth)
        y_pred.append(predicted)
        for branch_id in decision.selected:
            gate_counts[branch_id] = gate_counts.get(branch_id, 0) + 1
        predictions.append(
            SegmentPrediction(
                seg.subject_id, seg.start_s, seg.label, truth, predicted, decision.selected
            )
        )
    cm = ConfusionMatrix.from_predictions(y_true, y_pred, task, names)
    return cm, predictions, gate_counts


def _selfcare_fold_args(args):
    return _selfcare_fold(*args)


def run_selfcare_on_segments(
    segments_by_subject: dict[str, list[WindowedSegment]],
    device: Device,
    task: int,
    backend: str = "kalman",
    settings: FusionSettings | None = None,
    delta: float | None = None,
    seed: int = 0,
    feature_config: FeatureConfig = DEFAULT_CONFIG,
    progress=None,
    cache: FeatureCache | None = None,
    jobs: int = 1,
) -> EvalReport:
    """Full selective-fusion LOSO evaluation over pre-built segments."""
    if settings is None:
        settings = default_settings(device, task, backend)
    if settings.backend != backend:
        settings = dataclasses.replace(settings, backend=backend)
    if delta is not None:
        settings = dataclasses.replace(settings, delta=float(delta))
    settings.validate()

    names = class_names_for(task)
    folds = loso_folds(segments_by_subject)
    started = time.perf_counter()

    fold_outputs = []
    if jobs > 1:
        work = [
            (*fold_segments(segments_by_subject, train_ids, test_id), settings, seed, feature_config)
            for train_ids, test_id in folds
        ]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for (_, test_id), result in zip(folds, pool.map(_selfcare_fold_args, work)):
                if progress is not None:
                    progress(f"fold {test_id}: done")
                fold_outputs.append(result)
    else:
        cache = cache or FeatureCache(feature_config)
        for train_ids, test_id in folds:
            if progress is not None:
                progress(f"fold {test_id}: training on {len(train_ids)} subjects")
            train, test = fold_segments(segments_by_subject, train_ids, test_id)
            fold_outputs.append(
                _selfcare_fold(train, test, settings, seed, feature_config, cache)
            )

    fold_subjects = tuple(test_id for _, test_id in folds)
    fold_confusions = tuple(out[0] for out in fold_outputs)
    predictions = tuple(p for out in fold_outputs for p in out[1])
    gate_counts: dict[str, int] = {}
    for out in fold_outputs:
        for branch_id, count in out[2].items():
            gate_counts[branch_id] = gate_counts.get(branch_id, 0) + count

    pooled = ConfusionMatrix.empty(task, names)
    for cm in fold_confusions:
        pooled = pooled.add(cm)
    return EvalReport(
        device=device.value,
        task=task,
        backend=settings.backend,
        seed=seed,
        config_fingerprint=config_fingerprint(settings),
        config=settings_payload(settings),
        class_names=names,
        fold_subjects=fold_subjects,
        fold_confusions=fold_confusions,
        pooled=pooled,
        gate_counts=gate_counts,
        predictions=predictions,
        runtime_s=time.perf_counter() - started,
    )


def run_selfcare(
    store: dict[str, dict[Device, SubjectRecord]],
    device: Device,
    task: int,
    backend: str = "kalman",
    settings: FusionSettings | None = None,
    delta: float | None = None,
    seed: int = 0,
    segmentation: SegmentationSpec | None = None,
    feature_config: FeatureConfig = DEFAULT_CONFIG,
    progress=None,
    jobs: int = 1,
) -> EvalReport:
    segments_by_subject = prepare_segments(store, device, segmentation)
    return run_selfcare_on_segments(
        segments_by_subject,
        device,
        task,
        backend,
        settings,
        delta,
        seed,
        feature_config,
        progress,
        jobs=jobs,
    )


@dataclass(frozen=True)
class BenchmarkRow:
    branch_id: str
    family: str
    accuracy: float
    macro_f1: float


@dataclass(frozen=True)
class BenchmarkTable:
    device: str
    task: int
    seed: int
    families: tuple[str, ...]
    rows: tuple[BenchmarkRow, ...]

    def row(self, branch_id: str, family: str) -> BenchmarkRow:
        for r in self.rows:
            if r.branch_id == branch_id and r.family == family:
                return r
        raise DataError(f"no benchmark row for ({branch_id}, {family})")


def _benchmark_branch(
    branch_id: str,
    X_all: np.ndarray,
    y_all: np.ndarray,
    slices: dict[str, np.ndarray],
    folds,
    families: tuple[str, ...],
    task: int,
    names: tuple[str, ...],
    seed: int,
) -> list[BenchmarkRow]:
    rows = []
    for family in families:
        pooled = ConfusionMatrix.empty(task, names)
        config = LearnerConfig(family=family, seed=seed)
        for train_ids, test_id in folds:
            train_idx = np.concatenate([slices[sid] for sid in train_ids])
            test_idx = slices[test_id]
            model = fit(config, X_all[train_idx], y_all[train_idx])
            proba = predict_proba(model, X_all[test_idx])
            y_pred = model.classes_[np.argmax(proba, axis=1)]
            pooled = pooled.add(
                ConfusionMatrix.from_predictions(y_all[test_idx], y_pred, task, names)
            )
        summary = metrics(pooled)
        rows.append(BenchmarkRow(branch_id, family, summary.accuracy, summary.macro_f1))
    return rows


def _benchmark_branch_args(args):
    return _benchmark_branch(*args)


def run_benchmark_on_segments(
    segments_by_subject: dict[str, list[WindowedSegment]],
    device: Device,
    task: int,
    branch_ids: tuple[str, ...] | None = None,
    families: tuple[str, ...] = FAMILIES,
    seed: int = 0,
    feature_config: FeatureConfig = DEFAULT_CONFIG,
    progress=None,
    cache: FeatureCache | None = None,
    jobs: int = 1,
) -> BenchmarkTable:
    """Early-fusion LOSO grid: one pooled score per (branch, family)."""
    names = class_names_for(task)
    branches = (
        tuple(CATALOG.branch(b) for b in branch_ids)
        if branch_ids is not None
        else CATALOG.device_branches(device)
    )
    for family in families:
        if family not in FAMILIES:
            raise DataError(f"unknown learner family '{family}'")
    folds = loso_folds(segments_by_subject)
    cache = cache or FeatureCache(feature_config)
    subjects = sorted(segments_by_subject)
    ordered = [seg for sid in subjects for seg in segments_by_subject[sid]]
    y_all = _labels(ordered, task)
    slices: dict[str, np.ndarray] = {}
    offset = 0
    for sid in subjects:
        n = len(segments_by_subject[sid])
        slices[sid] = np.arange(offset, offset + n)
        offset += n

    families = tuple(families)
    rows: list[BenchmarkRow] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            work = (
                (
                    branch.id,
                    cache.matrix(ordered, branch.modalities, branch),
                    y_all,
                    slices,
                    folds,
                    families,
                    task,
                    names,
                    seed,
                )
                for branch in branches
            )
            for branch, result in zip(branches, pool.map(_benchmark_branch_args, work)):
                if progress is not None:
                    progress(f"{branch.id}: done")
                rows.extend(result)
    else:
        for branch in branches:
            if progress is not None:
                progress(f"{branch.id} ({len(families)} families)")
            X_all = cache.matrix(ordered, branch.modalities, branch)
            rows.extend(
                _benchmark_branch(
                    branch.id, X_all, y_all, slices, folds, families, task, names, seed
                )
            )
    return BenchmarkTable(device.value, task, seed, families, tuple(rows))


def run_benchmark(
    store: dict[str, dict[Device, SubjectRecord]],
    device: Device,
    task: int,
    branch_ids: tuple[str, ...] | None = None,
    families: tuple[str, ...] = FAMILIES,
    seed: int = 0,
    segmentation: SegmentationSpec | None = None,
    feature_config: FeatureConfig = DEFAULT_CONFIG,
    progress=None,
    jobs: int = 1,
) -> BenchmarkTable:
    segments_by_subject = prepare_segments(store, device, segmentation)
    return run_benchmark_on_segments(
        segments_by_subject,
        device,
        task,
        branch_ids,
        families,
        seed,
        feature_config,
        progress,
        jobs=jobs,
    )


def majority_baseline(
    segments_by_subject: dict[str, list[WindowedSegment]], task: int
) -> float:
    """Pooled LOSO accuracy of always predicting the training majority class."""
    folds = loso_folds(segments_by_subject)
    correct = 0
    total = 0
    for train_ids, test_id in folds:
        train, test = fold_segments(segments_by_subject, train_ids, test_id)
        y_train = _labels(train, task)
        majority = int(np.argmax(np.bincount(y_train, minlength=task)))
        y_test = _labels(test, task)
        correct += int(np.sum(y_test == majority))
        total += y_test.size
    if total == 0:
        raise DataError("no test segments")
    return correct / total

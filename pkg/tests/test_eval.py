"""LOSO harness, metric, and report tests."""

import json
from types import SimpleNamespace

import numpy as np
import pytest

from helpers import make_segment, metrics_oracle
from selfcare.dataset.types import Device
from selfcare.errors import DataError
from selfcare.evaluation.loso import loso_folds
from selfcare.evaluation.metrics import ConfusionMatrix, metrics
from selfcare.evaluation.report import (
    EvalReport,
    config_fingerprint,
    report_payload,
)
from selfcare.evaluation.runner import (
    majority_baseline,
    prepare_segments,
    run_benchmark_on_segments,
    run_selfcare_on_segments,
)
from selfcare.fusion.config import default_settings


# ---------------------------------------------------------------------------
# Metrics


def test_metrics_perfect_diagonal():
    cm = ConfusionMatrix(np.diag([7, 5, 9]))
    summary = metrics(cm)
    assert summary.accuracy == 1.0
    assert summary.macro_f1 == 1.0
    assert summary.precision == (1.0, 1.0, 1.0)
    assert summary.recall == (1.0, 1.0, 1.0)


def test_metrics_two_class_hand_case():
    cm = ConfusionMatrix(np.asarray([[50, 10], [5, 35]]))
    summary = metrics(cm)
    assert summary.accuracy == pytest.approx(0.85)
    p1, r1 = 50 / 55, 50 / 60
    p2, r2 = 35 / 45, 35 / 40
    f1_1 = 2 * p1 * r1 / (p1 + r1)
    f1_2 = 2 * p2 * r2 / (p2 + r2)
    assert summary.precision == pytest.approx((p1, p2))
    assert summary.recall == pytest.approx((r1, r2))
    assert summary.macro_f1 == pytest.approx((f1_1 + f1_2) / 2)


def test_metrics_degenerate_class_contributes_zero():
    # The third class never occurs and is never predicted; its F1 term is
    # zero but the macro divisor stays at the class count.
    cm = ConfusionMatrix(np.asarray([[5, 0, 0], [0, 5, 0], [0, 0, 0]]))
    summary = metrics(cm)
    assert summary.accuracy == 1.0
    assert summary.f1 == (1.0, 1.0, 0.0)
    assert summary.macro_f1 == pytest.approx(2.0 / 3.0)


def test_metrics_require_observations():
    with pytest.raises(DataError):
        metrics(ConfusionMatrix.empty(3))


def test_metrics_match_recount_oracle():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        n_classes = int(rng.integers(2, 5))
        n = int(rng.integers(1, 200))
        y_true = rng.integers(0, n_classes, size=n)
        y_pred = rng.integers(0, n_classes, size=n)
        cm = ConfusionMatrix.from_predictions(y_true, y_pred, n_classes)
        summary = metrics(cm)
        acc, macro_f1, precisions, recalls = metrics_oracle(
            y_true.tolist(), y_pred.tolist(), n_classes
        )
        assert summary.accuracy == pytest.approx(acc, abs=1e-12)
        assert summary.macro_f1 == pytest.approx(macro_f1, abs=1e-12)
        assert summary.precision == pytest.approx(tuple(precisions), abs=1e-12)
        assert summary.recall == pytest.approx(tuple(recalls), abs=1e-12)


def test_confusion_matrix_contracts():
    cm = ConfusionMatrix.from_predictions([0, 1, 1, 2], [0, 1, 2, 2], 3)
    assert cm.total == 4
    assert cm.counts[1, 2] == 1 and cm.counts[2, 2] == 1
    merged = cm.add(cm)
    assert merged.total == 8
    with pytest.raises(DataError):
        cm.add(ConfusionMatrix.empty(2))
    with pytest.raises(DataError):
        ConfusionMatrix(np.asarray([[1, 2, 3]]))
    with pytest.raises(DataError):
        ConfusionMatrix(np.asarray([[1, -1], [0, 2]]))
    with pytest.raises(DataError):
        ConfusionMatrix(np.asarray([[0.5, 0.0], [0.0, 1.0]]))
    with pytest.raises(DataError):
        ConfusionMatrix(np.eye(2, dtype=int), class_names=("only",))
    with pytest.raises(DataError):
        ConfusionMatrix.from_predictions([0, 3], [0, 1], 3)
    with pytest.raises(DataError):
        ConfusionMatrix.from_predictions([0, 1], [0], 2)


# ---------------------------------------------------------------------------
# Fold construction


def test_loso_fold_shapes():
    ids = [f"S{i:02d}" for i in range(2, 18) if i != 12]
    assert len(ids) == 15
    folds = loso_folds(ids)
    assert len(folds) == 15
    test_ids = [test for _, test in folds]
    assert sorted(test_ids) == sorted(ids)
    assert len(set(test_ids)) == 15
    for train, test in folds:
        assert test not in train
        assert sorted(train + (test,)) == sorted(ids)


def test_loso_two_subjects():
    folds = loso_folds({"A": [], "B": []})
    assert folds == [(("B",), "A"), (("A",), "B")]


def test_loso_validation():
    with pytest.raises(DataError):
        loso_folds(["only"])
    with pytest.raises(DataError):
        loso_folds(["A", "A"])


def test_fold_isolation_by_id_tracing(monkeypatch):
    import selfcare.evaluation.runner as runner_module

    def fake_segments(subject_id, n):
        return [
            SimpleNamespace(subject_id=subject_id, start_s=30.0 * i, label=1 + (i % 2))
            for i in range(n)
        ]

    segments_by_subject = {
        "S1": fake_segments("S1", 4),
        "S2": fake_segments("S2", 3),
        "S3": fake_segments("S3", 5),
    }
    seen_train_sets = []

    def fake_train(train, settings, seed=0, cache=None, feature_config=None):
        subjects = {seg.subject_id for seg in train}
        seen_train_sets.append(subjects)
        return subjects

    def fake_classify(segment, bundle, cache=None, fuser=None):
        # The bundle carries its fold's training subjects; the held-out
        # subject must never appear among them.
        assert segment.subject_id not in bundle
        return 0, SimpleNamespace(selected=("WB1",)), {}

    monkeypatch.setattr(runner_module, "train_pipeline", fake_train)
    monkeypatch.setattr(runner_module, "selfcare_classify", fake_classify)
    report = run_selfcare_on_segments(segments_by_subject, Device.WRIST, 3, backend="hard")
    assert report.fold_subjects == ("S1", "S2", "S3")
    assert seen_train_sets == [{"S2", "S3"}, {"S1", "S3"}, {"S1", "S2"}]
    assert report.n_segments == 12


# ---------------------------------------------------------------------------
# End-to-end runner on the tiny synthetic store


def test_run_selfcare_report_shape(tiny_segments):
    report = run_selfcare_on_segments(
        tiny_segments, Device.WRIST, 3, backend="soft", delta=0.05, seed=3
    )
    assert report.backend == "soft"
    assert report.config["delta"] == 0.05
    assert report.seed == 3
    assert report.fold_subjects == tuple(sorted(tiny_segments))
    assert report.n_segments == sum(len(s) for s in tiny_segments.values())
    assert len(report.predictions) == report.n_segments
    assert set(report.gate_counts) <= {"WB1", "WB2", "WB3"}
    assert 0.0 <= report.pooled_metrics.accuracy <= 1.0
    assert len(report.fold_metrics) == 2
    assert report.runtime_s > 0.0


def test_run_selfcare_seeded_determinism(tiny_segments):
    first = run_selfcare_on_segments(tiny_segments, Device.WRIST, 3, seed=11)
    second = run_selfcare_on_segments(tiny_segments, Device.WRIST, 3, seed=11)
    payload_a = report_payload(first)
    payload_b = report_payload(second)
    assert json.dumps(payload_a, sort_keys=True) == json.dumps(payload_b, sort_keys=True)
    assert [p.predicted_class for p in first.predictions] == [
        p.predicted_class for p in second.predictions
    ]


def test_report_payload_is_deterministic_content_only(tiny_segments):
    report = run_selfcare_on_segments(tiny_segments, Device.WRIST, 2, backend="hard")
    payload = report_payload(report)
    assert "runtime" not in json.dumps(payload)
    assert payload["pooled"]["confusion"] == report.pooled.counts.tolist()
    assert payload["n_segments"] == report.n_segments
    assert len(payload["folds"]) == 2
    for fold in payload["folds"]:
        cm = np.asarray(fold["confusion"])
        assert cm.shape == (2, 2)


def test_eval_report_validates_pooled_sum():
    cm_a = ConfusionMatrix(np.asarray([[2, 0], [0, 2]]))
    cm_b = ConfusionMatrix(np.asarray([[1, 1], [0, 1]]))
    good = cm_a.add(cm_b)
    base = dict(
        device="wrist",
        task=2,
        backend="kalman",
        seed=0,
        config_fingerprint="x",
        config={},
        class_names=("non_stress", "stress"),
        fold_subjects=("A", "B"),
        fold_confusions=(cm_a, cm_b),
    )
    EvalReport(**base, pooled=good)
    with pytest.raises(DataError):
        EvalReport(**base, pooled=cm_a)
    with pytest.raises(DataError):
        EvalReport(**{**base, "fold_subjects": ("A",)}, pooled=good)


def test_config_fingerprint_stability_and_sensitivity():
    import dataclasses

    a = config_fingerprint(default_settings(Device.WRIST, 3))
    b = config_fingerprint(default_settings(Device.WRIST, 3))
    assert a == b
    assert len(a) == 64 and set(a) <= set("0123456789abcdef")
    other = dataclasses.replace(default_settings(Device.WRIST, 3), delta=0.35)
    assert config_fingerprint(other) != a
    soft = default_settings(Device.WRIST, 3, backend="soft")
    assert config_fingerprint(soft) != a


def test_prepare_segments_requires_device_recording(tiny_store):
    with pytest.raises(DataError, match="chest"):
        prepare_segments(tiny_store, Device.CHEST)
    segments = prepare_segments(tiny_store, Device.WRIST)
    assert sorted(segments) == sorted(tiny_store)
    for subject_segments in segments.values():
        assert subject_segments
        assert all(seg.device == Device.WRIST for seg in subject_segments)


# ---------------------------------------------------------------------------
# Benchmarks and baselines


def _constant_wrist_segment(subject_id, label, start_s):
    channels = {
        "ACC_X": (np.full(1920, 0.1), 32.0),
        "ACC_Y": (np.full(1920, -0.2), 32.0),
        "ACC_Z": (np.full(1920, 0.97), 32.0),
        "EDA": (np.full(240, 0.5), 4.0),
    }
    return make_segment(
        channels, label=label, subject_id=subject_id, start_s=start_s
    )


def test_majority_baseline_counts():
    def subject(sid):
        return [
            SimpleNamespace(subject_id=sid, start_s=0.0, label=1),
            SimpleNamespace(subject_id=sid, start_s=30.0, label=1),
            SimpleNamespace(subject_id=sid, start_s=60.0, label=2),
        ]

    segments = {sid: subject(sid) for sid in ("A", "B", "C")}
    # Every training fold has baseline as its majority; each test subject
    # then scores two of three.
    assert majority_baseline(segments, 3) == pytest.approx(2.0 / 3.0)
    assert majority_baseline(segments, 2) == pytest.approx(2.0 / 3.0)


def test_benchmark_constant_features_hit_majority_prevalence():
    segments = {
        sid: [
            _constant_wrist_segment(sid, 1, 0.0),
            _constant_wrist_segment(sid, 1, 30.0),
            _constant_wrist_segment(sid, 2, 60.0),
        ]
        for sid in ("A", "B", "C")
    }
    table = run_benchmark_on_segments(
        segments, Device.WRIST, 3, branch_ids=("WB5",), families=("DT",)
    )
    row = table.row("WB5", "DT")
    # Constant features leave nothing to split on, so every model predicts
    # its training majority class.
    assert row.accuracy == pytest.approx(majority_baseline(segments, 3))


def test_benchmark_table_rows_and_errors(tiny_segments):
    table = run_benchmark_on_segments(
        tiny_segments, Device.WRIST, 3, branch_ids=("WB3", "WB5"), families=("DT",)
    )
    assert {r.branch_id for r in table.rows} == {"WB3", "WB5"}
    assert all(r.family == "DT" for r in table.rows)
    for row in table.rows:
        assert 0.0 <= row.accuracy <= 1.0
        assert 0.0 <= row.macro_f1 <= 1.0
    assert table.row("WB3", "DT").branch_id == "WB3"
    with pytest.raises(DataError):
        table.row("WB1", "DT")
    with pytest.raises(DataError):
        run_benchmark_on_segments(
            tiny_segments, Device.WRIST, 3, branch_ids=("WB3",), families=("XX",)
        )

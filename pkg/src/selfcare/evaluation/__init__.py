"""LOSO evaluation harness: folds, metrics, runners, reports."""

from .loso import loso_folds
from .metrics import ConfusionMatrix, MetricSummary, metrics
from .report import (
    EvalReport,
    SegmentPrediction,
    config_fingerprint,
    render_benchmark,
    render_figures,
    render_report,
    report_payload,
    settings_payload,
    write_benchmark,
    write_predictions_csv,
    write_report,
)
from .runner import (
    BenchmarkRow,
    BenchmarkTable,
    class_names_for,
    fold_segments,
    majority_baseline,
    prepare_segments,
    run_benchmark,
    run_benchmark_on_segments,
    run_selfcare,
    run_selfcare_on_segments,
)

__all__ = [
    "BenchmarkRow",
    "BenchmarkTable",
    "ConfusionMatrix",
    "EvalReport",
    "MetricSummary",
    "SegmentPrediction",
    "class_names_for",
    "config_fingerprint",
    "fold_segments",
    "loso_folds",
    "majority_baseline",
    "metrics",
    "prepare_segments",
    "render_benchmark",
    "render_figures",
    "render_report",
    "report_payload",
    "run_benchmark",
    "run_benchmark_on_segments",
    "run_selfcare",
    "run_selfcare_on_segments",
    "settings_payload",
    "write_benchmark",
    "write_predictions_csv",
    "write_report",
]

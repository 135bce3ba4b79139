"""Evaluation report assembly: JSON, text tables, figures, prediction CSV.

The serialized report.json holds only deterministic content, so repeated
runs with the same inputs and seed produce byte-identical files; wall-clock
runtime stays on the in-memory report object.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DataError
from ..fusion.config import FusionSettings
from .metrics import ConfusionMatrix, MetricSummary, metrics


@dataclass(frozen=True)
class SegmentPrediction:
    subject_id: str
    start_s: float
    label_code: int
    true_class: int
    predicted_class: int
    selected_branches: tuple[str, ...]


def settings_payload(settings: FusionSettings) -> dict:
    kal = settings.kalman
    return {
        "device": settings.device.value,
        "task": settings.n_classes,
        "delta": settings.delta,
        "backend": settings.backend,
        "shortlist": list(settings.shortlist_ids),
        "context": settings.context_source(),
        "kalman": {
            "x0": [float(v) for v in kal.x0],
            "epsilon": float(kal.epsilon),
            "gamma": [float(v) for v in kal.gamma],
            "p0_scale": float(kal.p0_scale),
            "q_var": float(kal.q_var),
            "r_map": kal.r_map if isinstance(kal.r_map, str) else "custom",
        },
    }


def config_fingerprint(settings: FusionSettings) -> str:
    canonical = json.dumps(settings_payload(settings), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass
class EvalReport:
    device: str
    task: int
    backend: str
    seed: int
    config_fingerprint: str
    config: dict
    class_names: tuple[str, ...]
    fold_subjects: tuple[str, ...]
    fold_confusions: tuple[ConfusionMatrix, ...]
    pooled: ConfusionMatrix
    gate_counts: dict[str, int] = field(default_factory=dict)
    predictions: tuple[SegmentPrediction, ...] = ()
    runtime_s: float = 0.0

    def __post_init__(self):
        if len(self.fold_subjects) != len(self.fold_confusions):
            raise DataError("fold subject and confusion counts differ")
        summed = np.zeros_like(self.pooled.counts)
        for cm in self.fold_confusions:
            summed = summed + cm.counts
        if not np.array_equal(summed, self.pooled.counts):
            raise DataError("pooled confusion does not equal the fold sum")

    @property
    def pooled_metrics(self) -> MetricSummary:
        return metrics(self.pooled)

    @property
    def fold_metrics(self) -> tuple[MetricSummary, ...]:
        return tuple(metrics(cm) for cm in self.fold_confusions)

    @property
    def fold_mean_accuracy(self) -> float:
        return float(np.mean([m.accuracy for m in self.fold_metrics]))

    @property
    def fold_mean_macro_f1(self) -> float:
        return float(np.mean([m.macro_f1 for m in self.fold_metrics]))

    @property
    def n_segments(self) -> int:
        return self.pooled.total


def report_payload(report: EvalReport) -> dict:
    pooled = report.pooled_metrics
    folds = []
    for subject, cm, summary in zip(
        report.fold_subjects, report.fold_confusions, report.fold_metrics
    ):
        folds.append(
            {
                "subject": subject,
                "confusion": cm.counts.tolist(),
                "accuracy": summary.accuracy,
                "macro_f1": summary.macro_f1,
            }
        )
    return {
        "device": report.device,
        "task": report.task,
        "backend": report.backend,
        "seed": report.seed,
        "config_fingerprint": report.config_fingerprint,
        "config": report.config,
        "class_names": list(report.class_names),
        "n_segments": report.n_segments,
        "folds": folds,
        "pooled": {
            "confusion": report.pooled.counts.tolist(),
            "accuracy": pooled.accuracy,
            "macro_f1": pooled.macro_f1,
            "precision": list(pooled.precision),
            "recall": list(pooled.recall),
            "f1": list(pooled.f1),
        },
        "fold_mean": {
            "accuracy": report.fold_mean_accuracy,
            "macro_f1": report.fold_mean_macro_f1,
        },
        "gate_counts": dict(sorted(report.gate_counts.items())),
    }


def render_report(report: EvalReport) -> str:
    pooled = report.pooled_metrics
    lines = [
        f"device={report.device} task={report.task}-class fusion={report.backend} "
        f"seed={report.seed}",
        f"segments={report.n_segments} folds={len(report.fold_subjects)} "
        f"classes={','.join(report.class_names)}",
        "",
        f"{'fold':<10} {'accuracy':>9} {'macro F1':>9}",
    ]
    for subject, summary in zip(report.fold_subjects, report.fold_metrics):
        lines.append(f"{subject:<10} {summary.accuracy * 100:>8.2f}% {summary.macro_f1 * 100:>8.2f}%")
    lines.append(
        f"{'pooled':<10} {pooled.accuracy * 100:>8.2f}% {pooled.macro_f1 * 100:>8.2f}%"
    )
    lines.append(
        f"{'fold mean':<10} {report.fold_mean_accuracy * 100:>8.2f}% "
        f"{report.fold_mean_macro_f1 * 100:>8.2f}%"
    )
    if report.gate_counts:
        picks = ", ".join(f"{k}:{v}" for k, v in sorted(report.gate_counts.items()))
        lines += ["", f"gate selections: {picks}"]
    lines += ["", "pooled confusion (rows true, columns predicted):"]
    width = max(len(n) for n in report.class_names) + 2
    header = " " * width + "".join(f"{n:>{width}}" for n in report.class_names)
    lines.append(header)
    for name, row in zip(report.class_names, report.pooled.counts):
        lines.append(f"{name:<{width}}" + "".join(f"{int(v):>{width}}" for v in row))
    return "\n".join(lines)


def _new_figure(width: float, height: float):
    from matplotlib.figure import Figure

    return Figure(figsize=(width, height), dpi=110)


def render_figures(report: EvalReport, out_dir: Path) -> list[Path]:
    """Fold-accuracy bars and a pooled confusion heatmap as PNG files."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    fig = _new_figure(max(6.0, 0.6 * len(report.fold_subjects) + 2), 3.6)
    ax = fig.add_subplot(111)
    accs = [m.accuracy * 100 for m in report.fold_metrics]
    ax.bar(range(len(accs)), accs, color="#4878a8")
    ax.axhline(report.pooled_metrics.accuracy * 100, color="#a84848", linestyle="--", label="pooled")
    ax.set_xticks(range(len(accs)))
    ax.set_xticklabels(report.fold_subjects, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("accuracy (%)")
    ax.set_ylim(0, 100)
    ax.set_title(f"{report.device} {report.task}-class, {report.backend} fusion")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fold_path = out_dir / "fold_accuracy.png"
    fig.savefig(fold_path)
    written.append(fold_path)

    fig = _new_figure(4.6, 4.2)
    ax = fig.add_subplot(111)
    counts = report.pooled.counts
    image = ax.imshow(counts, cmap="Blues")
    ax.set_xticks(range(report.pooled.n_classes))
    ax.set_yticks(range(report.pooled.n_classes))
    ax.set_xticklabels(report.class_names, rotation=30, ha="right", fontsize=8)
    ax.set_yticklabels(report.class_names, fontsize=8)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    threshold = counts.max() / 2 if counts.max() else 0.5
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            color = "white" if counts[i, j] > threshold else "black"
            ax.text(j, i, str(int(counts[i, j])), ha="center", va="center", color=color, fontsize=9)
    fig.colorbar(image, ax=ax, shrink=0.8)
    ax.set_title("pooled confusion")
    fig.tight_layout()
    cm_path = out_dir / "confusion.png"
    fig.savefig(cm_path)
    written.append(cm_path)
    return written


def write_predictions_csv(report: EvalReport, path: Path) -> Path:
    lines = ["subject_id,start_s,label_code,true_class,predicted_class,selected_branches"]
    for p in report.predictions:
        lines.append(
            f"{p.subject_id},{p.start_s:.10g},{p.label_code},{p.true_class},"
            f"{p.predicted_class},{'+'.join(p.selected_branches)}"
        )
    path.write_text("\n".join(lines) + "\n")
    return path


def write_report(
    report: EvalReport,
    out_dir: str | Path,
    figures: bool = True,
    predictions_csv: bool = True,
) -> dict[str, Path]:
    """report.json plus optional figures and per-segment prediction CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    json_path = out / "report.json"
    json_path.write_text(json.dumps(report_payload(report), indent=2, sort_keys=True) + "\n")
    written["report"] = json_path
    if predictions_csv and report.predictions:
        written["predictions"] = write_predictions_csv(report, out / "predictions.csv")
    if figures:
        for path in render_figures(report, out):
            written[path.stem] = path
    return written


def benchmark_payload(table) -> dict:
    return {
        "device": table.device,
        "task": table.task,
        "seed": table.seed,
        "families": list(table.families),
        "rows": [
            {
                "branch": r.branch_id,
                "family": r.family,
                "accuracy": r.accuracy,
                "macro_f1": r.macro_f1,
            }
            for r in table.rows
        ],
    }


def render_benchmark(table) -> str:
    """Branches as rows, families as columns, each cell macro F1 / accuracy."""
    branch_ids = []
    for r in table.rows:
        if r.branch_id not in branch_ids:
            branch_ids.append(r.branch_id)
    cells = {(r.branch_id, r.family): r for r in table.rows}
    width = 14
    lines = [
        f"device={table.device} task={table.task}-class seed={table.seed} "
        "(cells: macro F1 / accuracy, %)",
        "",
        f"{'branch':<8}" + "".join(f"{fam:>{width}}" for fam in table.families),
    ]
    for branch_id in branch_ids:
        row = f"{branch_id:<8}"
        for fam in table.families:
            r = cells.get((branch_id, fam))
            cell = f"{r.macro_f1 * 100:.2f}/{r.accuracy * 100:.2f}" if r else "-"
            row += f"{cell:>{width}}"
        lines.append(row)
    return "\n".join(lines)


def render_benchmark_figure(table, out_dir: Path) -> Path:
    """Macro-F1 heatmap over the (branch, family) grid."""
    out_dir.mkdir(parents=True, exist_ok=True)
    branch_ids = []
    for r in table.rows:
        if r.branch_id not in branch_ids:
            branch_ids.append(r.branch_id)
    grid = np.full((len(branch_ids), len(table.families)), np.nan)
    for r in table.rows:
        grid[branch_ids.index(r.branch_id), table.families.index(r.family)] = r.macro_f1 * 100

    fig = _new_figure(1.2 * len(table.families) + 2.4, 0.32 * len(branch_ids) + 1.8)
    ax = fig.add_subplot(111)
    image = ax.imshow(grid, cmap="viridis", aspect="auto")
    ax.set_xticks(range(len(table.families)))
    ax.set_xticklabels(table.families, fontsize=8)
    ax.set_yticks(range(len(branch_ids)))
    ax.set_yticklabels(branch_ids, fontsize=7)
    ax.set_xlabel("learner family")
    ax.set_title(f"{table.device} {table.task}-class macro F1 (%)")
    fig.colorbar(image, ax=ax, shrink=0.9)
    fig.tight_layout()
    path = out_dir / "benchmark_f1.png"
    fig.savefig(path)
    return path


def write_benchmark(table, out_dir: str | Path, figures: bool = True) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    json_path = out / "report.json"
    json_path.write_text(json.dumps(benchmark_payload(table), indent=2, sort_keys=True) + "\n")
    written["report"] = json_path
    if figures:
        written["benchmark_f1"] = render_benchmark_figure(table, out)
    return written

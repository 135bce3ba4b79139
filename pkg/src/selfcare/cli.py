"""Command-line entry points: validate, extract, benchmark, eval, predict, synth.

Exit codes: 0 success, 2 input format, 3 store integrity, 4 configuration,
5 other runtime failures.
"""

from __future__ import annotations

import csv
import dataclasses
import os
import sys
from pathlib import Path

import click
import numpy as np

from .dataset.store import load_store, write_store
from .dataset.synthetic import synthetic_wrist_store
from .dataset.types import Device, Modality, SignalChannel, SubjectRecord, WindowedSegment
from .dsp import preprocess
from .errors import (
    ConfigError,
    DataError,
    DesignError,
    FormatError,
    InsufficientBeatsError,
    InsufficientDataError,
    IntegrityError,
    MissingModalityError,
    SelfCareError,
)
from .evaluation.report import (
    render_benchmark,
    render_report,
    write_benchmark,
    write_report,
)
from .evaluation.runner import prepare_segments, run_benchmark, run_selfcare
from .features.extractors import write_feature_csv
from .features.types import DEFAULT_CONFIG
from .fusion.branches import DEVICE_GROUPS
from .fusion.config import FUSION_BACKENDS, default_settings, load_fusion_config
from .fusion.kalman import KalmanFuser
from .fusion.pipeline import FeatureCache, load_bundle, selfcare_classify, train_pipeline
from .fusion.pipeline import save_bundle as persist_bundle
from .learners.models import FAMILIES

EXIT_FORMAT = 2
EXIT_INTEGRITY = 3
EXIT_CONFIG = 4
EXIT_RUNTIME = 5


def _exit_code(err: SelfCareError, format_types: tuple = ()) -> int:
    if isinstance(err, format_types):
        return EXIT_FORMAT
    if isinstance(err, FormatError):
        return EXIT_FORMAT
    if isinstance(err, IntegrityError):
        return EXIT_INTEGRITY
    if isinstance(err, (ConfigError, DesignError)):
        return EXIT_CONFIG
    return EXIT_RUNTIME


def _guard(body, format_types: tuple = ()):
    try:
        body()
    except SelfCareError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(_exit_code(err, format_types))


def _progress(message: str) -> None:
    click.echo(message, err=True)


def _default_jobs(jobs: int) -> int:
    return jobs if jobs > 0 else (os.cpu_count() or 1)


@click.group()
def main():
    """Selective sensor-fusion stress classification toolkit."""


@main.command()
@click.option("--dataset", required=True, type=click.Path(), help="store directory")
def validate(dataset):
    """Check store integrity and print the channel inventory."""

    def body():
        store = load_store(dataset)
        click.echo(f"{len(store)} subjects")
        for sid in sorted(store):
            for device in sorted(store[sid], key=lambda d: d.value):
                rec = store[sid][device]
                inventory = ", ".join(
                    f"{m.value}@{rec.channels[m].rate_hz:g}"
                    for m in sorted(rec.channels, key=lambda m: m.value)
                )
                click.echo(
                    f"{sid}/{device.value}: {len(rec.channels)} channels "
                    f"({inventory}); labels@{rec.label_rate_hz:g}Hz, "
                    f"{rec.duration_s:.1f}s"
                )

    _guard(body)


@main.command()
@click.option("--dataset", required=True, type=click.Path())
@click.option("--device", required=True, type=click.Choice(["wrist", "chest"]))
@click.option("--out", default="features.csv", show_default=True, type=click.Path())
def extract(dataset, device, out):
    """Window one device's recordings and write all features as CSV."""

    def body():
        dev = Device(device)
        store = load_store(dataset)
        segments_by_subject = prepare_segments(store, dev)
        groups = DEVICE_GROUPS[dev]
        cache = FeatureCache(DEFAULT_CONFIG)
        vectors, labels, sids = [], [], []
        for sid in sorted(segments_by_subject):
            for seg in segments_by_subject[sid]:
                vec = cache.get(seg, groups[0])
                for g in groups[1:]:
                    vec = vec.concat(cache.get(seg, g))
                vectors.append(vec)
                labels.append(seg.label)
                sids.append(sid)
        path = write_feature_csv(out, vectors, labels, sids)
        click.echo(
            f"wrote {len(vectors)} segments x {len(vectors[0].names)} features to {path}"
        )

    _guard(body)


@main.command()
@click.option("--dataset", required=True, type=click.Path())
@click.option("--device", required=True, type=click.Choice(["wrist", "chest"]))
@click.option("--task", default="3", show_default=True, type=click.Choice(["2", "3"]))
@click.option("--branches", default=None, help="comma-separated branch ids (default: full catalog)")
@click.option("--families", default=",".join(FAMILIES), show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--jobs", default=0, type=int, help="parallel workers; 0 = all cores")
@click.option("--out", default="selfcare_benchmark", show_default=True, type=click.Path())
def benchmark(dataset, device, task, branches, families, seed, jobs, out):
    """Early-fusion LOSO grid over (branch, learner family) cells."""

    def body():
        dev = Device(device)
        store = load_store(dataset)
        branch_ids = tuple(b.strip() for b in branches.split(",")) if branches else None
        fams = tuple(f.strip().upper() for f in families.split(",") if f.strip())
        table = run_benchmark(
            store,
            dev,
            int(task),
            branch_ids=branch_ids,
            families=fams,
            seed=seed,
            progress=_progress,
            jobs=_default_jobs(jobs),
        )
        click.echo(render_benchmark(table))
        paths = write_benchmark(table, out)
        click.echo("wrote " + ", ".join(str(p) for p in paths.values()))

    _guard(body)


@main.command("eval")
@click.option("--dataset", required=True, type=click.Path())
@click.option("--device", required=True, type=click.Choice(["wrist", "chest"]))
@click.option("--task", default="3", show_default=True, type=click.Choice(["2", "3"]))
@click.option("--fusion", "fusion_backend", default="kalman", show_default=True, type=click.Choice(FUSION_BACKENDS))
@click.option("--delta", default=None, type=float, help="gate selection margin override")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--jobs", default=0, type=int, help="parallel folds; 0 = all cores (feature extraction repeats per fold when parallel)")
@click.option("--out", default="selfcare_report", show_default=True, type=click.Path())
@click.option("--config", "config_path", default=None, type=click.Path(), help="fusion settings file replacing the shipped defaults")
@click.option("--benchmark", "as_benchmark", is_flag=True, help="run the branch/family grid instead of the fused pipeline")
@click.option("--save-bundle", "bundle_dir", default=None, type=click.Path(), help="also train on all subjects and save the bundle here")
def cmd_eval(dataset, device, task, fusion_backend, delta, seed, jobs, out, config_path, as_benchmark, bundle_dir):
    """LOSO evaluation; writes report.json, figures, and predictions."""

    def body():
        dev = Device(device)
        task_n = int(task)
        store = load_store(dataset)
        if as_benchmark:
            table = run_benchmark(
                store, dev, task_n, seed=seed, progress=_progress, jobs=_default_jobs(jobs)
            )
            click.echo(render_benchmark(table))
            paths = write_benchmark(table, out)
            click.echo("wrote " + ", ".join(str(p) for p in paths.values()))
            return

        if config_path:
            settings = load_fusion_config(config_path)
            if settings.device is not dev or settings.n_classes != task_n:
                raise ConfigError(
                    f"--device {device}/--task {task} conflict with config "
                    f"({settings.device.value}, {settings.n_classes}-class)"
                )
        else:
            settings = default_settings(dev, task_n, fusion_backend)
        if settings.backend != fusion_backend:
            settings = dataclasses.replace(settings, backend=fusion_backend)
        if delta is not None:
            settings = dataclasses.replace(settings, delta=float(delta))
        settings.validate()

        report = run_selfcare(
            store,
            dev,
            task_n,
            backend=settings.backend,
            settings=settings,
            seed=seed,
            progress=_progress,
            jobs=_default_jobs(jobs),
        )
        click.echo(render_report(report))
        paths = write_report(report, out)
        if bundle_dir:
            segments_by_subject = prepare_segments(store, dev)
            all_segments = [
                seg for sid in sorted(segments_by_subject) for seg in segments_by_subject[sid]
            ]
            bundle = train_pipeline(all_segments, settings, seed=seed)
            paths["bundle"] = persist_bundle(bundle, bundle_dir)
        click.echo("wrote " + ", ".join(str(p) for p in paths.values()))

    _guard(body)


def read_segment_csv(path: str | Path, device: Device) -> SubjectRecord:
    """Parse the documented raw-segment CSV into a one-subject record.

    Header cells are MODALITY@RATE (for example acc_x@32); each column
    lists that channel's samples, shorter columns padded with blanks.
    """
    path = Path(path)
    if not path.is_file():
        raise FormatError(f"no segment file at {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        columns: list[list[float]] = [[] for _ in header]
        for row in reader:
            for i, cell in enumerate(row):
                cell = cell.strip()
                if not cell:
                    continue
                if i >= len(header):
                    raise FormatError(f"{path}: row wider than header")
                try:
                    columns[i].append(float(cell))
                except ValueError:
                    raise FormatError(f"{path}: non-numeric value '{cell}'") from None

    channels: dict[Modality, SignalChannel] = {}
    for cell, values in zip(header, columns):
        name, sep, rate_text = cell.strip().partition("@")
        if not sep:
            raise FormatError(f"{path}: header cell '{cell}' is not MODALITY@RATE")
        try:
            modality = Modality(name.strip().upper())
        except ValueError:
            raise FormatError(f"{path}: unknown modality '{name}'") from None
        try:
            rate = float(rate_text)
        except ValueError:
            raise FormatError(f"{path}: bad rate in '{cell}'") from None
        if rate <= 0:
            raise FormatError(f"{path}: rate must be positive in '{cell}'")
        if not values:
            raise FormatError(f"{path}: column '{cell}' has no samples")
        if modality in channels:
            raise FormatError(f"{path}: duplicate channel '{name}'")
        channels[modality] = SignalChannel(
            modality, device, rate, samples=np.asarray(values, dtype=np.float64)
        )
    if not channels:
        raise FormatError(f"{path}: no channels")

    duration = min(ch.n_samples / ch.rate_hz for ch in channels.values())
    n_lab = max(1, int(round(duration)))
    labels = np.zeros(n_lab, dtype=np.int32)
    return SubjectRecord("cli", device, channels, labels, 1.0)


@main.command()
@click.option("--bundle", "bundle_path", required=True, type=click.Path())
@click.option("--segment", "segment_path", required=True, type=click.Path())
def predict(bundle_path, segment_path):
    """Classify one raw segment CSV with a saved pipeline bundle."""
    format_types = (
        MissingModalityError,
        DataError,
        InsufficientDataError,
        InsufficientBeatsError,
    )

    def body():
        bundle = load_bundle(bundle_path)
        device = bundle.settings.device
        record = read_segment_csv(segment_path, device)
        record = preprocess(record)
        duration = record.duration_s
        seg = WindowedSegment(
            subject_id="cli",
            device=device,
            start_s=0.0,
            window_s=duration,
            channels=dict(record.channels),
            label=0,
        )
        fuser = (
            KalmanFuser(bundle.settings.kalman)
            if bundle.settings.backend == "kalman"
            else None
        )
        predicted, decision, branch_probs = selfcare_classify(seg, bundle, fuser=fuser)
        if bundle.settings.backend == "kalman":
            scores = fuser.normalized_state()
        elif bundle.settings.backend == "soft":
            scores = np.mean(list(branch_probs.values()), axis=0)
        else:
            votes = np.bincount(
                [int(np.argmax(p)) for p in branch_probs.values()],
                minlength=bundle.settings.n_classes,
            )
            scores = votes / votes.sum()
        click.echo(f"class: {bundle.class_names[predicted]}")
        click.echo(
            "scores: "
            + " ".join(f"{n}={s:.4f}" for n, s in zip(bundle.class_names, scores))
        )
        click.echo(
            f"selected: {'+'.join(decision.selected)} (argmax {decision.argmax_branch})"
        )
        click.echo(
            "gate: "
            + " ".join(
                f"{b}={p:.3f}"
                for b, p in zip(decision.branch_ids, decision.probabilities)
            )
            + f" delta={decision.delta:g} context={decision.context_source}"
        )

    _guard(body, format_types)


@main.command()
@click.option("--out", required=True, type=click.Path())
@click.option("--subjects", default=6, show_default=True, type=int)
@click.option("--duration", default=720.0, show_default=True, type=float)
@click.option("--seed", default=1234, show_default=True, type=int)
def synth(out, subjects, duration, seed):
    """Write a synthetic wrist store for demos and end-to-end checks."""

    def body():
        store = synthetic_wrist_store(subjects, seed=seed, duration_s=duration)
        write_store(out, store)
        click.echo(f"wrote {subjects} synthetic subjects to {out}")

    _guard(body)


if __name__ == "__main__":
    main()

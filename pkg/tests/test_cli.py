"""Command-line interface tests over a small synthetic store."""

import csv
import dataclasses
import hashlib
import itertools
import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from selfcare.cli import main
from selfcare.dataset.store import load_store, write_store
from selfcare.dataset.types import Device
from selfcare.fusion.config import default_settings
from selfcare.fusion.pipeline import save_bundle, train_pipeline


@pytest.fixture(scope="module")
def store_dir(tiny_store, tmp_path_factory):
    root = tmp_path_factory.mktemp("store") / "data"
    write_store(root, tiny_store)
    return root


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


def _store_digest(root: Path) -> str:
    digest = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file():
            digest.update(path.name.encode())
            digest.update(path.read_bytes())
    return digest.hexdigest()


# ---------------------------------------------------------------------------
# validate


def test_validate_reports_inventory(runner, store_dir):
    result = runner.invoke(main, ["validate", "--dataset", str(store_dir)])
    assert result.exit_code == 0, result.output
    assert "2 subjects" in result.output
    assert "SYN01/wrist" in result.output
    assert "BVP@64" in result.output


def test_validate_missing_manifest(runner, tmp_path):
    result = runner.invoke(main, ["validate", "--dataset", str(tmp_path / "nowhere")])
    assert result.exit_code == 2


def test_validate_truncated_channel(runner, store_dir, tmp_path):
    import shutil

    broken = tmp_path / "broken"
    shutil.copytree(store_dir, broken)
    victim = broken / "SYN01" / "wrist" / "eda.bin"
    victim.write_bytes(victim.read_bytes()[:-8])
    result = runner.invoke(main, ["validate", "--dataset", str(broken)])
    assert result.exit_code == 3
    assert "eda.bin" in result.output


# ---------------------------------------------------------------------------
# synth


def test_synth_writes_loadable_store(runner, tmp_path):
    out = tmp_path / "synths"
    result = runner.invoke(
        main,
        ["synth", "--out", str(out), "--subjects", "2", "--duration", "240", "--seed", "5"],
    )
    assert result.exit_code == 0, result.output
    store = load_store(out)
    assert len(store) == 2
    for record_by_device in store.values():
        assert Device.WRIST in record_by_device


# ---------------------------------------------------------------------------
# extract


def test_extract_writes_feature_csv(runner, store_dir, tmp_path):
    out = tmp_path / "features.csv"
    result = runner.invoke(
        main,
        ["extract", "--dataset", str(store_dir), "--device", "wrist", "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    with out.open() as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    assert header[:2] == ["subject_id", "label"]
    assert len(data) >= 2
    assert {row[0] for row in data} == {"SYN01", "SYN02"}
    for row in data:
        for cell in row[2:]:
            float(cell)


# ---------------------------------------------------------------------------
# eval


def test_eval_writes_report_and_figures(runner, store_dir, tmp_path):
    out = tmp_path / "run_a"
    before = _store_digest(store_dir)
    result = runner.invoke(
        main,
        [
            "eval",
            "--dataset", str(store_dir),
            "--device", "wrist",
            "--task", "3",
            "--fusion", "kalman",
            "--seed", "7",
            "--jobs", "1",
            "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    for name in ("report.json", "predictions.csv", "fold_accuracy.png", "confusion.png"):
        assert (out / name).is_file(), name
    payload = json.loads((out / "report.json").read_text())
    assert payload["device"] == "wrist"
    assert payload["task"] == 3
    assert payload["seed"] == 7
    assert len(payload["folds"]) == 2
    # The store itself is read-only to every command.
    assert _store_digest(store_dir) == before

    again = tmp_path / "run_b"
    result = runner.invoke(
        main,
        [
            "eval",
            "--dataset", str(store_dir),
            "--device", "wrist",
            "--task", "3",
            "--fusion", "kalman",
            "--seed", "7",
            "--jobs", "1",
            "--out", str(again),
        ],
    )
    assert result.exit_code == 0, result.output
    assert (out / "report.json").read_bytes() == (again / "report.json").read_bytes()
    assert (out / "predictions.csv").read_bytes() == (again / "predictions.csv").read_bytes()


def test_eval_config_conflict_exits_config_code(runner, store_dir, tmp_path):
    config = tmp_path / "wrist2.cfg"
    config.write_text(
        "device = wrist\ntask = 2\ndelta = 0.10\nshortlist = WB1, WB2, WB3\n"
        "x0 = 0.8, 0.2\nepsilon = 0.7\ngamma = 0.667, 1.1\n"
    )
    result = runner.invoke(
        main,
        [
            "eval",
            "--dataset", str(store_dir),
            "--device", "wrist",
            "--task", "3",
            "--config", str(config),
            "--out", str(tmp_path / "never"),
        ],
    )
    assert result.exit_code == 4
    assert "conflict" in result.output


def test_eval_rejects_unknown_backend(runner, store_dir, tmp_path):
    result = runner.invoke(
        main,
        [
            "eval",
            "--dataset", str(store_dir),
            "--device", "wrist",
            "--fusion", "magic",
            "--out", str(tmp_path / "never"),
        ],
    )
    assert result.exit_code == 2
    assert "magic" in result.output


def test_eval_delta_override_lands_in_report(runner, store_dir, tmp_path):
    out = tmp_path / "delta_run"
    result = runner.invoke(
        main,
        [
            "eval",
            "--dataset", str(store_dir),
            "--device", "wrist",
            "--task", "2",
            "--fusion", "soft",
            "--delta", "0.05",
            "--jobs", "1",
            "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    payload = json.loads((out / "report.json").read_text())
    assert payload["config"]["delta"] == 0.05
    assert payload["backend"] == "soft"


# ---------------------------------------------------------------------------
# benchmark


def test_benchmark_command_writes_grid(runner, store_dir, tmp_path):
    out = tmp_path / "bench"
    result = runner.invoke(
        main,
        [
            "benchmark",
            "--dataset", str(store_dir),
            "--device", "wrist",
            "--task", "3",
            "--branches", "WB3,WB5",
            "--families", "DT",
            "--jobs", "1",
            "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    assert (out / "report.json").is_file()
    assert (out / "benchmark_f1.png").is_file()
    payload = json.loads((out / "report.json").read_text())
    assert {row["branch"] for row in payload["rows"]} == {"WB3", "WB5"}
    assert all(row["family"] == "DT" for row in payload["rows"])
    assert "WB3" in result.output


# ---------------------------------------------------------------------------
# predict


def _write_segment_csv(path, record, t0, t1, skip=()):
    columns = []
    for modality, channel in sorted(record.channels.items(), key=lambda kv: kv[0].value):
        if modality.value in skip:
            continue
        lo = int(t0 * channel.rate_hz)
        hi = int(t1 * channel.rate_hz)
        values = channel.samples[lo:hi]
        columns.append(
            [f"{modality.value.lower()}@{channel.rate_hz:g}"]
            + [f"{v:.8g}" for v in values]
        )
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        for row in itertools.zip_longest(*columns, fillvalue=""):
            writer.writerow(row)
    return path


@pytest.fixture(scope="module")
def bundle_dirs(tiny_store, tiny_segments, tmp_path_factory):
    root = tmp_path_factory.mktemp("bundles")
    segments = [seg for segs in tiny_segments.values() for seg in segs]
    paths = {}
    for backend in ("soft", "kalman"):
        settings = default_settings(Device.WRIST, 3, backend=backend)
        if backend == "kalman":
            # predict sees a single segment, so the filter never gets the
            # run-in it relies on during evaluation; a uniform prior makes
            # the one-shot state follow the measurements.
            settings = dataclasses.replace(
                settings,
                kalman=dataclasses.replace(
                    settings.kalman, x0=np.full(3, 1.0 / 3.0)
                ),
            )
        bundle = train_pipeline(segments, settings, seed=0, n_estimators=20)
        paths[backend] = save_bundle(bundle, root / backend)
    return paths


def test_predict_closed_loop_stress_segment(
    runner, tiny_store, bundle_dirs, tmp_path
):
    record = tiny_store["SYN01"][Device.WRIST]
    segment_csv = _write_segment_csv(tmp_path / "stress.csv", record, 170.0, 230.0)
    for backend in ("soft", "kalman"):
        result = runner.invoke(
            main,
            ["predict", "--bundle", str(bundle_dirs[backend]), "--segment", str(segment_csv)],
        )
        assert result.exit_code == 0, result.output
        assert "class: stress" in result.output
        assert "selected:" in result.output
        assert "gate:" in result.output


def test_predict_missing_modality(runner, tiny_store, bundle_dirs, tmp_path):
    record = tiny_store["SYN01"][Device.WRIST]
    segment_csv = _write_segment_csv(
        tmp_path / "no_eda.csv", record, 170.0, 230.0, skip=("EDA",)
    )
    result = runner.invoke(
        main,
        ["predict", "--bundle", str(bundle_dirs["soft"]), "--segment", str(segment_csv)],
    )
    assert result.exit_code == 2
    assert "EDA" in result.output


def test_predict_rejects_malformed_csv(runner, bundle_dirs, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("eda\n0.5\n0.6\n")
    result = runner.invoke(
        main,
        ["predict", "--bundle", str(bundle_dirs["soft"]), "--segment", str(bad)],
    )
    assert result.exit_code == 2
    assert "MODALITY@RATE" in result.output

    result = runner.invoke(
        main,
        ["predict", "--bundle", str(bundle_dirs["soft"]), "--segment", str(tmp_path / "absent.csv")],
    )
    assert result.exit_code == 2

    empty = tmp_path / "empty.csv"
    empty.write_text("")
    result = runner.invoke(
        main,
        ["predict", "--bundle", str(bundle_dirs["soft"]), "--segment", str(empty)],
    )
    assert result.exit_code == 2

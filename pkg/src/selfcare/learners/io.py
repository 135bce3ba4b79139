"""Versioned binary model container.

Layout: magic "SCML", u16 version, u8 family-tag length + ASCII tag,
u32 config length + JSON config, u64 payload length + npz parameter
archive.  Loaders reject unknown magic or versions outright.
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path

import numpy as np

from ..errors import FormatError
from .models import (
    ABModel,
    DTModel,
    KNNModel,
    LDAModel,
    LearnerConfig,
    RFModel,
    TrainedModel,
)
from .tree import DecisionTree, TreeNodes

MAGIC = b"SCML"
VERSION = 1


def _tree_arrays(prefix: str, tree: DecisionTree) -> dict[str, np.ndarray]:
    nodes = tree.nodes
    return {
        f"{prefix}feature": nodes.feature,
        f"{prefix}threshold": nodes.threshold,
        f"{prefix}left": nodes.left,
        f"{prefix}right": nodes.right,
        f"{prefix}proba": nodes.proba,
    }


def _tree_from_arrays(prefix: str, arrays, n_classes: int, config: LearnerConfig) -> DecisionTree:
    tree = DecisionTree(n_classes, config.min_samples_split, config.max_depth)
    tree.nodes = TreeNodes(
        arrays[f"{prefix}feature"],
        arrays[f"{prefix}threshold"],
        arrays[f"{prefix}left"],
        arrays[f"{prefix}right"],
        arrays[f"{prefix}proba"],
    )
    return tree


def save_model(model: TrainedModel, path: str | Path) -> Path:
    arrays: dict[str, np.ndarray] = {"classes": model.classes_}
    if isinstance(model, DTModel):
        arrays.update(_tree_arrays("t_", model.tree))
    elif isinstance(model, (RFModel, ABModel)):
        arrays["n_trees"] = np.asarray([len(model.trees)])
        for i, tree in enumerate(model.trees):
            arrays.update(_tree_arrays(f"t{i}_", tree))
    elif isinstance(model, LDAModel):
        arrays["coef"] = model.coef
        arrays["intercept"] = model.intercept
    elif isinstance(model, KNNModel):
        arrays["X_std"] = model.X_std
        arrays["y_codes"] = model.y_codes
        arrays["mu"] = model.mu
        arrays["sigma"] = model.sigma
    else:
        raise FormatError(f"cannot serialize model type {type(model).__name__}")

    config = {
        "family": model.family,
        "n_estimators": model.config.n_estimators,
        "min_samples_split": model.config.min_samples_split,
        "max_depth": model.config.max_depth,
        "k": model.config.k,
        "seed": model.config.seed,
        "n_features": model.n_features_,
    }
    config_bytes = json.dumps(config).encode()
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    payload = buf.getvalue()

    path = Path(path)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", VERSION))
        tag = model.family.encode()
        fh.write(struct.pack("<B", len(tag)))
        fh.write(tag)
        fh.write(struct.pack("<I", len(config_bytes)))
        fh.write(config_bytes)
        fh.write(struct.pack("<Q", len(payload)))
        fh.write(payload)
    return path


def load_model(path: str | Path) -> TrainedModel:
    path = Path(path)
    data = path.read_bytes()
    view = memoryview(data)
    if len(data) < 7 or bytes(view[:4]) != MAGIC:
        raise FormatError(f"{path}: not a model container (bad magic)")
    (version,) = struct.unpack_from("<H", view, 4)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported container version {version}")
    pos = 6
    (tag_len,) = struct.unpack_from("<B", view, pos)
    pos += 1
    family = bytes(view[pos : pos + tag_len]).decode()
    pos += tag_len
    (config_len,) = struct.unpack_from("<I", view, pos)
    pos += 4
    try:
        config_raw = json.loads(bytes(view[pos : pos + config_len]))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: corrupt config block: {exc}") from exc
    pos += config_len
    (payload_len,) = struct.unpack_from("<Q", view, pos)
    pos += 8
    if pos + payload_len != len(data):
        raise FormatError(f"{path}: payload length disagrees with file size")
    arrays = np.load(io.BytesIO(data[pos:]), allow_pickle=False)

    if family != config_raw.get("family"):
        raise FormatError(f"{path}: family tag {family} vs config {config_raw.get('family')}")
    config = LearnerConfig(
        family=family,
        n_estimators=int(config_raw["n_estimators"]),
        min_samples_split=int(config_raw["min_samples_split"]),
        max_depth=config_raw["max_depth"],
        k=int(config_raw["k"]),
        seed=int(config_raw["seed"]),
    )
    classes = arrays["classes"]
    n_features = int(config_raw["n_features"])
    n_classes = classes.size

    if family == "DT":
        return DTModel(config, classes, n_features, _tree_from_arrays("t_", arrays, n_classes, config))
    if family in ("RF", "AB"):
        n_trees = int(arrays["n_trees"][0])
        trees = [_tree_from_arrays(f"t{i}_", arrays, n_classes, config) for i in range(n_trees)]
        cls = RFModel if family == "RF" else ABModel
        return cls(config, classes, n_features, trees)
    if family == "LDA":
        return LDAModel(config, classes, n_features, arrays["coef"], arrays["intercept"])
    if family == "KNN":
        return KNNModel(
            config, classes, n_features,
            arrays["X_std"], arrays["y_codes"], arrays["mu"], arrays["sigma"],
        )
    raise FormatError(f"{path}: unknown family tag '{family}'")

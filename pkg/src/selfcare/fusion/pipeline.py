"""End-to-end classification bundle: gate, branch models, late fusion.

Training assembles the per-fold artifacts (branch classifiers, gating
labels, gate).  Classification runs the gate first and extracts features
only for the branches it selects, honoring the lazy-extraction contract.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..dataset.types import WindowedSegment, code_to_class
from ..errors import ConfigError, DataError
from ..features.extractors import extract_group
from ..features.types import DEFAULT_CONFIG, FeatureConfig, FeatureVector
from ..learners.io import load_model, save_model
from ..learners.models import LearnerConfig, TrainedModel
from ..learners.models import fit as fit_learner
from ..learners.models import training_cross_entropy
from .branches import BranchSpec, CATALOG, early_fuse
from .config import FusionSettings, default_settings
from .gating import ConstantGate, GateDecision, gate_select, generate_gating_labels, train_gate
from .kalman import KalmanConfig, KalmanFuser


class FeatureCache:
    """Per-(segment, group) feature memo shared across branches and folds."""

    def __init__(self, config: FeatureConfig = DEFAULT_CONFIG):
        self.config = config
        self._store: dict[tuple[str, str], FeatureVector] = {}

    def get(self, segment: WindowedSegment, group: str) -> FeatureVector:
        key = (segment.segment_id, group)
        hit = self._store.get(key)
        if hit is None:
            hit = extract_group(segment, group, self.config)
            self._store[key] = hit
        return hit

    def matrix(self, segments, groups, branch: BranchSpec) -> np.ndarray:
        rows = [
            early_fuse({g: self.get(seg, g) for g in groups}, branch).values
            for seg in segments
        ]
        return np.vstack(rows)


def shortlist_branches(
    ce_per_branch: dict[str, np.ndarray | float],
    branches: tuple[BranchSpec, ...],
    top_n: int,
) -> tuple[str, ...]:
    """Rank branches by total cross entropy, lowest first; keep top_n."""
    totals = {}
    for b in branches:
        ce = ce_per_branch[b.id]
        totals[b.id] = float(np.sum(ce))
    ranked = sorted(branches, key=lambda b: (totals[b.id], b.n_sensors, b.id))
    return tuple(b.id for b in ranked[:top_n])


@dataclass
class PipelineBundle:
    settings: FusionSettings
    shortlist: tuple[BranchSpec, ...]
    branch_models: dict[str, TrainedModel]
    gate: TrainedModel | ConstantGate
    context_group: str
    feature_config: FeatureConfig = DEFAULT_CONFIG
    class_names: tuple[str, ...] = ()

    def branch(self, branch_id: str) -> BranchSpec:
        for b in self.shortlist:
            if b.id == branch_id:
                return b
        raise ConfigError(f"branch {branch_id} not in this bundle")


def train_pipeline(
    segments: list[WindowedSegment],
    settings: FusionSettings,
    seed: int = 0,
    cache: FeatureCache | None = None,
    feature_config: FeatureConfig = DEFAULT_CONFIG,
    n_estimators: int = 100,
) -> PipelineBundle:
    """Fit branch models, gating labels, and the gate on training segments."""
    if not segments:
        raise DataError("no training segments")
    cache = cache or FeatureCache(feature_config)
    n_classes = settings.n_classes
    y = np.asarray([code_to_class(seg.label, n_classes) for seg in segments])
    shortlist = tuple(CATALOG.branch(i) for i in settings.shortlist_ids)

    branch_models: dict[str, TrainedModel] = {}
    ce_per_branch: dict[str, np.ndarray] = {}
    for branch in shortlist:
        X = cache.matrix(segments, branch.modalities, branch)
        config = LearnerConfig(
            family=branch.family, n_estimators=n_estimators, seed=seed
        )
        model = fit_learner(config, X, y)
        branch_models[branch.id] = model
        ce_per_branch[branch.id] = training_cross_entropy(model, X, y)

    gating_labels = generate_gating_labels(ce_per_branch, shortlist)
    context_group = settings.context_source()
    context_X = np.vstack([cache.get(seg, context_group).values for seg in segments])
    gate = train_gate(context_X, gating_labels)

    from ..dataset.types import THREE_CLASS_NAMES, TWO_CLASS_NAMES

    names = THREE_CLASS_NAMES if n_classes == 3 else TWO_CLASS_NAMES
    return PipelineBundle(
        settings, shortlist, branch_models, gate, context_group, feature_config, names
    )


def _aligned_gate_probabilities(bundle: PipelineBundle, context_row: np.ndarray) -> np.ndarray:
    raw = bundle.gate.predict_proba(context_row)[0]
    gate_classes = [str(c) for c in bundle.gate.classes_]
    aligned = np.zeros(len(bundle.shortlist))
    for j, branch in enumerate(bundle.shortlist):
        if branch.id in gate_classes:
            aligned[j] = raw[gate_classes.index(branch.id)]
    return aligned


def selfcare_classify(
    segment: WindowedSegment,
    bundle: PipelineBundle,
    cache: FeatureCache | None = None,
    fuser: KalmanFuser | None = None,
):
    """Classify one segment; returns (class index, gate decision, branch probs).

    Only the context group and the selected branches' sensor groups are
    extracted.  For Kalman fusion, pass a per-subject fuser to carry state
    across consecutive segments; a fresh filter is used otherwise.
    """
    cache = cache or FeatureCache(bundle.feature_config)
    context = cache.get(segment, bundle.context_group)
    probs = _aligned_gate_probabilities(bundle, context.values[None, :])
    decision = gate_select(
        probs,
        tuple(b.id for b in bundle.shortlist),
        bundle.settings.delta,
        bundle.context_group,
    )

    branch_probs: dict[str, np.ndarray] = {}
    for branch_id in decision.selected:
        branch = bundle.branch(branch_id)
        vectors = {g: cache.get(segment, g) for g in branch.modalities}
        fused = early_fuse(vectors, branch)
        z = bundle.branch_models[branch_id].predict_proba(fused.values[None, :])[0]
        branch_probs[branch_id] = z

    measurements = [branch_probs[b] for b in decision.selected]
    backend = bundle.settings.backend
    if backend == "kalman":
        fuser = fuser or KalmanFuser(bundle.settings.kalman)
        predicted = fuser.step(measurements)
    elif backend == "hard":
        from .voting import hard_vote

        predicted = hard_vote(measurements)
    elif backend == "soft":
        from .voting import soft_vote

        predicted = soft_vote(measurements)
    else:  # pragma: no cover - settings.validate blocks this
        raise ConfigError(f"unknown fusion backend '{backend}'")
    return predicted, decision, branch_probs


def save_bundle(bundle: PipelineBundle, out_dir: str | Path) -> Path:
    """Persist a trained bundle as a directory of model files plus metadata."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    meta = {
        "device": bundle.settings.device.value,
        "task": bundle.settings.n_classes,
        "delta": bundle.settings.delta,
        "backend": bundle.settings.backend,
        "shortlist": list(bundle.settings.shortlist_ids),
        "context_group": bundle.context_group,
        "class_names": list(bundle.class_names),
        "kalman": {
            "x0": bundle.settings.kalman.x0.tolist(),
            "epsilon": bundle.settings.kalman.epsilon,
            "gamma": bundle.settings.kalman.gamma.tolist(),
            "p0_scale": bundle.settings.kalman.p0_scale,
            "q_var": bundle.settings.kalman.q_var,
            "r_map": bundle.settings.kalman.r_map
            if isinstance(bundle.settings.kalman.r_map, str)
            else "three_class",
        },
        "feature_config": dataclasses.asdict(bundle.feature_config),
        "gate_constant": bundle.gate.classes_[0] if isinstance(bundle.gate, ConstantGate) else None,
    }
    for branch_id, model in bundle.branch_models.items():
        save_model(model, out / f"branch_{branch_id}.scml")
    if not isinstance(bundle.gate, ConstantGate):
        save_model(bundle.gate, out / "gate.scml")
    (out / "bundle.json").write_text(json.dumps(meta, indent=2) + "\n")
    return out


def load_bundle(path: str | Path) -> PipelineBundle:
    path = Path(path)
    meta_path = path / "bundle.json"
    if not meta_path.is_file():
        raise ConfigError(f"{path}: no bundle.json")
    meta = json.loads(meta_path.read_text())
    from ..dataset.types import Device

    kal = meta["kalman"]
    kalman = KalmanConfig(
        x0=np.asarray(kal["x0"]),
        epsilon=kal["epsilon"],
        gamma=np.asarray(kal["gamma"]),
        p0_scale=kal["p0_scale"],
        q_var=kal["q_var"],
        r_map=kal["r_map"],
    )
    settings = FusionSettings(
        device=Device(meta["device"]),
        n_classes=int(meta["task"]),
        delta=float(meta["delta"]),
        shortlist_ids=tuple(meta["shortlist"]),
        backend=meta["backend"],
        kalman=kalman,
        context_group=meta["context_group"],
    )
    settings.validate()
    shortlist = tuple(CATALOG.branch(i) for i in settings.shortlist_ids)
    branch_models = {
        b.id: load_model(path / f"branch_{b.id}.scml") for b in shortlist
    }
    fc_raw = meta["feature_config"]
    fc_raw["hrv_bands"] = tuple(tuple(b) for b in fc_raw["hrv_bands"])
    feature_config = FeatureConfig(**fc_raw)
    if meta.get("gate_constant"):
        gate = ConstantGate(meta["gate_constant"], 0)
    else:
        gate = load_model(path / "gate.scml")
    return PipelineBundle(
        settings,
        shortlist,
        branch_models,
        gate,
        meta["context_group"],
        feature_config,
        tuple(meta["class_names"]),
    )


def settings_for(device, n_classes: int, backend: str = "kalman") -> FusionSettings:
    return default_settings(device, n_classes, backend)

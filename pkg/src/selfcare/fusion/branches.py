"""Sensor-combination branch definitions and early feature fusion."""

from __future__ import annotations

from dataclasses import dataclass

from ..dataset.types import Device
from ..errors import DesignError, MissingModalityError
from ..features.extractors import CANONICAL_GROUP_ORDER
from ..features.types import FeatureVector

_WRIST_GROUPS = frozenset({"ACC", "BVP", "EDA", "TEMP"})
_CHEST_GROUPS = frozenset({"ACC", "ECG", "EMG", "EDA", "RESP", "TEMP"})

#: Sensor groups a device offers, in the canonical extraction order.
DEVICE_GROUPS: dict[Device, tuple[str, ...]] = {
    Device.WRIST: tuple(g for g in CANONICAL_GROUP_ORDER if g in _WRIST_GROUPS),
    Device.CHEST: tuple(g for g in CANONICAL_GROUP_ORDER if g in _CHEST_GROUPS),
}


@dataclass(frozen=True)
class BranchSpec:
    id: str
    device: Device
    modalities: tuple[str, ...]
    family: str

    def __post_init__(self):
        allowed = _WRIST_GROUPS if self.device is Device.WRIST else _CHEST_GROUPS
        if not self.modalities:
            raise DesignError(f"{self.id}: empty modality set")
        bad = set(self.modalities) - allowed
        if bad:
            raise DesignError(f"{self.id}: {sorted(bad)} not available on {self.device}")
        ordered = tuple(g for g in CANONICAL_GROUP_ORDER if g in self.modalities)
        object.__setattr__(self, "modalities", ordered)

    @property
    def n_sensors(self) -> int:
        return len(self.modalities)


def _wb(i: int, *groups: str) -> BranchSpec:
    return BranchSpec(f"WB{i}", Device.WRIST, tuple(groups), "RF")


def _cb(i: int, *groups: str) -> BranchSpec:
    return BranchSpec(f"CB{i}", Device.CHEST, tuple(groups), "AB")


WRIST_BRANCHES: tuple[BranchSpec, ...] = (
    _wb(1, "BVP", "EDA", "TEMP"),
    _wb(2, "ACC", "BVP", "EDA"),
    _wb(3, "BVP", "EDA"),
    _wb(4, "ACC", "BVP"),
    _wb(5, "ACC", "EDA"),
)

CHEST_BRANCHES: tuple[BranchSpec, ...] = (
    _cb(1, "ECG", "RESP", "EMG", "EDA", "TEMP"),
    _cb(2, "ACC", "ECG", "RESP", "EMG", "TEMP"),
    _cb(3, "ACC", "RESP", "EMG", "TEMP"),
    _cb(4, "ACC", "ECG", "RESP", "EMG"),
    _cb(5, "ACC", "ECG", "RESP", "EDA"),
    _cb(6, "ACC", "ECG", "EMG", "TEMP"),
    _cb(7, "ACC", "ECG", "EMG", "EDA"),
    _cb(8, "ACC", "RESP", "EDA", "TEMP"),
    _cb(9, "ACC", "ECG", "EDA", "TEMP"),
    _cb(10, "ECG", "RESP", "EMG", "TEMP"),
    _cb(11, "ECG", "RESP", "EMG", "EDA"),
    _cb(12, "ECG", "EMG", "EDA", "TEMP"),
    _cb(13, "ECG", "RESP", "EDA", "TEMP"),
    _cb(14, "RESP", "EMG", "EDA", "TEMP"),
    _cb(15, "ACC", "EDA", "TEMP"),
    _cb(16, "ACC", "EMG", "EDA"),
    _cb(17, "ACC", "RESP", "EDA"),
    _cb(18, "ACC", "ECG", "RESP"),
    _cb(19, "ACC", "RESP", "EMG"),
    _cb(20, "ACC", "ECG", "EDA"),
    _cb(21, "ECG", "RESP", "EMG"),
    _cb(22, "ECG", "EDA", "TEMP"),
    _cb(23, "ECG", "RESP", "EDA"),
    _cb(24, "ECG", "EMG", "EDA"),
    _cb(25, "RESP", "EMG", "EDA"),
    _cb(26, "RESP", "EDA", "TEMP"),
    _cb(27, "EMG", "EDA", "TEMP"),
    _cb(28, "ACC", "RESP"),
    _cb(29, "ACC", "EMG"),
    _cb(30, "ACC", "ECG"),
    _cb(31, "ACC", "EDA"),
    _cb(32, "ACC", "TEMP"),
    _cb(33, "ECG", "RESP"),
    _cb(34, "ECG", "EMG"),
    _cb(35, "ECG", "EDA"),
    _cb(36, "ECG", "TEMP"),
    _cb(37, "EDA", "TEMP"),
    _cb(38, "RESP", "EDA"),
    _cb(39, "RESP", "EMG"),
    _cb(40, "RESP", "TEMP"),
    _cb(41, "EMG", "EDA"),
    _cb(42, "EMG", "TEMP"),
)

#: Shortlisted branch ids by (device, n_classes); the wrist set serves both
#: tasks, the chest sets differ.
SHORTLISTS: dict[tuple[Device, int], tuple[str, ...]] = {
    (Device.WRIST, 3): ("WB1", "WB2", "WB3"),
    (Device.WRIST, 2): ("WB1", "WB2", "WB3"),
    (Device.CHEST, 3): ("CB1", "CB12", "CB14", "CB24", "CB27"),
    (Device.CHEST, 2): ("CB5", "CB7", "CB9", "CB13", "CB20"),
}


class BranchCatalog:
    """The fixed published branch sets with shortlist lookups."""

    def __init__(self):
        self._by_id = {b.id: b for b in WRIST_BRANCHES + CHEST_BRANCHES}

    def branch(self, branch_id: str) -> BranchSpec:
        try:
            return self._by_id[branch_id]
        except KeyError:
            raise DesignError(f"unknown branch id '{branch_id}'") from None

    def device_branches(self, device: Device) -> tuple[BranchSpec, ...]:
        return WRIST_BRANCHES if Device(device) is Device.WRIST else CHEST_BRANCHES

    def shortlist(self, device: Device, n_classes: int) -> tuple[BranchSpec, ...]:
        try:
            ids = SHORTLISTS[(Device(device), int(n_classes))]
        except KeyError:
            raise DesignError(f"no shortlist for ({device}, {n_classes}-class)") from None
        return tuple(self.branch(i) for i in ids)


CATALOG = BranchCatalog()


def early_fuse(vectors: dict[str, FeatureVector], branch: BranchSpec) -> FeatureVector:
    """Concatenate per-group vectors in the branch's canonical order."""
    missing = [g for g in branch.modalities if g not in vectors]
    if missing:
        raise MissingModalityError(
            f"{branch.id}: no feature vector for {', '.join(missing)}"
        )
    fused = vectors[branch.modalities[0]]
    for group in branch.modalities[1:]:
        fused = fused.concat(vectors[group])
    return fused

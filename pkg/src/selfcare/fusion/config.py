"""Key-value fusion configuration files and the shipped defaults.

File format: one ``key = value`` pair per line, ``#`` comments, vectors
comma-separated.  The shipped per-(device, task) defaults hold every
tuned constant so they can be inspected and overridden without touching
code.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np

from ..dataset.types import Device
from ..errors import ConfigError
from .branches import DEVICE_GROUPS, SHORTLISTS
from .gating import CONTEXT_GROUP
from .kalman import KalmanConfig

FUSION_BACKENDS = ("hard", "soft", "kalman")


@dataclass(frozen=True)
class FusionSettings:
    device: Device
    n_classes: int
    delta: float
    shortlist_ids: tuple[str, ...]
    backend: str
    kalman: KalmanConfig
    #: Sensor group feeding the gate; None selects the device standard.
    context_group: str | None = None

    def context_source(self) -> str:
        return self.context_group or CONTEXT_GROUP[self.device]

    def validate(self) -> None:
        if self.n_classes not in (2, 3):
            raise ConfigError(f"task must be 2- or 3-class, got {self.n_classes}")
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigError(f"delta must lie in [0, 1], got {self.delta}")
        if self.backend not in FUSION_BACKENDS:
            raise ConfigError(f"unknown fusion backend '{self.backend}'")
        if not self.shortlist_ids:
            raise ConfigError("empty branch shortlist")
        if self.kalman.n_classes != self.n_classes:
            raise ConfigError(
                f"Kalman dimensions ({self.kalman.n_classes}) differ from task "
                f"classes ({self.n_classes})"
            )
        if (
            self.context_group is not None
            and self.context_group not in DEVICE_GROUPS[self.device]
        ):
            raise ConfigError(
                f"context group '{self.context_group}' not available on "
                f"{self.device.value}"
            )


def _parse_floats(raw: str) -> np.ndarray:
    try:
        return np.asarray([float(v) for v in raw.split(",")], dtype=np.float64)
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got '{raw}'") from None


def parse_fusion_config(text: str) -> FusionSettings:
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got '{body}'")
        key, value = body.split("=", 1)
        key = key.strip()
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        pairs[key] = value.strip()

    required = ("device", "task", "delta", "shortlist", "x0", "epsilon", "gamma")
    missing = [k for k in required if k not in pairs]
    if missing:
        raise ConfigError(f"fusion config lacks keys: {', '.join(missing)}")

    try:
        device = Device(pairs["device"])
    except ValueError:
        raise ConfigError(f"unknown device '{pairs['device']}'") from None
    try:
        n_classes = int(pairs["task"])
        delta = float(pairs["delta"])
    except ValueError as exc:
        raise ConfigError(f"bad numeric value: {exc}") from None

    kalman = KalmanConfig(
        x0=_parse_floats(pairs["x0"]),
        epsilon=float(pairs["epsilon"]),
        gamma=_parse_floats(pairs["gamma"]),
        p0_scale=float(pairs.get("p0_scale", 0.01)),
        q_var=float(pairs.get("q_var", 5e-4)),
        r_map=pairs.get("r_map", "three_class" if n_classes == 3 else "two_class"),
    )
    settings = FusionSettings(
        device=device,
        n_classes=n_classes,
        delta=delta,
        shortlist_ids=tuple(s.strip() for s in pairs["shortlist"].split(",")),
        backend=pairs.get("fusion", "kalman"),
        kalman=kalman,
        context_group=pairs["context"].upper() if "context" in pairs else None,
    )
    settings.validate()
    return settings


def load_fusion_config(path: str | Path) -> FusionSettings:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"fusion config {path} not found")
    return parse_fusion_config(path.read_text())


_DEFAULT_FILES = {
    (Device.WRIST, 3): "wrist_3class.cfg",
    (Device.WRIST, 2): "wrist_2class.cfg",
    (Device.CHEST, 3): "chest_3class.cfg",
    (Device.CHEST, 2): "chest_2class.cfg",
}


def default_settings(device: Device, n_classes: int, backend: str = "kalman") -> FusionSettings:
    """The shipped tuned configuration for one (device, task) pair."""
    key = (Device(device), int(n_classes))
    if key not in _DEFAULT_FILES:
        raise ConfigError(f"no default fusion config for ({device}, {n_classes}-class)")
    text = (
        resources.files("selfcare").joinpath("configs", _DEFAULT_FILES[key]).read_text()
    )
    settings = parse_fusion_config(text)
    if settings.backend != backend:
        settings = replace(settings, backend=backend)
        settings.validate()
    if settings.shortlist_ids != SHORTLISTS[key]:
        raise ConfigError("shipped config shortlist diverged from the catalog")
    return settings

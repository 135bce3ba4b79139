"""Kalman-filter late fusion over sequential branch measurements.

State is the per-class score vector; transition and measurement models
are identity, so each time step is one predict (add process noise) plus
one update per accepted measurement.  The state is deliberately left
unnormalized; a clamped-renormalized view exists for reporting only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DataError, NumericalError

_SYMMETRY_TOLERANCE = 1e-6
_R_VARIANCE_FLOOR = 1e-10


def r_three_class(z: np.ndarray) -> np.ndarray:
    """Diagonal measurement noise ((1-z)*2)^2 per class."""
    return np.diag(((1.0 - z) * 2.0) ** 2)


def r_two_class(z: np.ndarray) -> np.ndarray:
    """Diagonal measurement noise ((1-z)/2)^2 per class."""
    return np.diag(((1.0 - z) / 2.0) ** 2)


R_MAPS = {"three_class": r_three_class, "two_class": r_two_class}


@dataclass(frozen=True)
class KalmanConfig:
    x0: np.ndarray
    epsilon: float
    gamma: np.ndarray
    p0_scale: float = 0.01
    q_var: float = 5e-4
    r_map: str = "three_class"

    def __post_init__(self):
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=np.float64))
        object.__setattr__(self, "gamma", np.asarray(self.gamma, dtype=np.float64))
        if self.x0.ndim != 1 or self.x0.size < 2:
            raise ConfigError("x0 must be a vector over >= 2 classes")
        if self.gamma.shape != self.x0.shape:
            raise ConfigError("gamma and x0 dimensions differ")
        if not np.all(self.gamma > 0.0):
            raise ConfigError("gamma must be elementwise positive")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon must lie in [0, 1]")
        if self.p0_scale <= 0.0 or self.q_var < 0.0:
            raise ConfigError("p0_scale must be positive and q_var non-negative")
        if callable(self.r_map):
            return
        if self.r_map not in R_MAPS:
            raise ConfigError(f"unknown measurement-noise map '{self.r_map}'")

    @property
    def n_classes(self) -> int:
        return self.x0.size

    def measurement_noise(self, z: np.ndarray) -> np.ndarray:
        fn = self.r_map if callable(self.r_map) else R_MAPS[self.r_map]
        return np.asarray(fn(z), dtype=np.float64)


@dataclass
class KalmanFuser:
    """Stateful filter for one subject's temporally ordered segments."""

    config: KalmanConfig
    x: np.ndarray = field(init=False)
    P: np.ndarray = field(init=False)

    def __post_init__(self):
        self.reset()

    def reset(self) -> None:
        n = self.config.n_classes
        self.x = self.config.x0.copy()
        self.P = self.config.p0_scale * np.eye(n)

    def step(self, measurements) -> int:
        """One predict plus sequential updates; returns the argmax class."""
        n = self.config.n_classes
        self.P = self.P + self.config.q_var * np.eye(n)
        for z in measurements:
            z = np.asarray(z, dtype=np.float64).ravel()
            if z.size != n:
                raise DataError(f"measurement of size {z.size}, expected {n}")
            if not np.all(np.isfinite(z)):
                raise DataError("non-finite measurement vector")
            if float(np.max(z)) < self.config.epsilon:
                continue
            scaled = z * self.config.gamma
            R = self.config.measurement_noise(scaled)
            # A fully confident measurement maps to zero noise; floor the
            # variances so S stays invertible once P has contracted there.
            R = R + _R_VARIANCE_FLOOR * np.eye(n)
            S = self.P + R
            # K = P S^{-1}; S is symmetric, so solve on the left.
            K = np.linalg.solve(S, self.P).T
            self.x = self.x + K @ (scaled - self.x)
            self.P = self.P - K @ self.P
            asymmetry = float(np.max(np.abs(self.P - self.P.T)))
            self.P = (self.P + self.P.T) / 2.0
            if asymmetry > _SYMMETRY_TOLERANCE:
                raise NumericalError(
                    f"covariance asymmetry {asymmetry:.3e} exceeds "
                    f"{_SYMMETRY_TOLERANCE:.0e}"
                )
        return int(np.argmax(self.x))

    def normalized_state(self) -> np.ndarray:
        """Clamped-renormalized state for reporting; argmax-preserving view."""
        clamped = np.maximum(self.x, 0.0)
        total = clamped.sum()
        if total <= 0.0:
            return np.full(self.config.n_classes, 1.0 / self.config.n_classes)
        return clamped / total


def kalman_fuse(segment_measurements, config: KalmanConfig) -> np.ndarray:
    """Fuse one subject's stream; element i is the class for segment i.

    Each element of ``segment_measurements`` is that segment's ordered
    branch measurement list.  The filter starts fresh, so calling this per
    subject gives the per-subject reset behavior.
    """
    fuser = KalmanFuser(config)
    return np.asarray([fuser.step(ms) for ms in segment_measurements], dtype=int)

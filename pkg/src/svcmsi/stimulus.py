"""Visual angular-velocity stimuli.

Two forms are supported: a memoryless regression on fore-aft acceleration
(``CoefficientStimulus``) and an explicit sampled trajectory
(``TrajectoryStimulus``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from svcmsi.profile import MotionProfile

AXES = {"roll": 0, "pitch": 1, "yaw": 2}
DEFAULT_N_TERMS = 10


@dataclass(frozen=True, eq=False)
class RegressionCoefficients:
    """Coefficients ``h_0 .. h_N`` of the arctangent-power regression."""

    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=np.float64).reshape(-1)
        if len(h) < 1:
            raise ValueError("need at least the constant coefficient h_0")
        if not np.all(np.isfinite(h)):
            raise ValueError("coefficients must be finite")
        h.flags.writeable = False
        object.__setattr__(self, "h", h)

    @property
    def n_terms(self) -> int:
        return len(self.h) - 1

    @classmethod
    def zeros(cls, n_terms: int = DEFAULT_N_TERMS) -> RegressionCoefficients:
        if n_terms < 0:
            raise ValueError("n_terms must be >= 0")
        return cls(np.zeros(n_terms + 1))

    def __eq__(self, other):
        if not isinstance(other, RegressionCoefficients):
            return NotImplemented
        return np.array_equal(self.h, other.h)


def regression_basis(a_x, n_terms: int) -> np.ndarray:
    """Design matrix ``[1, atan(a), atan(a^2), ..., atan(a^N)]``, one row per sample.

    The basis term is the arctangent of the i-th power; swap this function to
    try the ``atan(a)^i`` reading instead.
    """
    a_x = np.atleast_1d(np.asarray(a_x, dtype=np.float64))
    powers = np.arange(1, n_terms + 1)
    basis = np.empty((len(a_x), n_terms + 1))
    basis[:, 0] = 1.0
    if n_terms:
        basis[:, 1:] = np.arctan(a_x[:, None] ** powers)
    return basis


def eval_regression(coeffs: RegressionCoefficients, a_x):
    """Visual angular velocity for fore-aft acceleration ``a_x`` (scalar or array)."""
    out = regression_basis(a_x, coeffs.n_terms) @ coeffs.h
    return float(out[0]) if np.ndim(a_x) == 0 else out


@dataclass(frozen=True, eq=False)
class CoefficientStimulus:
    coefficients: RegressionCoefficients
    axis: str = "pitch"

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {sorted(AXES)}, got {self.axis!r}")

    def omega_vis(self, a_x) -> np.ndarray:
        """(m, 3) stimulus for acceleration samples ``a_x``."""
        out = np.zeros((len(a_x), 3))
        out[:, AXES[self.axis]] = eval_regression(self.coefficients, np.asarray(a_x))
        return out


@dataclass(frozen=True, eq=False)
class TrajectoryStimulus:
    """Sampled stimulus, row k applied at ``t = k * dt``."""

    dt: float
    omega_vis: np.ndarray

    def __post_init__(self):
        w = np.array(self.omega_vis, dtype=np.float64)
        if w.ndim != 2 or w.shape[1] != 3 or len(w) < 1:
            raise ValueError(f"omega_vis must have shape (n, 3), got {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("stimulus samples must be finite")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        w.flags.writeable = False
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "omega_vis", w)

    @property
    def duration(self) -> float:
        return (len(self.omega_vis) - 1) * self.dt

    @property
    def time(self) -> np.ndarray:
        return np.arange(len(self.omega_vis)) * self.dt

    def sample(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        grid = self.time
        return np.column_stack([np.interp(t, grid, self.omega_vis[:, i]) for i in range(3)])


VisualStimulus = Union[CoefficientStimulus, TrajectoryStimulus]


def stimulus_from_profile(coeffs: RegressionCoefficients, profile: MotionProfile) -> TrajectoryStimulus:
    """Evaluate the regression on every profile sample (pitch axis)."""
    return TrajectoryStimulus(profile.dt, CoefficientStimulus(coeffs).omega_vis(profile.accel[:, 0]))

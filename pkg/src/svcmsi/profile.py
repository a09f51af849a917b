from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class MotionProfile:
    """Uniformly sampled head-frame inertial acceleration and angular velocity.

    ``accel`` and ``ang_vel`` are (n, 3) arrays in m/s^2 and rad/s, sample k
    taken at ``t = k * dt``. Axes: x forward, y left, z up.
    """

    dt: float
    accel: np.ndarray
    ang_vel: np.ndarray

    def __post_init__(self):
        accel = np.array(self.accel, dtype=np.float64)
        ang_vel = np.array(self.ang_vel, dtype=np.float64)
        if accel.ndim != 2 or accel.shape[1] != 3:
            raise ValueError(f"accel must have shape (n, 3), got {accel.shape}")
        if ang_vel.shape != accel.shape:
            raise ValueError("accel and ang_vel must have equal shapes")
        if len(accel) < 2:
            raise ValueError("a motion profile needs at least 2 samples")
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (np.all(np.isfinite(accel)) and np.all(np.isfinite(ang_vel))):
            raise ValueError("motion samples must be finite")
        accel.flags.writeable = False
        ang_vel.flags.writeable = False
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "accel", accel)
        object.__setattr__(self, "ang_vel", ang_vel)

    def __len__(self):
        return len(self.accel)

    @property
    def duration(self) -> float:
        return (len(self.accel) - 1) * self.dt

    @property
    def time(self) -> np.ndarray:
        return np.arange(len(self.accel)) * self.dt

    @classmethod
    def zeros(cls, duration: float, dt: float) -> MotionProfile:
        n = int(round(duration / dt)) + 1
        return cls(dt, np.zeros((n, 3)), np.zeros((n, 3)))

    def sample(self, t) -> tuple[np.ndarray, np.ndarray]:
        """Linearly interpolated (accel, ang_vel) at times ``t`` (shape (m,))."""
        t = np.asarray(t, dtype=np.float64)
        grid = self.time
        accel = np.column_stack([np.interp(t, grid, self.accel[:, i]) for i in range(3)])
        ang_vel = np.column_stack([np.interp(t, grid, self.ang_vel[:, i]) for i in range(3)])
        return accel, ang_vel

    def negated_x(self) -> MotionProfile:
        """Mirror image under x -> -x (polar x flips, axial y and z flip)."""
        accel = self.accel * np.array([-1.0, 1.0, 1.0])
        ang_vel = self.ang_vel * np.array([1.0, -1.0, -1.0])
        return MotionProfile(self.dt, accel, ang_vel)

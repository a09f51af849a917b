"""Fixed-step RK4 integration of the sickness model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from svcmsi import _kernels
from svcmsi._kernels import STATE_SIZE
from svcmsi.model import ModelParams, ModelState, equilibrium_state
from svcmsi.profile import MotionProfile
from svcmsi.stimulus import AXES, CoefficientStimulus, TrajectoryStimulus, VisualStimulus

DEFAULT_SIM_DT = 0.01
_GRID_TOL = 1e-9


class CoverageError(ValueError):
    """The stimulus does not span the motion profile."""


class SimulationDivergence(ArithmeticError):
    def __init__(self, step: int, detail: str = ""):
        self.step = step
        msg = f"simulation diverged at step {step}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


@dataclass(frozen=True, eq=False)
class SicknessTrace:
    """Per-step simulation record, n+1 rows including the initial state.

    ``states`` is None for traces read back from files without state columns.
    """

    dt: float
    time: np.ndarray
    msi: np.ndarray
    d_v_norm: np.ndarray
    phi: np.ndarray
    omega_vis: np.ndarray
    states: np.ndarray | None

    def __len__(self):
        return len(self.time)

    @property
    def final_msi(self) -> float:
        return float(self.msi[-1])

    def state(self, k: int) -> ModelState:
        return ModelState.from_array(self.states[k])


class SimulationPlan:
    """Motion inputs resampled onto the RK4 half-step grid of one profile.

    Building the plan once lets an optimizer evaluate many stimuli against
    the same motion without re-interpolating it.
    """

    def __init__(self, profile: MotionProfile, params: ModelParams, sim_dt: float = DEFAULT_SIM_DT,
                 initial: ModelState | None = None):
        if not sim_dt > 0:
            raise ValueError(f"sim_dt must be positive, got {sim_dt}")
        if sim_dt > profile.dt * (1 + _GRID_TOL):
            raise ValueError(f"sim_dt ({sim_dt}) must not exceed the profile sample interval ({profile.dt})")
        n_steps = int(round(profile.duration / sim_dt))
        if abs(n_steps * sim_dt - profile.duration) > _GRID_TOL * max(1.0, profile.duration):
            raise ValueError(
                f"profile duration {profile.duration} is not a multiple of sim_dt {sim_dt}"
            )
        self.profile = profile
        self.params = params
        self.sim_dt = float(sim_dt)
        self.n_steps = n_steps
        self.half_times = np.arange(2 * n_steps + 1) * (0.5 * sim_dt)
        accel, ang_vel = profile.sample(self.half_times)
        self.inputs = np.zeros((2 * n_steps + 1, 9))
        self.inputs[:, 0:3] = accel
        self.inputs[:, 3:6] = ang_vel
        self._p = params.as_array()
        y0 = (initial if initial is not None else equilibrium_state(params)).to_array()
        if not np.all(np.isfinite(y0)):
            raise ValueError("initial state must be finite")
        self._y0 = y0

    @property
    def half_accel_x(self) -> np.ndarray:
        return self.inputs[:, 0]

    def stimulus_on_grid(self, stimulus: VisualStimulus | None) -> np.ndarray:
        """(2n+1, 3) visual input at every half step."""
        if stimulus is None:
            return np.zeros((len(self.half_times), 3))
        if isinstance(stimulus, CoefficientStimulus):
            return stimulus.omega_vis(self.half_accel_x)
        if isinstance(stimulus, TrajectoryStimulus):
            if stimulus.duration < self.profile.duration - _GRID_TOL * max(1.0, self.profile.duration):
                raise CoverageError(
                    f"stimulus covers {stimulus.duration} s but the profile lasts {self.profile.duration} s"
                )
            return stimulus.sample(self.half_times)
        raise TypeError(f"unsupported stimulus type {type(stimulus).__name__}")

    def _inputs_with(self, omega_vis_grid: np.ndarray) -> np.ndarray:
        u = self.inputs.copy()
        u[:, 6:9] = omega_vis_grid
        return u

    def terminal(self, omega_vis_grid: np.ndarray) -> tuple[float, float]:
        """(terminal MSI, sum of MSI over all grid points) without storing the trace."""
        u = self._inputs_with(omega_vis_grid)
        failed, y, m2_sum = _kernels.integrate(self._y0, u, self.sim_dt, self._p, np.empty((0, STATE_SIZE)))
        if failed >= 0:
            raise SimulationDivergence(failed)
        p_max = self.params.p_max
        return p_max * y[13], p_max * m2_sum

    def pitch_terminal(self, pitch_grid: np.ndarray) -> tuple[float, float]:
        grid = np.zeros((len(self.half_times), 3))
        grid[:, AXES["pitch"]] = pitch_grid
        return self.terminal(grid)

    def run(self, omega_vis_grid: np.ndarray) -> SicknessTrace:
        u = self._inputs_with(omega_vis_grid)
        states = np.empty((self.n_steps + 1, STATE_SIZE))
        failed, _, _ = _kernels.integrate(self._y0, u, self.sim_dt, self._p, states)
        if failed >= 0:
            raise SimulationDivergence(failed)
        dv, phi = _kernels.conflict_series(states, self._p)
        return SicknessTrace(
            dt=self.sim_dt,
            time=self.half_times[::2].copy(),
            msi=self.params.p_max * states[:, 13],
            d_v_norm=dv,
            phi=phi,
            omega_vis=np.ascontiguousarray(omega_vis_grid[::2]),
            states=states,
        )


def simulate(profile: MotionProfile, stimulus: VisualStimulus | None = None,
             params: ModelParams | None = None, sim_dt: float = DEFAULT_SIM_DT,
             initial: ModelState | None = None) -> SicknessTrace:
    """Integrate the model over ``profile`` with visual input ``stimulus``.

    ``stimulus=None`` means no visual motion. Inputs are linearly
    interpolated at the RK4 substep times; a coefficient stimulus is
    evaluated on the interpolated fore-aft acceleration.
    """
    params = params if params is not None else ModelParams()
    plan = SimulationPlan(profile, params, sim_dt, initial)
    return plan.run(plan.stimulus_on_grid(stimulus))

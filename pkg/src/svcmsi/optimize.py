"""Visual stimuli that minimize predicted sickness."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from svcmsi.model import ModelParams
from svcmsi.profile import MotionProfile
from svcmsi.simplex import MinimizeConfig, simplex_minimize
from svcmsi.simulate import DEFAULT_SIM_DT, SimulationDivergence, SimulationPlan
from svcmsi.stimulus import (
    AXES,
    DEFAULT_N_TERMS,
    RegressionCoefficients,
    TrajectoryStimulus,
    regression_basis,
)

DEFAULT_KNOT_DT = 0.5
DEFAULT_BOUND = 2.0


class OptimizerConfigError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FitResult:
    coefficients: RegressionCoefficients
    objective: float
    baseline_objective: float
    evaluations: int
    budget_exhausted: bool = False

    @property
    def reduction_ratio(self) -> float:
        """optimized / baseline terminal MSI; 1.0 when both are zero."""
        if self.baseline_objective == 0:
            return 1.0
        return self.objective / self.baseline_objective


@dataclass(frozen=True, eq=False)
class TrajectoryResult:
    stimulus: TrajectoryStimulus
    knots: np.ndarray
    cost: float
    baseline_cost: float
    evaluations: int
    budget_exhausted: bool = False


def _divergence_with(err: SimulationDivergence, x: np.ndarray, label: str) -> SimulationDivergence:
    wrapped = SimulationDivergence(err.step, f"{label} {np.array2string(x, precision=17)}")
    wrapped.candidate = x.copy()
    return wrapped


def fit_coefficients(profile: MotionProfile, params: ModelParams | None = None,
                     n_terms: int = DEFAULT_N_TERMS, config: MinimizeConfig | None = None,
                     sim_dt: float = DEFAULT_SIM_DT) -> FitResult:
    """Fit the acceleration regression that minimizes MSI at the end of ``profile``.

    The search starts from the zero vector, so the returned objective is
    never above the no-stimulus baseline.
    """
    if n_terms < 1:
        raise OptimizerConfigError("n_terms must be >= 1")
    params = params or ModelParams()
    config = config or MinimizeConfig()
    plan = SimulationPlan(profile, params, sim_dt)
    basis = regression_basis(plan.half_accel_x, n_terms)

    def terminal_msi(h):
        try:
            return plan.pitch_terminal(basis @ h)[0]
        except SimulationDivergence as err:
            raise _divergence_with(err, h, "coefficients") from err

    x0 = np.zeros(n_terms + 1)
    baseline = terminal_msi(x0)
    if baseline == 0.0:
        # nothing to improve on; skip the search
        return FitResult(RegressionCoefficients(x0), 0.0, 0.0, 1)
    result = simplex_minimize(terminal_msi, x0, config, f0=baseline)
    return FitResult(
        coefficients=RegressionCoefficients(result.x),
        objective=result.fun,
        baseline_objective=baseline,
        evaluations=result.evaluations,
        budget_exhausted=result.budget_exhausted,
    )


def knot_times(duration: float, knot_dt: float) -> np.ndarray:
    """Knots every ``knot_dt`` from 0, plus a final partial knot at ``duration``."""
    n_full = int(math.floor(duration / knot_dt + 1e-9))
    times = np.arange(n_full + 1) * knot_dt
    if duration - times[-1] > 1e-9 * max(1.0, duration):
        times = np.append(times, duration)
    else:
        times[-1] = min(times[-1], duration)
    return times


def _trajectory_from_knots(knots_t, values, bound, profile: MotionProfile) -> TrajectoryStimulus:
    clipped = np.clip(values, -bound, bound)
    w = np.zeros((len(profile), 3))
    w[:, AXES["pitch"]] = np.interp(profile.time, knots_t, clipped)
    return TrajectoryStimulus(profile.dt, w)


def optimize_trajectory(profile: MotionProfile, params: ModelParams | None = None,
                        knot_dt: float = DEFAULT_KNOT_DT, bound: float = DEFAULT_BOUND,
                        config: MinimizeConfig | None = None,
                        sim_dt: float = DEFAULT_SIM_DT) -> TrajectoryResult:
    """Piecewise-linear pitch stimulus minimizing the summed MSI over the horizon.

    Decision variables are the stimulus values at the knots, clamped to
    ``[-bound, bound]``. The zero trajectory is the first candidate.
    """
    params = params or ModelParams()
    config = config or MinimizeConfig()
    if not (knot_dt > 0 and math.isfinite(knot_dt)):
        raise OptimizerConfigError(f"knot_dt must be positive, got {knot_dt}")
    if knot_dt < sim_dt * (1 - 1e-9):
        raise OptimizerConfigError(f"knot_dt ({knot_dt}) must be >= sim_dt ({sim_dt})")
    if not (bound >= 0 and math.isfinite(bound)):
        raise OptimizerConfigError(f"bound must be >= 0, got {bound}")
    if knot_dt > profile.duration * (1 + 1e-9):
        raise OptimizerConfigError(
            f"knot_dt ({knot_dt}) exceeds the profile duration ({profile.duration})"
        )

    plan = SimulationPlan(profile, params, sim_dt)
    knots_t = knot_times(profile.duration, knot_dt)

    def summed_msi(values):
        stimulus = _trajectory_from_knots(knots_t, values, bound, profile)
        try:
            return plan.terminal(plan.stimulus_on_grid(stimulus))[1]
        except SimulationDivergence as err:
            raise _divergence_with(err, values, "knot values") from err

    x0 = np.zeros(len(knots_t))
    baseline = summed_msi(x0)
    if bound == 0 or baseline == 0.0:
        return TrajectoryResult(
            _trajectory_from_knots(knots_t, x0, bound, profile), x0, baseline, baseline, 1
        )
    result = simplex_minimize(summed_msi, x0, config, f0=baseline)
    best = np.clip(result.x, -bound, bound)
    return TrajectoryResult(
        stimulus=_trajectory_from_knots(knots_t, best, bound, profile),
        knots=best,
        cost=result.fun,
        baseline_cost=baseline,
        evaluations=result.evaluations,
        budget_exhausted=result.budget_exhausted,
    )

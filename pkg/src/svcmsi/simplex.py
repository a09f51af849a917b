"""Budgeted Nelder-Mead minimization with deterministic restarts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize


@dataclass(frozen=True)
class MinimizeConfig:
    max_evaluations: int = 2000
    x_tolerance: float = 1e-8
    f_tolerance: float = 1e-12
    initial_step: float = 0.1
    restarts: int = 2
    seed: int = 0

    def __post_init__(self):
        if int(self.max_evaluations) != self.max_evaluations or self.max_evaluations < 1:
            raise ValueError("max_evaluations must be an integer >= 1")
        if not (self.x_tolerance > 0 and self.f_tolerance > 0):
            raise ValueError("tolerances must be > 0")
        if not self.initial_step > 0:
            raise ValueError("initial_step must be > 0")
        if int(self.restarts) != self.restarts or self.restarts < 0:
            raise ValueError("restarts must be an integer >= 0")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


@dataclass(frozen=True, eq=False)
class MinimizeResult:
    x: np.ndarray
    fun: float
    evaluations: int
    budget_exhausted: bool

    def __iter__(self):
        # allows ``x, f, n = simplex_minimize(...)``
        return iter((self.x, self.fun, self.evaluations))


class _BudgetSpent(Exception):
    pass


class _Tracker:
    def __init__(self, objective, budget):
        self.objective = objective
        self.budget = budget
        self.calls = 0
        self.best_x = None
        self.best_f = math.inf
        self.known: dict[bytes, float] = {}

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.tobytes() in self.known:
            return self.known[x.tobytes()]
        if self.calls >= self.budget:
            raise _BudgetSpent
        self.calls += 1
        f = float(self.objective(x.copy()))
        if not math.isfinite(f):
            return math.inf
        # strict improvement keeps the earliest point on ties
        if f < self.best_f:
            self.best_f = f
            self.best_x = np.array(x, dtype=np.float64)
        return f


def simplex_minimize(objective, x0, config: MinimizeConfig | None = None,
                     f0: float | None = None) -> MinimizeResult:
    """Minimize ``objective`` from ``x0`` with the downhill simplex method.

    The first evaluation is always ``x0``, so the returned value never
    exceeds ``objective(x0)``; pass ``f0`` if that value is already known.
    After the first descent, each restart begins
    at the best point so far plus a seeded Gaussian kick of size
    ``initial_step``. Exhausting the evaluation budget is a normal return
    with ``budget_exhausted`` set.
    """
    config = config or MinimizeConfig()
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    if x0.ndim != 1 or len(x0) < 1:
        raise ValueError("x0 must be a non-empty vector")
    f0 = float(objective(x0.copy()) if f0 is None else f0)
    if not math.isfinite(f0):
        raise ValueError(f"objective is not finite at x0 ({f0})")

    tracker = _Tracker(objective, config.max_evaluations)
    tracker.calls = 1
    tracker.best_x, tracker.best_f = x0.copy(), f0
    # scipy evaluates the start vertex again; answer it from memory
    tracker.known[x0.tobytes()] = f0
    rng = np.random.default_rng(config.seed)
    k = len(x0)
    exhausted = False

    for attempt in range(config.restarts + 1):
        start = x0 if attempt == 0 else tracker.best_x + rng.normal(0.0, config.initial_step, k)
        simplex = np.vstack([start, start + config.initial_step * np.eye(k)])
        try:
            minimize(
                tracker,
                start,
                method="Nelder-Mead",
                options={
                    "initial_simplex": simplex,
                    "xatol": config.x_tolerance,
                    "fatol": config.f_tolerance,
                    "maxfev": config.max_evaluations,
                    "maxiter": 10 * config.max_evaluations,
                    "adaptive": True,
                },
            )
        except _BudgetSpent:
            exhausted = True
            break
        if tracker.calls >= config.max_evaluations:
            exhausted = True
            break

    return MinimizeResult(tracker.best_x.copy(), tracker.best_f, tracker.calls, exhausted)

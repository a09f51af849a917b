"""Vestibular-visual subjective-vertical-conflict model.

The state vector is a flat array of 14 floats::

    [0:3]   x_scc      sensory SCC filter state (rad/s)
    [3:6]   v_s        sensed vertical (m/s^2)
    [6:9]   x_scc_hat  internal SCC filter state (rad/s)
    [9:12]  v_hat      internal vertical estimate (m/s^2)
    [12]    m1         first lag state
    [13]    m2         second lag state, MSI = p_max * m2

Axes are x forward, y left, z up. Gravity enters the GIA as +gravity on z.
The equations themselves live in ``_kernels``; the functions here are thin
wrappers so the integrator and this API can never disagree.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from svcmsi import _kernels
from svcmsi._kernels import STATE_SIZE

X_SCC = slice(0, 3)
V_S = slice(3, 6)
X_SCC_HAT = slice(6, 9)
V_HAT = slice(9, 12)
M1 = 12
M2 = 13


class ParameterError(ValueError):
    """Raised for out-of-range model parameters."""


class NumericError(ArithmeticError):
    """Raised when a state or input contains non-finite values."""


@dataclass(frozen=True)
class ModelParams:
    k_a: float = 0.1
    k_omega: float = 0.8
    k_omega_c: float = 10.0
    k_v_c: float = 5.0
    k_a_c: float = 1.0
    k_omega_vis: float = 10.0
    tau_d: float = 7.0
    tau_v: float = 2.0
    hill_b: float = 0.5
    hill_n: float = 2.0
    tau_l: float = 720.0
    p_max: float = 85.0
    gravity: float = 9.81

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ParameterError(f"{f.name} must be a number, got {value!r}")
            if not math.isfinite(value):
                raise ParameterError(f"{f.name} must be finite")
        for name in ("k_a", "k_omega", "k_omega_c", "k_v_c", "k_a_c", "k_omega_vis"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0")
        for name in ("tau_d", "tau_v", "tau_l", "gravity", "hill_b"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be > 0")
        if self.hill_n < 1:
            raise ParameterError("hill_n must be >= 1")
        if not 0 < self.p_max <= 100:
            raise ParameterError("p_max must be in (0, 100]")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=np.float64)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ModelState:
    x_scc: np.ndarray
    v_s: np.ndarray
    x_scc_hat: np.ndarray
    v_hat: np.ndarray
    m1: float
    m2: float

    def to_array(self) -> np.ndarray:
        y = np.empty(STATE_SIZE)
        y[X_SCC] = self.x_scc
        y[V_S] = self.v_s
        y[X_SCC_HAT] = self.x_scc_hat
        y[V_HAT] = self.v_hat
        y[M1] = self.m1
        y[M2] = self.m2
        return y

    @classmethod
    def from_array(cls, y) -> ModelState:
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (STATE_SIZE,):
            raise ValueError(f"state array must have shape ({STATE_SIZE},), got {y.shape}")
        return cls(
            x_scc=y[X_SCC].copy(),
            v_s=y[V_S].copy(),
            x_scc_hat=y[X_SCC_HAT].copy(),
            v_hat=y[V_HAT].copy(),
            m1=float(y[M1]),
            m2=float(y[M2]),
        )


@dataclass
class AlgebraicSignals:
    omega_s: np.ndarray
    omega_hat: np.ndarray
    omega_s_hat: np.ndarray
    d_omega: np.ndarray
    d_omega_vis: np.ndarray
    d_a: np.ndarray
    f_hat: np.ndarray
    d_v: np.ndarray
    phi: float


def _pack_inputs(a, omega, omega_vis) -> np.ndarray:
    return np.concatenate([_vec3("a", a), _vec3("omega", omega), _vec3("omega_vis", omega_vis)])[None, :]


def _vec3(name, value) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite values")
    return arr


def hill_saturation(conflict_norm: float, b: float, n: float) -> float:
    """Saturating map ``h^n / (h^n + b^n)`` of a conflict magnitude into [0, 1)."""
    if conflict_norm < 0:
        raise ValueError(f"conflict_norm must be >= 0, got {conflict_norm}")
    if b <= 0:
        raise ValueError("b must be > 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(_kernels.hill(float(conflict_norm), float(b), float(n)))


def equilibrium_state(params: ModelParams) -> ModelState:
    """Rest state: upright, no rotation, no accumulated sickness."""
    if not isinstance(params, ModelParams):
        raise ParameterError("params must be a ModelParams")
    up = np.array([0.0, 0.0, params.gravity])
    return ModelState(
        x_scc=np.zeros(3), v_s=up.copy(), x_scc_hat=np.zeros(3), v_hat=up.copy(), m1=0.0, m2=0.0
    )


def _checked_state(state: ModelState) -> np.ndarray:
    y = state.to_array()
    if not np.all(np.isfinite(y)):
        raise NumericError("state contains non-finite values")
    return y


def algebraic_layer(state: ModelState, a, omega, omega_vis, params: ModelParams) -> AlgebraicSignals:
    y = _checked_state(state)
    out = np.empty((8, 3))
    _, phi = _kernels.algebraic(y, _pack_inputs(a, omega, omega_vis), 0, params.as_array(), out)
    return AlgebraicSignals(*(row.copy() for row in out), phi=float(phi))


def state_derivative(state: ModelState, a, omega, omega_vis, params: ModelParams) -> ModelState:
    """Time derivative of ``state`` packed as a ModelState."""
    y = _checked_state(state)
    dy = np.empty(STATE_SIZE)
    _kernels.derivative(y, _pack_inputs(a, omega, omega_vis), 0, params.as_array(), np.empty((8, 3)), dy)
    return ModelState.from_array(dy)

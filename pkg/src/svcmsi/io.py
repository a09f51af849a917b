"""Scenario generation, file formats and run configuration.

Motion and trace data are CSV with 15 significant digits; coefficients and
configs are JSON.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from svcmsi.model import STATE_SIZE, ModelParams, ParameterError
from svcmsi.optimize import DEFAULT_BOUND, DEFAULT_KNOT_DT
from svcmsi.profile import MotionProfile
from svcmsi.simplex import MinimizeConfig
from svcmsi.simulate import DEFAULT_SIM_DT, SicknessTrace
from svcmsi.stimulus import AXES, DEFAULT_N_TERMS, RegressionCoefficients, TrajectoryStimulus

MOTION_COLUMNS = ("t", "ax", "ay", "az", "wx", "wy", "wz")
TRACE_COLUMNS = ("t", "msi", "dv_norm", "phi", "wvis_x", "wvis_y", "wvis_z")
STATE_COLUMNS = tuple(
    f"{name}_{axis}" for name in ("x_scc", "v_s", "x_scc_hat", "v_hat") for axis in "xyz"
) + ("m1", "m2")
STIMULUS_COLUMNS = ("t", "wvis_x", "wvis_y", "wvis_z")
GRID_JITTER = 1e-9


class FormatError(ValueError):
    """Malformed motion, trace, stimulus or coefficient file."""


class ConfigError(ValueError):
    """Invalid run configuration."""


def _fmt(x: float) -> str:
    return format(float(x), ".15g")


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _read_table(path, required: tuple[str, ...], min_rows: int = 0) -> dict[str, np.ndarray]:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise FormatError(f"{path}: missing columns {', '.join(missing)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise FormatError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                values = [float(v) for v in row]
            except ValueError:
                raise FormatError(f"{path}: line {lineno}: non-numeric value") from None
            if not all(math.isfinite(v) for v in values):
                raise FormatError(f"{path}: line {lineno}: non-finite value")
            rows.append(values)
    if len(rows) < min_rows:
        raise FormatError(f"{path}: need at least {min_rows} data rows, got {len(rows)}")
    data = np.array(rows, dtype=np.float64).reshape(len(rows), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def _uniform_dt(path, t: np.ndarray) -> float:
    dt = (t[-1] - t[0]) / (len(t) - 1)
    if not dt > 0:
        raise FormatError(f"{path}: time column must increase")
    expected = t[0] + np.arange(len(t)) * dt
    bad = np.flatnonzero(np.abs(t - expected) > GRID_JITTER)
    if len(bad):
        raise FormatError(f"{path}: line {bad[0] + 2}: time grid is not uniform")
    return float(dt)


# -- scenarios ---------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioSpec:
    """Fore-aft sinusoid ``a_x(t) = A sin(2 pi f t)``."""

    A: float = 0.5
    f_hz: float = 0.25
    duration: float = 1800.0
    dt: float = 0.01

    def __post_init__(self):
        for name in ("A", "f_hz", "duration", "dt"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(f"{name} must be a number")
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
        if self.dt >= 1.0 / (2.0 * self.f_hz):
            raise ValueError(f"dt must be below half the period (dt < {1.0 / (2.0 * self.f_hz)})")
        if self.duration < self.dt:
            raise ValueError("duration must cover at least one sample interval")


def sinusoid_profile(spec: ScenarioSpec) -> MotionProfile:
    n = int(math.floor(spec.duration / spec.dt + 1e-9)) + 1
    t = np.arange(n) * spec.dt
    accel = np.zeros((n, 3))
    accel[:, 0] = spec.A * np.sin(2.0 * np.pi * spec.f_hz * t)
    return MotionProfile(spec.dt, accel, np.zeros((n, 3)))


# -- motion ------------------------------------------------------------------


def write_motion_csv(profile: MotionProfile, path):
    rows = np.column_stack([profile.time, profile.accel, profile.ang_vel])
    _write_rows(path, MOTION_COLUMNS, rows)


def read_motion_csv(path) -> MotionProfile:
    cols = _read_table(path, MOTION_COLUMNS, min_rows=2)
    dt = _uniform_dt(path, cols["t"])
    accel = np.column_stack([cols["ax"], cols["ay"], cols["az"]])
    ang_vel = np.column_stack([cols["wx"], cols["wy"], cols["wz"]])
    return MotionProfile(dt, accel, ang_vel)


# -- traces ------------------------------------------------------------------


def write_trace_csv(trace: SicknessTrace, path, full_state: bool = False):
    header = TRACE_COLUMNS
    parts = [trace.time, trace.msi, trace.d_v_norm, trace.phi, trace.omega_vis.reshape(-1, 3)]
    if full_state:
        if trace.states is None:
            raise ValueError("trace carries no state snapshots")
        header = header + STATE_COLUMNS
        parts.append(trace.states.reshape(-1, STATE_SIZE))
    rows = np.column_stack(parts) if len(trace) else np.empty((0, len(header)))
    _write_rows(path, header, rows)


def read_trace_csv(path) -> SicknessTrace:
    cols = _read_table(path, TRACE_COLUMNS)
    t = cols["t"]
    dt = _uniform_dt(path, t) if len(t) >= 2 else 0.0
    states = None
    if all(c in cols for c in STATE_COLUMNS):
        states = np.column_stack([cols[c] for c in STATE_COLUMNS])
    return SicknessTrace(
        dt=dt,
        time=t,
        msi=cols["msi"],
        d_v_norm=cols["dv_norm"],
        phi=cols["phi"],
        omega_vis=np.column_stack([cols["wvis_x"], cols["wvis_y"], cols["wvis_z"]]).reshape(-1, 3),
        states=states,
    )


# -- stimuli -----------------------------------------------------------------


def write_stimulus_csv(stimulus: TrajectoryStimulus, path):
    _write_rows(path, STIMULUS_COLUMNS, np.column_stack([stimulus.time, stimulus.omega_vis]))


def read_stimulus_csv(path) -> TrajectoryStimulus:
    cols = _read_table(path, STIMULUS_COLUMNS, min_rows=2)
    dt = _uniform_dt(path, cols["t"])
    return TrajectoryStimulus(dt, np.column_stack([cols["wvis_x"], cols["wvis_y"], cols["wvis_z"]]))


def write_coefficients_json(coeffs: RegressionCoefficients, path, axis: str = "pitch"):
    doc = {"n_terms": coeffs.n_terms, "h": [float(v) for v in coeffs.h], "axis": axis}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def read_coefficients_json(path) -> tuple[RegressionCoefficients, str]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise FormatError(f"{path}: malformed JSON ({err})") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object")
    unknown = set(doc) - {"n_terms", "h", "axis"}
    if unknown:
        raise FormatError(f"{path}: unknown key: {sorted(unknown)[0]}")
    if "h" not in doc:
        raise FormatError(f"{path}: missing key: h")
    try:
        coeffs = RegressionCoefficients(doc["h"])
    except (TypeError, ValueError) as err:
        raise FormatError(f"{path}: bad coefficients ({err})") from None
    if "n_terms" in doc and doc["n_terms"] != coeffs.n_terms:
        raise FormatError(f"{path}: n_terms={doc['n_terms']} but {len(coeffs.h)} coefficients given")
    axis = doc.get("axis", "pitch")
    if axis not in AXES:
        raise FormatError(f"{path}: unknown axis {axis!r}")
    return coeffs, axis


# -- configuration -----------------------------------------------------------


@dataclass(frozen=True)
class OptimizerSettings:
    minimize: MinimizeConfig = field(default_factory=MinimizeConfig)
    n_terms: int = DEFAULT_N_TERMS
    knot_dt: float = DEFAULT_KNOT_DT
    bound: float = DEFAULT_BOUND


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = field(default_factory=ModelParams)
    sim_dt: float = DEFAULT_SIM_DT
    scenario: ScenarioSpec | None = None
    motion: Path | None = None
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    out: Path | None = None
    svg: Path | None = None


_PARAM_KEYS = {f.name for f in fields(ModelParams)}
_MINIMIZE_KEYS = {f.name for f in fields(MinimizeConfig)}
_OPTIMIZER_KEYS = _MINIMIZE_KEYS | {"n_terms", "knot_dt", "bound"}
_SCENARIO_KEYS = {f.name for f in fields(ScenarioSpec)}
_TOP_KEYS = _PARAM_KEYS | {"tau_l_minutes", "sim_dt", "scenario", "motion", "optimizer", "out", "svg"}


def _check_keys(doc: dict, allowed: set, prefix: str = ""):
    for key in doc:
        if key not in allowed:
            raise ConfigError(f"unknown key: {prefix}{key}")


def _number(key, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    return value


def config_from_dict(doc: dict, base_dir: Path | None = None) -> RunConfig:
    """Build a validated RunConfig; unspecified model parameters keep their defaults."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(doc, _TOP_KEYS)
    base_dir = base_dir or Path.cwd()

    param_values = {k: _number(k, doc[k]) for k in _PARAM_KEYS if k in doc}
    if "tau_l_minutes" in doc:
        if "tau_l" in doc:
            raise ConfigError("tau_l: give either tau_l (s) or tau_l_minutes, not both")
        param_values["tau_l"] = 60.0 * _number("tau_l_minutes", doc["tau_l_minutes"])
    try:
        params = ModelParams(**{k: float(v) for k, v in param_values.items()})
    except ParameterError as err:
        raise ConfigError(str(err)) from None

    sim_dt = float(_number("sim_dt", doc.get("sim_dt", DEFAULT_SIM_DT)))
    if not sim_dt > 0:
        raise ConfigError("sim_dt must be positive")

    scenario = None
    if "scenario" in doc:
        block = doc["scenario"]
        if not isinstance(block, dict):
            raise ConfigError("scenario must be an object")
        _check_keys(block, _SCENARIO_KEYS, "scenario.")
        try:
            scenario = ScenarioSpec(**{k: _number(f"scenario.{k}", v) for k, v in block.items()})
        except ValueError as err:
            raise ConfigError(f"scenario: {err}") from None

    optimizer = OptimizerSettings()
    if "optimizer" in doc:
        block = doc["optimizer"]
        if not isinstance(block, dict):
            raise ConfigError("optimizer must be an object")
        _check_keys(block, _OPTIMIZER_KEYS, "optimizer.")
        for k, v in block.items():
            _number(f"optimizer.{k}", v)
        try:
            minimize = MinimizeConfig(**{k: v for k, v in block.items() if k in _MINIMIZE_KEYS})
        except ValueError as err:
            raise ConfigError(f"optimizer: {err}") from None
        n_terms = block.get("n_terms", DEFAULT_N_TERMS)
        if int(n_terms) != n_terms or n_terms < 1:
            raise ConfigError("optimizer.n_terms must be an integer >= 1")
        knot_dt = float(block.get("knot_dt", DEFAULT_KNOT_DT))
        bound = float(block.get("bound", DEFAULT_BOUND))
        if not knot_dt > 0:
            raise ConfigError("optimizer.knot_dt must be positive")
        if not bound >= 0:
            raise ConfigError("optimizer.bound must be >= 0")
        optimizer = OptimizerSettings(minimize, int(n_terms), knot_dt, bound)

    def _path(key, must_exist):
        if key not in doc or doc[key] is None:
            return None
        if not isinstance(doc[key], str):
            raise ConfigError(f"{key}: expected a path string")
        p = Path(doc[key])
        p = p if p.is_absolute() else base_dir / p
        if must_exist and not p.exists():
            raise ConfigError(f"{key}: file not found: {p}")
        return p

    return RunConfig(
        params=params,
        sim_dt=sim_dt,
        scenario=scenario,
        motion=_path("motion", True),
        optimizer=optimizer,
        out=_path("out", False),
        svg=_path("svg", False),
    )


def load_config(path=None) -> RunConfig:
    """Load a JSON run config; ``None`` gives the all-defaults config."""
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: malformed JSON ({err})") from None
    return config_from_dict(doc, path.parent)


def config_to_dict(config: RunConfig) -> dict:
    doc: dict = dict(config.params.to_dict())
    doc["sim_dt"] = config.sim_dt
    if config.scenario is not None:
        doc["scenario"] = asdict(config.scenario)
    opt = config.optimizer
    doc["optimizer"] = {
        **asdict(opt.minimize),
        "n_terms": opt.n_terms,
        "knot_dt": opt.knot_dt,
        "bound": opt.bound,
    }
    for key in ("motion", "out", "svg"):
        value = getattr(config, key)
        if value is not None:
            doc[key] = str(value)
    return doc


def dump_config(config: RunConfig, path):
    Path(path).write_text(json.dumps(config_to_dict(config), indent=2) + "\n")


# -- reports -----------------------------------------------------------------


def write_json(doc: dict, path):
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


_SVG_COLORS = ("steelblue", "darkorange", "seagreen", "crimson")


def write_msi_svg(traces: dict[str, SicknessTrace], path, width: int = 640, height: int = 360):
    """MSI-vs-time polylines, one per labelled trace, on a fixed viewBox."""
    margin = 40
    t_max = max((float(tr.time[-1]) for tr in traces.values() if len(tr)), default=0.0) or 1.0
    y_max = max((float(tr.msi.max()) for tr in traces.values() if len(tr)), default=0.0) or 1.0
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {width} {height}">',
        f'  <rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'  <line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
        f'  <line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
        f'  <text x="{width / 2}" y="{height - 8}" text-anchor="middle" font-size="12">time [s], 0 to {_fmt(t_max)}</text>',
        f'  <text x="8" y="{margin - 20}" font-size="12">MSI [%], 0 to {_fmt(y_max)}</text>',
    ]
    for i, (label, trace) in enumerate(traces.items()):
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        # thin long traces to at most ~2000 vertices
        stride = max(1, len(trace) // 2000)
        t = np.asarray(trace.time)[::stride]
        msi = np.asarray(trace.msi)[::stride]
        xs = margin + (width - 2 * margin) * t / t_max
        ys = height - margin - (height - 2 * margin) * msi / y_max
        points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
        lines.append(f'  <polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>')
        lines.append(
            f'  <text x="{width - margin}" y="{margin + 14 * i}" text-anchor="end" font-size="12" fill="{color}">{label}</text>'
        )
    lines.append("</svg>")
    Path(path).write_text("\n".join(lines) + "\n")
